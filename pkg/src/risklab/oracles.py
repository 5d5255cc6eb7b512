"""Exact and Monte Carlo excess-risk computation.

For ridge and GD the risk conditional on the design is available in closed
form (the noise is integrated out exactly), so Monte Carlo only ever averages
over design draws.  For SGD under Gaussian design the expected risk follows
an exact recursion on the diagonal of the second-moment matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimators import GDConfig, RidgeConfig, SGDConfig, gd_filter_factors, max_stable_stepsize
from .problems import Dataset, ProblemInstance, sample_dataset

__all__ = [
    "RiskEstimate",
    "excess_risk",
    "gd_conditional_risk",
    "ridge_conditional_risk",
    "sgd_exact_risk_gaussian",
    "fixed_design_ridge_risk",
    "fixed_design_gd_risk",
    "monte_carlo_risk",
]


@dataclass(frozen=True)
class RiskEstimate:
    mean: float
    stderr: float
    trials: int
    method: str  # exact_conditional | exact_recursion | fixed_design | monte_carlo
    bias: float | None = None
    variance: float | None = None

    def __post_init__(self):
        if self.mean < 0:
            raise ValueError("risk must be nonnegative")


def excess_risk(weights: np.ndarray, problem: ProblemInstance) -> float:
    """||w - w*||^2_Sigma, evaluated in the covariance eigenbasis."""
    if weights.shape != problem.wstar.shape:
        raise ValueError("dimension mismatch")
    diff = weights - problem.wstar
    return float(diff @ (problem.spectrum.eigenvalues * diff))


def _conditional_risk(dataset: Dataset, problem: ProblemInstance,
                      phi: np.ndarray) -> RiskEstimate:
    """Exact E[excess risk | X] for a spectral-filter estimator.

    ``phi`` holds the per-mode learned fractions in the SVD basis of X:
    the estimator's conditional mean is V diag(phi) V^T w* and its noise
    response is V diag(phi / s) U^T eps.  Covers both ridge and GD.
    """
    lam = problem.spectrum.eigenvalues
    keep = dataset.rank_mask
    phi = np.where(keep, phi, 0.0)
    c = dataset.rowspace_coords(problem.wstar)
    p = problem.wstar - dataset.from_rowspace(phi * c)
    bias = float(p @ (lam * p))
    rdiag = dataset.sigma_rowspace_diag(lam)
    a = dataset.s**2
    var_weights = np.zeros_like(a)
    var_weights[keep] = phi[keep] ** 2 / a[keep]
    variance = float(problem.sigma2 * np.sum(var_weights * rdiag))
    return RiskEstimate(mean=bias + variance, stderr=0.0, trials=1,
                        method="exact_conditional", bias=bias, variance=variance)


def gd_conditional_risk(dataset: Dataset, problem: ProblemInstance,
                        eta: float, t: int) -> RiskEstimate:
    """Exact conditional risk of t steps of GD at stepsize eta."""
    if t < 0:
        raise ValueError("t must be >= 0")
    limit = max_stable_stepsize(dataset)
    if eta > limit * (1 + 1e-12):
        raise ValueError(f"stepsize {eta} exceeds stability limit {limit}")
    phi = gd_filter_factors(dataset, eta, t)
    return _conditional_risk(dataset, problem, phi)


def ridge_conditional_risk(dataset: Dataset, problem: ProblemInstance,
                           lam: float) -> RiskEstimate:
    """Exact conditional risk of the ridge estimator at regularization lam."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    a = dataset.s**2
    if lam == 0:
        phi = dataset.rank_mask.astype(float)
    else:
        phi = a / (a + dataset.n * lam)
    return _conditional_risk(dataset, problem, phi)


def _sgd_stepsizes(n: int, eta0: float) -> np.ndarray:
    from .estimators import sgd_schedule

    if n == 1:
        return np.array([eta0])
    return sgd_schedule(n, eta0)


def sgd_exact_risk_gaussian(problem: ProblemInstance, n: int,
                            eta0: float) -> RiskEstimate:
    """Exact expected excess risk of last-iterate SGD under Gaussian design.

    Propagates the diagonal of B_s = E[(w_s - w*)(w_s - w*)^T] through the
    Gaussian fourth-moment identity E[xx^T M xx^T] = 2 Sigma M Sigma
    + Sigma tr(M Sigma).  Because Sigma is diagonal in the working basis, the
    off-diagonal entries of B never feed back into its diagonal (they evolve
    autonomously), so starting from diag(w*^2) is exact and the whole pass is
    O(n*d).  The bias (noise-free) and variance (noise-driven) components are
    propagated separately; the recursion is affine so they add exactly.
    """
    if problem.design != "gaussian":
        raise ValueError("exact SGD recursion requires Gaussian design")
    if n < 0:
        raise ValueError("n must be >= 0")
    lam = problem.spectrum.eigenvalues
    b_bias = problem.wstar**2
    b_noise = np.zeros_like(lam)
    if n > 0:
        for eta in _sgd_stepsizes(n, eta0):
            decay = (1.0 - eta * lam) ** 2
            b_bias = decay * b_bias + eta**2 * lam * (lam * b_bias + np.sum(lam * b_bias))
            b_noise = (decay * b_noise + eta**2 * lam * (lam * b_noise + np.sum(lam * b_noise))
                       + eta**2 * problem.sigma2 * lam)
    bias = float(np.sum(lam * b_bias))
    variance = float(np.sum(lam * b_noise))
    return RiskEstimate(mean=bias + variance, stderr=0.0, trials=1,
                        method="exact_recursion", bias=bias, variance=variance)


def fixed_design_ridge_risk(dataset: Dataset, problem: ProblemInstance,
                            lam: float) -> RiskEstimate:
    """Exact expected risk of ridge with the design frozen.

    Here the risk metric is the empirical covariance (1/n) X^T X; the exact
    value is lam^2 <w* w*^T, S(S + lam I)^-2> + (sigma^2/n) tr(S^2 (S + lam I)^-2)
    with S empirical.
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    n = dataset.n
    keep = dataset.rank_mask
    emp = dataset.s[keep] ** 2 / n
    c = dataset.rowspace_coords(problem.wstar)[keep]
    if lam == 0:
        bias = 0.0
        variance = float(problem.sigma2 * emp.size / n)
    else:
        bias = float(lam**2 * np.sum(emp * c**2 / (emp + lam) ** 2))
        variance = float(problem.sigma2 / n * np.sum(emp**2 / (emp + lam) ** 2))
    return RiskEstimate(mean=bias + variance, stderr=0.0, trials=1,
                        method="fixed_design", bias=bias, variance=variance)


def fixed_design_gd_risk(dataset: Dataset, problem: ProblemInstance,
                         eta: float, t: int) -> RiskEstimate:
    """Exact expected risk of t GD steps with the design frozen.

    Risk metric is the empirical covariance; the exact value is
    ||(I - eta S)^t w*||^2_S + (sigma^2/n) tr((I - (I - eta S)^t)^2).
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    n = dataset.n
    keep = dataset.rank_mask
    emp = dataset.s[keep] ** 2 / n
    if emp.size and eta > 1.0 / emp[0] * (1 + 1e-12):
        raise ValueError(f"stepsize {eta} exceeds 1/lambda_1(empirical) = {1.0 / emp[0]}")
    c = dataset.rowspace_coords(problem.wstar)[keep]
    shrink = (1.0 - eta * emp) ** t
    bias = float(np.sum(emp * shrink**2 * c**2))
    variance = float(problem.sigma2 / n * np.sum((1.0 - shrink) ** 2))
    return RiskEstimate(mean=bias + variance, stderr=0.0, trials=1,
                        method="fixed_design", bias=bias, variance=variance)


def _trial_seed(seed, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(trial,))


def sgd_paths_excess_risk(problem: ProblemInstance, n: int, eta0: float,
                          trials: int, seed) -> np.ndarray:
    """Excess risks of ``trials`` independent SGD paths, vectorized over paths."""
    lam = problem.spectrum.eigenvalues
    sqrt_lam = np.sqrt(lam)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    d = problem.d
    w = np.zeros((trials, d))
    sigma = math.sqrt(problem.sigma2)
    if n > 0:
        etas = _sgd_stepsizes(n, eta0)
        for s in range(n):
            z = rng.standard_normal((trials, d)) if problem.design == "gaussian" \
                else rng.integers(0, 2, size=(trials, d)).astype(float) * 2.0 - 1.0
            x = z * sqrt_lam
            y = x @ problem.wstar + sigma * rng.standard_normal(trials)
            resid = np.einsum("ij,ij->i", x, w) - y
            w -= etas[s] * resid[:, None] * x
    diff = w - problem.wstar
    return np.einsum("ij,j,ij->i", diff, lam, diff)


def monte_carlo_risk(problem: ProblemInstance, config, n: int, trials: int,
                     seed) -> RiskEstimate:
    """Monte Carlo risk over fresh data draws.

    For ridge/GD configs the noise is integrated exactly per draw (the trial
    average is over designs only, a variance-reduced estimator).  For SGD the
    average is over full sample paths.  Per-trial randomness comes from
    counter-derived seeds, so results do not depend on execution order.
    """
    if trials < 2:
        raise ValueError("trials must be >= 2")
    if isinstance(config, SGDConfig):
        risks = sgd_paths_excess_risk(problem, n, config.eta0, trials, seed)
    else:
        vals = []
        for trial in range(trials):
            ds = sample_dataset(problem, n, _trial_seed(seed, trial))
            if isinstance(config, RidgeConfig):
                est = ridge_conditional_risk(ds, problem, config.lam)
            elif isinstance(config, GDConfig):
                est = gd_conditional_risk(ds, problem, config.eta, config.t)
            else:
                raise TypeError(f"unsupported config {type(config).__name__}")
            vals.append(est.mean)
        risks = np.asarray(vals)
    mean = float(np.mean(risks))
    stderr = float(np.std(risks, ddof=1) / math.sqrt(trials))
    return RiskEstimate(mean=max(mean, 0.0), stderr=stderr, trials=trials,
                        method="monte_carlo")
