"""The three estimators: ridge, early-stopped full-batch GD, single-pass SGD.

All d-dimensional linear algebra involving the empirical covariance is routed
through the thin SVD of X (cost O(n^2 d)); no d x d matrix is ever formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problems import Dataset, ProblemInstance

__all__ = [
    "RidgeConfig",
    "GDConfig",
    "SGDConfig",
    "ridge_fit",
    "gd_path",
    "gd_analytic",
    "sgd_schedule",
    "sgd_run",
    "max_stable_stepsize",
]


@dataclass(frozen=True)
class RidgeConfig:
    lam: float

    def __post_init__(self):
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ValueError("ridge lambda must be finite and >= 0")


@dataclass(frozen=True)
class GDConfig:
    eta: float
    t: int

    def __post_init__(self):
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ValueError("GD stepsize must be finite and positive")
        if self.t < 0:
            raise ValueError("GD stopping time must be >= 0")


@dataclass(frozen=True)
class SGDConfig:
    eta0: float

    def __post_init__(self):
        if not (self.eta0 >= 0 and math.isfinite(self.eta0)):
            raise ValueError("SGD initial stepsize must be finite and >= 0")


def max_stable_stepsize(dataset: Dataset) -> float:
    """Stability limit n / ||XX^T|| for full-batch GD."""
    norm = dataset.gram_norm()
    if norm == 0.0:
        return math.inf
    return dataset.n / norm


def ridge_fit(dataset: Dataset, lam: float) -> np.ndarray:
    """Solve (X^T X + n*lambda*I)^{-1} X^T y through the SVD of X.

    lambda = 0 returns the minimum-l2-norm interpolator via the pseudoinverse
    with the standard max(n, d) * eps * s_max singular-value cutoff.
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    s = dataset.s
    keep = dataset.rank_mask
    coeff = dataset.U.T @ dataset.y
    c = np.zeros_like(s)
    if lam == 0:
        c[keep] = coeff[keep] / s[keep]
    else:
        c[keep] = s[keep] * coeff[keep] / (s[keep] ** 2 + dataset.n * lam)
    return dataset.from_rowspace(c)


def gd_filter_factors(dataset: Dataset, eta: float, t: int) -> np.ndarray:
    """Per-mode learned fraction 1 - (1 - eta*s_j^2/n)^t of GD after t steps."""
    z = eta * dataset.s**2 / dataset.n
    return 1.0 - (1.0 - z) ** t


def _check_gd_stepsize(dataset: Dataset, eta: float):
    limit = max_stable_stepsize(dataset)
    if eta > limit * (1 + 1e-12):
        raise ValueError(
            f"stepsize {eta} exceeds the stability limit n/||XX^T|| = {limit}")


def gd_path(dataset: Dataset, eta: float, checkpoints: list[int]) -> list[np.ndarray]:
    """Run the GD recursion from w_0 = 0, emitting iterates at the checkpoints."""
    if sorted(checkpoints) != list(checkpoints):
        raise ValueError("checkpoints must be sorted ascending")
    if checkpoints and checkpoints[0] < 0:
        raise ValueError("checkpoints must be nonnegative")
    _check_gd_stepsize(dataset, eta)
    X, y, n = dataset.X, dataset.y, dataset.n
    w = np.zeros(dataset.d)
    out = []
    step = 0
    for t in checkpoints:
        while step < t:
            w = w - (eta / n) * (X.T @ (X @ w - y))
            step += 1
        out.append(w.copy())
    return out


def gd_analytic(dataset: Dataset, eta: float, t: int) -> np.ndarray:
    """Closed form of the GD iterate, evaluated in the SVD basis of X.

    w_t = w* - (I - eta*S_hat)^t w* + (1/n)(I - (I - eta*S_hat)^t) S_hat^+ X^T eps,
    where S_hat is the empirical covariance.  Requires the retained noise
    vector and the problem's w*, so this is an oracle-side reformulation.
    """
    if dataset.noise is None or dataset.problem is None:
        raise ValueError("gd_analytic needs the retained noise vector and w*")
    _check_gd_stepsize(dataset, eta)
    wstar = dataset.problem.wstar
    phi = gd_filter_factors(dataset, eta, t)
    keep = dataset.rank_mask
    # signal part V diag(phi) V^T w* plus noise part V diag(phi / s) U^T eps
    c = phi * dataset.rowspace_coords(wstar)
    g = dataset.U.T @ dataset.noise
    c[keep] += phi[keep] * g[keep] / dataset.s[keep]
    c[~keep] = 0.0
    return dataset.from_rowspace(c)


def sgd_schedule(n: int, eta0: float) -> np.ndarray:
    """Exponentially decaying stepsizes eta_s = eta0 / 2^floor(s*ln(n)/n)."""
    if n < 2:
        raise ValueError("schedule needs n >= 2")
    s = np.arange(1, n + 1, dtype=float)
    ell = np.floor(s * math.log(n) / n)
    return eta0 / 2.0**ell


def sgd_run(problem: ProblemInstance, n: int, eta0: float, seed) -> np.ndarray:
    """Single pass of last-iterate SGD over a fresh stream of n samples.

    O(n*d) time and O(d) memory beyond the stream.  Stepsizes above the
    1/(4 tr(Sigma)) bound-comparison limit are allowed here; callers that
    feed bound calculators should validate that precondition themselves.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    d = problem.d
    w = np.zeros(d)
    if n == 0:
        return w
    rng = np.random.default_rng(seed)
    sqrt_lam = np.sqrt(problem.spectrum.eigenvalues)
    sigma = math.sqrt(problem.sigma2)
    etas = sgd_schedule(n, eta0) if n >= 2 else np.array([eta0])
    for s in range(n):
        if problem.design == "gaussian":
            z = rng.standard_normal(d)
        else:
            z = rng.integers(0, 2, size=d).astype(float) * 2.0 - 1.0
        x = sqrt_lam * z
        y = x @ problem.wstar + sigma * rng.standard_normal()
        w = w - etas[s] * x * (x @ w - y)
    return w
