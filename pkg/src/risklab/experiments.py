"""Theorem-level comparison experiments: tuning sweeps, dominance ratios,
the hard-instance separation, and log-log rate fitting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import BoundConstants, gd_lower_bound, power_law_exponent, ridge_bound
from .estimators import max_stable_stepsize
from .oracles import (
    RiskEstimate,
    gd_conditional_risk,
    ridge_conditional_risk,
    sgd_exact_risk_gaussian,
)
from .problems import (
    ProblemInstance,
    default_power_law_dim,
    make_power_law_problem,
    make_spike_problem,
    sample_dataset,
)

__all__ = [
    "RateFit",
    "SweepResult",
    "tune_and_measure",
    "dominance_gd_vs_ridge",
    "dominance_gd_vs_sgd",
    "hard_instance_separation",
    "rate_fit",
    "rate_table",
    "theory_grid",
]

DEFAULT_SEPARATION_MEMORY_BUDGET = 4_000_000_000  # bytes; admits n <= 512, d <= 262144


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    slope_stderr: float
    points: tuple


@dataclass(frozen=True)
class SweepResult:
    grid: np.ndarray
    risks: list
    best_index: int

    @property
    def best_value(self) -> float:
        return float(self.grid[self.best_index])

    @property
    def best_risk(self) -> float:
        return self.risks[self.best_index].mean

    @property
    def interior(self) -> bool:
        """Whether the optimum is strictly inside the grid."""
        return 0 < self.best_index < len(self.grid) - 1


def _cell_seed(seed, *key) -> np.random.SeedSequence:
    key = tuple(int(k) for k in key)
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key + key)
    return np.random.SeedSequence(seed, spawn_key=key)


def _iter_datasets(problem, n, trials, seed, cell=0):
    for trial in range(trials):
        yield sample_dataset(problem, n, _cell_seed(seed, cell, trial))


def _draw_datasets(problem, n, trials, seed, cell=0):
    return list(_iter_datasets(problem, n, trials, seed, cell))


def tune_and_measure(problem: ProblemInstance, algorithm: str, n: int,
                     grid, trials: int, seed, eta: float | None = None) -> SweepResult:
    """Sweep one hyperparameter and measure risk via the cheapest valid oracle.

    Ridge/GD use the exact conditional risk averaged over ``trials`` design
    draws (shared across the grid); SGD uses the exact Gaussian recursion.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    alg = algorithm.lower()
    risks: list[RiskEstimate] = []
    if alg == "sgd":
        for eta0 in grid:
            risks.append(sgd_exact_risk_gaussian(problem, n, float(eta0)))
    elif alg in ("ridge", "gd"):
        if alg == "gd" and eta is None:
            eta = 1.0 / (2.0 * problem.spectrum.trace)
        # Stream datasets one at a time (a single large draw can be hundreds
        # of MB); the cached factorization makes the grid loop cheap.
        vals = np.empty((grid.size, trials))
        for i, ds in enumerate(_iter_datasets(problem, n, trials, seed)):
            for g, value in enumerate(grid):
                if alg == "ridge":
                    vals[g, i] = ridge_conditional_risk(ds, problem,
                                                        float(value)).mean
                else:
                    eta_ds = min(eta, max_stable_stepsize(ds))
                    vals[g, i] = gd_conditional_risk(ds, problem, eta_ds,
                                                     int(round(value))).mean
        for g in range(grid.size):
            risks.append(RiskEstimate(
                mean=float(np.mean(vals[g])),
                stderr=float(np.std(vals[g], ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0,
                trials=trials, method="monte_carlo"))
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    best = int(np.argmin([r.mean for r in risks]))
    return SweepResult(grid=grid, risks=risks, best_index=best)


def dominance_gd_vs_ridge(problem: ProblemInstance, n: int, lambda_grid,
                          eta: float, trials: int, seed,
                          constants: BoundConstants = BoundConstants()) -> list[dict]:
    """Per-lambda conditional-risk ratios of matched GD over ridge.

    GD is stopped at t = ceil(1/(eta*lambda)).  When the ridge lower bound
    saturates (D/n > 1/c3) the comparison switches to the zero estimator
    (t = 0), mirroring the dominance argument's case split.  lambda = 0 maps
    to the t -> infinity limit of GD, the min-norm interpolator.
    """
    datasets = _draw_datasets(problem, n, trials, seed)
    rows = []
    for lam in np.asarray(lambda_grid, dtype=float):
        report = ridge_bound(problem, n, float(lam), constants)
        saturated = report.D / n > 1.0 / constants.c3
        ratios = []
        for ds in datasets:
            eta_ds = min(eta, max_stable_stepsize(ds))
            ridge_risk = ridge_conditional_risk(ds, problem, float(lam)).mean
            if lam == 0:
                gd_risk = ridge_conditional_risk(ds, problem, 0.0).mean
                t = -1  # sentinel: t -> infinity limit
            elif saturated:
                gd_risk = gd_conditional_risk(ds, problem, eta_ds, 0).mean
                t = 0
            else:
                t = math.ceil(1.0 / (eta_ds * lam))
                gd_risk = gd_conditional_risk(ds, problem, eta_ds, t).mean
            tiny = 1e-300
            ratios.append(1.0 if (gd_risk < tiny and ridge_risk < tiny)
                          else gd_risk / ridge_risk)
        ratios = np.asarray(ratios)
        rows.append({"lam": float(lam), "t": t, "saturated": saturated,
                     "ratio_mean": float(ratios.mean()),
                     "ratio_max": float(ratios.max())})
    return rows


def dominance_gd_vs_sgd(problem: ProblemInstance, n: int, eta_grid,
                        trials: int, seed,
                        constants: BoundConstants = BoundConstants()) -> list[dict]:
    """GD (eta = 1/(2 tr Sigma), t = ceil(4N)) versus SGD across SGD stepsizes."""
    N = n / math.log(n)
    t = math.ceil(4.0 * N)
    eta_gd = 1.0 / (2.0 * problem.spectrum.trace)
    datasets = _draw_datasets(problem, n, trials, seed)
    gd_vals = []
    for ds in datasets:
        eta_ds = min(eta_gd, max_stable_stepsize(ds))
        gd_vals.append(gd_conditional_risk(ds, problem, eta_ds, t).mean)
    gd_risk = float(np.mean(gd_vals))
    rows = []
    limit = 1.0 / (4.0 * problem.spectrum.trace)
    for eta0 in np.asarray(eta_grid, dtype=float):
        if eta0 > limit * (1 + 1e-12):
            raise ValueError(f"SGD stepsize {eta0} exceeds 1/(4 tr(Sigma)) = {limit}")
        sgd_risk = sgd_exact_risk_gaussian(problem, n, float(eta0)).mean
        rows.append({"eta0": float(eta0), "gd_risk": gd_risk, "t": t,
                     "sgd_risk": sgd_risk, "ratio": gd_risk / sgd_risk})
    return rows


def hard_instance_separation(n_grid, sigma2: float, trials: int, seed,
                             t_grid_size: int = 30,
                             memory_budget: int = DEFAULT_SEPARATION_MEMORY_BUDGET) -> list[dict]:
    """Tuned GD versus SGD on the spike instances (d = n^2).

    GD runs at half the per-draw stability limit with the stopping time tuned
    over a log grid via the exact conditional risk; SGD runs at
    eta = 1/(4 tr Sigma) via the exact recursion.  Risks are reported raw and
    normalized by the theoretical scales n^-0.2 (GD) and ln(n)/n (SGD).
    """
    rows = []
    for n in n_grid:
        n = int(n)
        if n < 16:
            raise ValueError("separation needs n >= 16")
        d = n * n
        bytes_needed = 3 * 8 * n * d  # Z, X, and slack
        if bytes_needed > memory_budget:
            raise ValueError(
                f"n = {n} needs ~{bytes_needed} bytes, over budget {memory_budget}")
        problem = make_spike_problem(n, d, sigma2)
        t_grid = np.unique(np.round(np.geomspace(1, 4 * n * n, t_grid_size)).astype(int))
        per_t = np.zeros((trials, t_grid.size))
        for trial in range(trials):
            ds = sample_dataset(problem, n, _cell_seed(seed, n, trial))
            eta = 0.5 * max_stable_stepsize(ds)
            for j, t in enumerate(t_grid):
                per_t[trial, j] = gd_conditional_risk(ds, problem, eta, int(t)).mean
        mean_per_t = per_t.mean(axis=0)
        best = int(np.argmin(mean_per_t))
        gd_risk = float(mean_per_t[best])
        sgd_risk = sgd_exact_risk_gaussian(
            problem, n, 1.0 / (4.0 * problem.spectrum.trace)).mean
        ell_star = gd_lower_bound(problem, n, 1.0, 1).ell_star
        rows.append({
            "n": n, "gd_best_risk": gd_risk, "gd_best_t": int(t_grid[best]),
            "sgd_risk": sgd_risk,
            "gd_normalized": gd_risk * n**0.2,
            "sgd_normalized": sgd_risk * n / math.log(n),
            "ell_star": ell_star,
        })
    return rows


def rate_fit(points) -> RateFit:
    """OLS fit of ln(risk) on ln(n); slope stderr from the residuals."""
    pts = [(float(n), float(risk)) for n, risk in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 points")
    if any(risk <= 0 for _, risk in pts):
        raise ValueError("risks must be positive")
    x = np.log([n for n, _ in pts])
    y = np.log([risk for _, risk in pts])
    m = x.size
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ y / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    dof = m - 2
    stderr = math.sqrt(float(resid @ resid) / dof / sxx) if dof > 0 else 0.0
    return RateFit(slope=slope, intercept=intercept, slope_stderr=stderr,
                   points=tuple(pts))


def theory_grid(algorithm: str, a: float, r: float, n: int,
                trace: float, points: int = 15) -> np.ndarray:
    """15-point log grid spanning x100 around the theory-optimal hyperparameter."""
    alg = algorithm.lower()
    N = n / math.log(n)
    if alg == "ridge":
        center = float(n) ** (-a / (1.0 + 2.0 * a * r))
        return np.geomspace(center / 10.0, center * 10.0, points)
    if alg == "sgd":
        cap = 1.0 / (4.0 * trace)
        center = min(N ** (-(1.0 + 2.0 * a * r - a) / (1.0 + 2.0 * a * r)) * cap, cap)
        return np.geomspace(center / 10.0, min(center * 10.0, cap), points)
    if alg == "gd":
        eta = 1.0 / (2.0 * trace)
        center = float(n) ** (a / (1.0 + 2.0 * a * r)) / eta
        grid = np.geomspace(max(center / 10.0, 1.0), center * 10.0, points)
        return np.unique(np.maximum(np.round(grid), 1.0))
    raise ValueError(f"unknown algorithm {algorithm!r}")


def rate_table(a: float, r_list, algorithms, n_grid, trials: int, seed,
               sigma2: float = 1.0, dim=default_power_law_dim) -> list[dict]:
    """Fitted empirical rate exponents against theory for power-law classes.

    For each (algorithm, r) the hyperparameter is tuned per n over a
    theory-centered grid and the best risks are fit on a log-log scale.
    A run whose tuned optimum touches a grid edge is flagged, not hidden.

    The truncation d is fixed across the whole n grid (at the largest n's
    default) so the rate is measured on a single problem instance; letting d
    grow with n would rescale the signal through the source-condition
    normalization and contaminate the fitted exponent.
    """
    d_fixed = dim(max(int(n) for n in n_grid))
    rows = []
    for r in r_list:
        for cell, algorithm in enumerate(algorithms):
            points = []
            interior = True
            for n in n_grid:
                n = int(n)
                problem = make_power_law_problem(a, r, d_fixed, sigma2)
                grid = theory_grid(algorithm, a, r, n, problem.spectrum.trace)
                sweep = tune_and_measure(problem, algorithm, n, grid, trials,
                                         _cell_seed(seed, cell, int(round(1000 * r)), n))
                interior = interior and sweep.interior
                points.append((n, sweep.best_risk))
            fit = rate_fit(points)
            rows.append({
                "algorithm": algorithm, "a": a, "r": r,
                "slope": fit.slope, "slope_stderr": fit.slope_stderr,
                "intercept": fit.intercept,
                "theory": power_law_exponent(algorithm, a, r),
                "interior_ok": interior,
                "points": points,
            })
    return rows
