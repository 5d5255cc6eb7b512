"""Problem instances: covariance spectra, true parameters, and sampling.

The covariance is always represented in its own eigenbasis, so a spectrum is
just a nonincreasing vector of positive eigenvalues and every parameter vector
lives in that basis.  Eigenvectors are never materialized.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Spectrum",
    "ProblemInstance",
    "BoundConstants",
    "Dataset",
    "SpectrumConditionReport",
    "MembershipReport",
    "make_power_law_problem",
    "make_spike_problem",
    "make_custom_problem",
    "check_spectrum_condition",
    "class_membership",
    "sample_dataset",
    "default_power_law_dim",
    "problem_to_dict",
    "problem_from_dict",
    "problem_to_json",
    "problem_from_json",
]


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of the population covariance, in nonincreasing order."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        if lam.ndim != 1 or lam.size == 0:
            raise ValueError("eigenvalues must be a nonempty 1-d array")
        if not np.all(lam > 0):
            raise ValueError("eigenvalues must be strictly positive")
        if np.any(np.diff(lam) > 0):
            raise ValueError("eigenvalues must be nonincreasing")
        if not np.all(np.isfinite(lam)):
            raise ValueError("eigenvalues must be finite")
        object.__setattr__(self, "eigenvalues", lam)

    @property
    def d(self) -> int:
        return self.eigenvalues.size

    @property
    def trace(self) -> float:
        return float(self.eigenvalues.sum())

    def tail_sum(self, k: int) -> float:
        """Sum of eigenvalues with index > k (1-based head of size k)."""
        return float(self.eigenvalues[k:].sum())


@dataclass(frozen=True)
class ProblemInstance:
    """A well-specified linear regression problem (Sigma, w*, sigma^2).

    ``design`` selects the distribution of the whitened covariates:
    ``"gaussian"`` (standard normal entries) or ``"rademacher"`` (+-1).
    ``sigma_x2`` is the subgaussian proxy of those entries, 1 for Gaussian.
    """

    spectrum: Spectrum
    wstar: np.ndarray
    sigma2: float
    design: str = "gaussian"
    sigma_x2: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.asarray(self.wstar, dtype=float)
        if w.shape != (self.spectrum.d,):
            raise ValueError("wstar length must match spectrum length")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")
        if self.design not in ("gaussian", "rademacher"):
            raise ValueError(f"unknown design {self.design!r}")
        if self.design == "gaussian" and self.sigma_x2 != 1.0:
            raise ValueError("Gaussian design implies sigma_x2 = 1")
        if not np.isfinite(w @ (self.spectrum.eigenvalues * w)):
            raise ValueError("signal energy ||w*||^2_Sigma must be finite")
        object.__setattr__(self, "wstar", w)

    @property
    def d(self) -> int:
        return self.spectrum.d

    @property
    def signal_energy(self) -> float:
        """||w*||^2_Sigma, the excess risk of the zero estimator."""
        lam = self.spectrum.eigenvalues
        return float(self.wstar @ (lam * self.wstar))


@dataclass(frozen=True)
class BoundConstants:
    """Absolute constants left unspecified by the bound statements.

    Bounds are reported per-term and un-inflated by default (c0 = c1 = 1);
    c2 enters the critical-index definitions and c3 the precondition flags.
    """

    c0: float = 1.0
    c1: float = 1.0
    c2: float = 2.0
    c3: float = 10.0
    sigma_lambda: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        for name in ("c0", "c1", "c2", "c3"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.sigma_lambda <= 0 or self.b <= 0:
            raise ValueError("sigma_lambda and b must be positive")


def default_power_law_dim(n: int) -> int:
    """Default truncation length for power-law problems at sample size n."""
    return max(10 * n, 1000)


def make_power_law_problem(a: float, r: float, d: int, sigma2: float = 1.0,
                           delta: float = 0.1) -> ProblemInstance:
    """Build a problem on the boundary of the (a, r)-power-law class.

    Eigenvalues are lambda_i = i^-a and the signal is w*_i = i^((a-b)/2) with
    b = 1 + 2*a*r + delta, rescaled so the source condition is tight:
    sum_i lambda_i^(1-2r) w*_i^2 = 1.
    """
    if a <= 1:
        raise ValueError("capacity exponent a must exceed 1 (finite trace)")
    if r < 0:
        raise ValueError("source exponent r must be nonnegative")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if d < 1:
        raise ValueError("d must be positive")
    idx = np.arange(1, d + 1, dtype=float)
    lam = idx ** (-a)
    b = 1.0 + 2.0 * a * r + delta
    w = idx ** ((a - b) / 2.0)
    source = np.sum(lam ** (1.0 - 2.0 * r) * w**2)
    w /= math.sqrt(source)
    meta = {"kind": "power_law", "a": a, "r": r, "delta": delta}
    return ProblemInstance(Spectrum(lam), w, sigma2, "gaussian", meta=meta)


def make_spike_problem(n: int, d: int, sigma2: float = 1.0) -> ProblemInstance:
    """Build the benign-overfitting spike instance at sample size n.

    w* = (n^0.45, 0, ..., 0) and Sigma = diag(n^-0.9, 1/d, ..., 1/d), which
    requires d >= n^2.  The unit-energy signal rides on a vanishing head
    eigenvalue while the flat tail supplies the interpolation capacity.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if d < n * n:
        raise ValueError(f"spike construction requires d >= n^2 = {n * n}")
    if sigma2 > 1:
        raise ValueError("spike construction requires sigma2 <= 1")
    lam = np.full(d, 1.0 / d)
    lam[0] = float(n) ** -0.9
    if lam[0] < lam[1]:
        raise ValueError("spike head eigenvalue fell below the tail; increase d")
    w = np.zeros(d)
    w[0] = float(n) ** 0.45
    meta = {"kind": "spike", "n": n}
    return ProblemInstance(Spectrum(lam), w, sigma2, "gaussian", meta=meta)


def make_custom_problem(spectrum, wstar, sigma2: float,
                        design: str = "gaussian") -> ProblemInstance:
    """Wrap explicit (eigenvalues, w*, sigma^2) into a validated instance."""
    spec = spectrum if isinstance(spectrum, Spectrum) else Spectrum(np.asarray(spectrum, float))
    return ProblemInstance(spec, np.asarray(wstar, float), sigma2, design,
                           meta={"kind": "custom"})


@dataclass(frozen=True)
class SpectrumConditionReport:
    holds: bool
    worst_ratio: float
    worst_tau: float
    sigma_lambda: float


def check_spectrum_condition(spectrum: Spectrum, sigma_lambda: float = 1.0,
                             tau_count: int = 200) -> SpectrumConditionReport:
    """Check the fast-continuous-decay condition on a log grid of thresholds.

    For each tau the condition reads tau * sum_{lambda_i < 1/tau} lambda_i
    <= sigma_lambda * #{lambda_i >= 1/tau}.  The grid spans
    tau in [1/lambda_1, 1/lambda_d] so the right-hand count is never zero
    (for smaller tau the count vanishes while the left side stays positive,
    so the literal all-tau quantifier is unsatisfiable).
    """
    if tau_count < 1:
        raise ValueError("tau_count must be >= 1")
    lam = spectrum.eigenvalues
    lo, hi = 1.0 / lam[0], 1.0 / lam[-1]
    if tau_count == 1 or hi <= lo:
        taus = np.array([lo])
    else:
        taus = np.geomspace(lo, hi, tau_count)
    # suffix sums of the spectrum: tail_from[j] = sum_{i >= j} lam_i (0-based)
    tail = np.concatenate([np.cumsum(lam[::-1])[::-1], [0.0]])
    ratios = np.empty(taus.size)
    for i, tau in enumerate(taus):
        count = int(np.searchsorted(-lam, -1.0 / tau, side="right"))
        lhs = tau * tail[count]
        ratios[i] = lhs / (sigma_lambda * max(count, 1))
    worst = int(np.argmax(ratios))
    return SpectrumConditionReport(
        holds=bool(ratios[worst] <= 1.0),
        worst_ratio=float(ratios[worst]),
        worst_tau=float(taus[worst]),
        sigma_lambda=sigma_lambda,
    )


@dataclass(frozen=True)
class MembershipReport:
    snr_ok: bool
    spectrum_ok: bool
    in_L: bool
    in_S: bool
    snr: float
    spectrum_report: SpectrumConditionReport


def class_membership(problem: ProblemInstance,
                     constants: BoundConstants = BoundConstants(),
                     tau_count: int = 200) -> MembershipReport:
    """Report membership in the SNR-bounded class and its fast-spectrum subset."""
    energy = problem.signal_energy
    if problem.sigma2 == 0:
        snr_ok = energy == 0.0
        snr = math.inf if energy > 0 else 0.0
    else:
        snr = energy / problem.sigma2
        snr_ok = snr <= constants.b * (1 + 1e-12)
    spec_report = check_spectrum_condition(problem.spectrum,
                                           constants.sigma_lambda, tau_count)
    return MembershipReport(
        snr_ok=snr_ok,
        spectrum_ok=spec_report.holds,
        in_L=snr_ok,
        in_S=snr_ok and spec_report.holds,
        snr=snr,
        spectrum_report=spec_report,
    )


@dataclass
class Dataset:
    """One sampled design with cached spectral quantities.

    X has shape (n, d) with rows x_i = Sigma^{1/2} z_i.  The realized noise
    vector is retained for the conditional (oracle-side) risk computations.
    The thin SVD X = U diag(s) Vt is computed lazily; for d > n it goes
    through the n x n Gram matrix so no d x d array is ever formed.
    """

    X: np.ndarray
    y: np.ndarray
    noise: np.ndarray | None = None
    problem: ProblemInstance | None = None

    _U: np.ndarray | None = None
    _s: np.ndarray | None = None
    _Vt: np.ndarray | None = None
    _sigma_diag: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def _ensure_svd(self):
        if self._U is not None:
            return
        n, d = self.X.shape
        if d <= max(n, 64):
            U, s, Vt = np.linalg.svd(self.X, full_matrices=False)
            self._U, self._s, self._Vt = U, s, Vt
        else:
            # Gram route: eigh of XX^T, O(n^2 d + n^3)
            A = self.X @ self.X.T
            evals, U = np.linalg.eigh(A)
            order = np.argsort(evals)[::-1]
            evals, U = evals[order], U[:, order]
            s = np.sqrt(np.clip(evals, 0.0, None))
            self._U, self._s = U, s
            self._Vt = None  # built on demand

    @property
    def U(self) -> np.ndarray:
        self._ensure_svd()
        return self._U

    @property
    def s(self) -> np.ndarray:
        self._ensure_svd()
        return self._s

    @property
    def Vt(self) -> np.ndarray:
        self._ensure_svd()
        if self._Vt is None:
            keep = self._s > self.sv_cutoff()
            Vt = np.zeros((self._s.size, self.d))
            Vt[keep] = (self._U[:, keep] / self._s[keep]).T @ self.X
            self._Vt = Vt
        return self._Vt

    def sv_cutoff(self) -> float:
        s = self.s
        return max(self.n, self.d) * np.finfo(float).eps * (s[0] if s.size else 0.0)

    @property
    def rank_mask(self) -> np.ndarray:
        return self.s > self.sv_cutoff()

    @property
    def gram(self) -> np.ndarray:
        return self.X @ self.X.T

    def gram_norm(self) -> float:
        """Largest eigenvalue of XX^T."""
        return float(self.s[0] ** 2) if self.s.size else 0.0

    def rowspace_coords(self, v: np.ndarray) -> np.ndarray:
        """Coordinates Vt @ v without materializing Vt (zero on null modes)."""
        s = self.s
        out = np.zeros_like(s)
        keep = self.rank_mask
        c = self.U.T @ (self.X @ v)
        out[keep] = c[keep] / s[keep]
        return out

    def from_rowspace(self, c: np.ndarray) -> np.ndarray:
        """V @ c without materializing Vt."""
        s = self.s
        keep = self.rank_mask
        h = np.zeros_like(s)
        h[keep] = c[keep] / s[keep]
        return self.X.T @ (self.U @ h)

    def sigma_rowspace_diag(self, lam: np.ndarray) -> np.ndarray:
        """diag(V^T Sigma V) for the population eigenvalues ``lam``.

        Computed through G = X Sigma X^T so the cost is O(n^2 d + n^3).
        Null modes get 0.
        """
        if self._sigma_diag is None:
            W = self.X * np.sqrt(lam)
            G = W @ W.T
            GU = G @ self.U
            quad = np.einsum("ij,ij->j", self.U, GU)
            out = np.zeros_like(self.s)
            keep = self.rank_mask
            out[keep] = quad[keep] / self.s[keep] ** 2
            self._sigma_diag = np.clip(out, 0.0, None)
        return self._sigma_diag


def sample_dataset(problem: ProblemInstance, n: int, seed) -> Dataset:
    """Draw n i.i.d. samples; deterministic under the seed.

    Rows are x_i = Sigma^{1/2} z_i with z_i standard normal or Rademacher,
    y_i = x_i^T w* + eps_i with eps_i ~ N(0, sigma^2) independent of x.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    d = problem.d
    if problem.design == "gaussian":
        Z = rng.standard_normal((n, d))
    else:
        Z = rng.integers(0, 2, size=(n, d)).astype(float) * 2.0 - 1.0
    X = Z * np.sqrt(problem.spectrum.eigenvalues)
    noise = rng.standard_normal(n) * math.sqrt(problem.sigma2)
    y = X @ problem.wstar + noise
    return Dataset(X=X, y=y, noise=noise, problem=problem)


# ---------------------------------------------------------------------------
# serialization

def problem_to_dict(problem: ProblemInstance) -> dict:
    kind = problem.meta.get("kind", "custom")
    if kind == "power_law":
        spectrum = {"kind": "power_law",
                    "params": {k: problem.meta[k] for k in ("a", "r", "delta")},
                    "d": problem.d}
    elif kind == "spike":
        spectrum = {"kind": "spike", "params": {"n": problem.meta["n"]},
                    "d": problem.d}
    else:
        spectrum = {"explicit": problem.spectrum.eigenvalues.tolist()}
    out = {"spectrum": spectrum, "sigma2": problem.sigma2,
           "design": problem.design}
    if kind == "custom":
        out["wstar"] = problem.wstar.tolist()
    return out


def problem_from_dict(doc: dict) -> ProblemInstance:
    spec = doc["spectrum"]
    sigma2 = float(doc.get("sigma2", 1.0))
    if "explicit" in spec:
        return make_custom_problem(np.asarray(spec["explicit"], float),
                                   np.asarray(doc["wstar"], float),
                                   sigma2, doc.get("design", "gaussian"))
    kind = spec["kind"]
    params = spec.get("params", {})
    if kind == "power_law":
        d = int(spec.get("d") or default_power_law_dim(int(params.get("n", 100))))
        return make_power_law_problem(float(params["a"]), float(params["r"]), d,
                                      sigma2, float(params.get("delta", 0.1)))
    if kind == "spike":
        n = int(params["n"])
        d = int(spec.get("d") or n * n)
        return make_spike_problem(n, d, sigma2)
    raise ValueError(f"unknown spectrum kind {kind!r}")


def problem_to_json(problem: ProblemInstance) -> str:
    return json.dumps(problem_to_dict(problem), sort_keys=True)


def problem_from_json(text: str) -> ProblemInstance:
    return problem_from_dict(json.loads(text))
