"""Constants of the geometric expansion and the resulting stationary laws.

With roots ``r_j`` and constants ``c_j`` the boundary sequence is
``p_n(0) = sum_j c_j r_j**n``.  Pre-arrival probabilities are ``p_n(0)/lam``;
arbitrary-epoch probabilities for ``n >= 1`` weight each term by

    H_j = (G(1/r_j) - 1) / (delta + (mu + eta)(1 - r_j))

and ``p_0`` is the complement.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .charroots import ModelParams, RootSet, find_roots, require_stable
from .errors import ConditioningError, NumericalError, RefinementError

log = logging.getLogger(__name__)

IMAG_TOL = 1e-9
NEG_TOL = 1e-12
PMF_CUTOFF = 1e-14
MAX_TRUNCATION = 10**6
COND_LIMIT = 1e12
SMALL_ROOT = 1e-6

__all__ = [
    "SpectralSolution",
    "SystemDistribution",
    "solve_constants",
    "solve",
    "reduce_special_case",
    "prearrival_pmf",
    "arbitrary_pmf",
    "mean_system_size",
    "tail_decay",
]


@dataclass(frozen=True)
class SpectralSolution:
    roots: RootSet
    constants: np.ndarray
    lam: float
    condition: float
    residual: float


def solve_constants(roots: RootSet, lam: float) -> SpectralSolution:
    """Solve the b x b system fixing ``c_j``.

    Rows ``n = 1..b-1`` say ``sum_j c_j r_j**(n-b) = 0``; the last row says
    ``sum_j c_j / (1 - r_j) = lam``.  Substituting ``c_j = d_j r_j**(b-1)``
    turns the first block into an ordinary Vandermonde system in positive
    powers; its rows are equilibrated before LU with partial pivoting, and
    the reported condition number is that of the equilibrated matrix.
    """
    r = np.asarray(roots.roots, dtype=complex)
    b = len(r)
    if lam <= 0:
        raise ValueError("arrival rate must be positive")
    if b > 30:
        warnings.warn(
            f"b = {b}: the constant system is Vandermonde-like and accuracy degrades beyond b = 30",
            RuntimeWarning,
            stacklevel=2,
        )
    powers = r[None, :] ** np.arange(b - 1)[:, None]
    last = r ** (b - 1) / (1.0 - r)
    mat = np.vstack([powers, last[None, :]])
    rhs = np.zeros(b, dtype=complex)
    rhs[-1] = lam
    # Row equilibration: roots of similar modulus make the scaled rows nearly orthogonal.
    scale = np.max(np.abs(mat), axis=1)
    mat = mat / scale[:, None]
    rhs = rhs / scale
    cond = float(np.linalg.cond(mat))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise ConditioningError(f"constant system is ill-conditioned (cond = {cond:.3g})", cond)
    d = np.linalg.solve(mat, rhs)
    d = d + np.linalg.solve(mat, rhs - mat @ d)  # one step of iterative refinement
    c = d * r ** (b - 1)

    # Homogeneous rows carry no natural scale; measure them after dividing by
    # their max-norm so tiny roots do not inflate the check.
    res = []
    for n in range(1, b):
        row = r ** (n - b)
        res.append(abs(np.sum(c * row)) / float(np.max(np.abs(row))))
    res.append(abs(np.sum(c / (1.0 - r)) - lam))
    residual = max(res)
    if residual > 1e-9 * lam:
        raise RefinementError(f"constant system residual {residual:.3g} exceeds 1e-9*lam")
    return SpectralSolution(roots, c, float(lam), cond, float(residual))


def _real(value, what):
    value = np.asarray(value)
    imag = np.max(np.abs(value.imag)) if value.size else 0.0
    if imag > IMAG_TOL:
        raise NumericalError(f"{what} has imaginary part {imag:.3g} > {IMAG_TOL}")
    return value.real


def _clamp(x, what):
    x = np.asarray(x, dtype=float)
    if np.any(x < -NEG_TOL):
        raise NumericalError(f"{what} is negative beyond {NEG_TOL}: min {x.min():.3g}")
    return np.where(x < 0.0, 0.0, x)


@dataclass(frozen=True)
class SystemDistribution:
    """Stationary number-in-system laws at pre-arrival and arbitrary epochs."""

    params: ModelParams
    solution: SpectralSolution
    case: str = "general"
    p0_arbitrary: float = field(init=False)
    decay_rate: float = field(init=False)
    _weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        p = self.params
        r = self.solution.roots.roots
        c = self.solution.constants
        if np.min(np.abs(r)) < SMALL_ROOT:
            warnings.warn(
                "characteristic root below 1e-6 in modulus; arbitrary-epoch terms use "
                "large negative powers and may lose accuracy",
                RuntimeWarning,
                stacklevel=3,
            )
        denom = p.delta + p.theta * (1.0 - r)
        object.__setattr__(self, "_weights", c / denom)
        p0 = 1.0 - _real(np.sum(self._weights * self._inner(1) / (1.0 - r)), "p_0")
        if not -NEG_TOL <= p0 <= 1.0 + NEG_TOL:
            raise NumericalError(f"arbitrary-epoch p_0 = {p0!r} outside [0, 1]")
        object.__setattr__(self, "p0_arbitrary", float(min(max(p0, 0.0), 1.0)))
        real = r[r.imag == 0].real
        if real.size == 0:
            raise NumericalError("no real characteristic root inside the unit disc")
        object.__setattr__(self, "decay_rate", float(real.max()))

    def _inner(self, n):
        """``sum_i g_i r_j**(n-i) - r_j**n``; never forms G(1/r_j) itself."""
        r = self.roots
        n = np.asarray(n)[..., None, None]
        g = np.asarray(self.params.batch.probs)
        i = np.arange(1, self.params.b + 1)
        return (g * r[:, None] ** (n - i)).sum(axis=-1) - r ** n[..., 0]

    @property
    def lam(self) -> float:
        return self.solution.lam

    @property
    def roots(self) -> np.ndarray:
        return self.solution.roots.roots

    @property
    def constants(self) -> np.ndarray:
        return self.solution.constants

    def prearrival_pmf(self, n, clamp: bool = True):
        n = np.asarray(n)
        if np.any(n < 0):
            raise ValueError("n must be nonnegative")
        r, c = self.roots, self.constants
        vals = _real((c * r ** n[..., None]).sum(axis=-1) / self.lam, "pre-arrival pmf")
        out = _clamp(vals, "pre-arrival pmf") if clamp else vals
        return out[()] if out.ndim == 0 else out

    def arbitrary_pmf(self, n, clamp: bool = True):
        n = np.asarray(n)
        if np.any(n < 0):
            raise ValueError("n must be nonnegative")
        vals = _real((self._weights * self._inner(n)).sum(axis=-1), "arbitrary pmf")
        vals = np.where(n == 0, self.p0_arbitrary, vals)
        out = _clamp(vals, "arbitrary pmf") if clamp else vals
        return out[()] if out.ndim == 0 else out

    def total_mass(self) -> tuple[float, float]:
        """Closed-form sums of both laws (geometric series over the roots)."""
        r, c = self.roots, self.constants
        pre = _real(np.sum(c / (1.0 - r)) / self.lam, "pre-arrival mass")
        return float(pre), float(self.p0_arbitrary + self.arbitrary_pmf_sum_from(1))

    def arbitrary_pmf_sum_from(self, n0: int) -> float:
        """sum_{n >= n0} p_n for n0 >= 1, in closed form."""
        inner = self._inner(n0)
        return float(_real(np.sum(self._weights * inner / (1.0 - self.roots)), "arbitrary mass"))

    def means(self) -> tuple[float, float]:
        r, c = self.roots, self.constants
        l_pre = _real(np.sum(c * r / (1.0 - r) ** 2) / self.lam, "L^-")
        l_arb = _real(np.sum(self._weights * self._inner(1) / (1.0 - r) ** 2), "L")
        return float(l_pre), float(l_arb)

    def truncation(self, cutoff: float = PMF_CUTOFF) -> int:
        """Smallest N >= b beyond which both pmfs are provably below ``cutoff``.

        Uses the bound ``sum_j |coef_j| |r_j|**n``, which is decreasing in n.
        """
        r = np.abs(self.roots)
        g = np.asarray(self.params.batch.probs)
        i = np.arange(1, self.params.b + 1)
        # |inner(n)| <= |r|**n * (sum_i g_i |r|**-i + 1)
        coef = np.abs(self.constants) / self.lam + np.abs(self._weights) * (
            (g * r[:, None] ** (-i)).sum(axis=-1) + 1.0
        )

        def bound(n):
            return float(np.sum(coef * r**n))

        lo = self.params.b
        if bound(lo) < cutoff:
            return lo
        hi = lo
        while bound(hi) >= cutoff:
            if hi >= MAX_TRUNCATION:
                return MAX_TRUNCATION
            hi = min(2 * hi, MAX_TRUNCATION)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if bound(mid) < cutoff:
                hi = mid
            else:
                lo = mid
        return hi

    def table(self, n_max: int | None = None):
        """Rows ``(n, p_pre, p_arb, ratio)`` for ``n = 0..n_max``."""
        if n_max is None:
            n_max = self.truncation()
        n = np.arange(n_max + 2)
        pre = self.prearrival_pmf(n)
        arb = self.arbitrary_pmf(n[:-1])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(pre[:-1] > 0, pre[1:] / pre[:-1], np.nan)
        return n[:-1], pre[:-1], arb, ratio


def solve(params: ModelParams, case: str | None = None) -> SystemDistribution:
    """Full pipeline: roots, constants, distributions."""
    require_stable(params)
    roots = find_roots(params)
    sol = solve_constants(roots, params.lam)
    log.debug("roots=%s cond=%.3g residual=%.3g", roots.roots, sol.condition, sol.residual)
    return SystemDistribution(params, sol, case or special_case_label(params))


def special_case_label(params: ModelParams) -> str:
    if params.eta == 0 and params.delta == 0:
        return "case1"
    if params.delta == 0:
        return "case2"
    if params.eta == 0:
        return "case3"
    return "general"


def reduce_special_case(params: ModelParams) -> SystemDistribution:
    """Solve a model with ``eta = 0`` and/or ``delta = 0``, labelled case1/2/3.

    case1: no negative arrivals (classical GI^X/M/1, needs lam*gbar < mu);
    case2: negative customers only (needs lam*gbar < mu + eta);
    case3: disasters only (always stable).
    """
    label = special_case_label(params)
    if label == "general":
        raise ValueError("not a special case: both eta and delta are positive")
    return solve(params, label)


def prearrival_pmf(dist: SystemDistribution, n):
    return dist.prearrival_pmf(n)


def arbitrary_pmf(dist: SystemDistribution, n):
    return dist.arbitrary_pmf(n)


def mean_system_size(dist: SystemDistribution) -> tuple[float, float]:
    return dist.means()


def tail_decay(dist: SystemDistribution) -> float:
    return dist.decay_rate
