"""Characteristic roots inside the unit disc, root counting and stability.

The characteristic function is

    f(z) = A*(delta + (mu + eta)(1 - z)) * sum_i g_i z**(b - i) - z**b

and the stationary law is built from its ``b`` zeros in ``|z| < 1``.

Rational LSTs clear to a polynomial of degree ``b + deg(den)`` whose full root
set comes from companion-matrix eigenvalues.  The deterministic LST is
localized through its Pade(15, 15) surrogate.  In both cases every root is
polished by Newton's method on the exact ``f``, so the returned roots never
depend on surrogate accuracy.
"""
from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .arrivals import BatchSizeDistribution, Deterministic, InterArrivalModel, pade_surrogate
from .errors import (
    ConfigError,
    DegenerateSpectrumError,
    PadeError,
    QuadratureError,
    RootCountError,
    StabilityError,
)

log = logging.getLogger(__name__)

MARGIN_TOL = 1e-9
GAP_TOL = 1e-7
NEWTON_TOL = 1e-13
PADE_ORDER = (15, 15)
MAX_B = 100

__all__ = [
    "ModelParams",
    "StabilityReport",
    "RootSet",
    "char_fn",
    "char_fn_derivative",
    "char_polynomial",
    "find_roots",
    "winding_count",
    "stability_check",
]


@dataclass(frozen=True)
class ModelParams:
    inter_arrival: InterArrivalModel
    batch: BatchSizeDistribution
    mu: float
    eta: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        for name in ("mu", "eta", "delta"):
            v = getattr(self, name)
            try:
                v = float(v)
            except (TypeError, ValueError):
                raise ConfigError(f"{name} must be a number, got {v!r}") from None
            if not math.isfinite(v):
                raise ConfigError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if self.mu <= 0:
            raise ConfigError(f"service rate mu must be positive, got {self.mu}")
        if self.eta < 0 or self.delta < 0:
            raise ConfigError("eta and delta must be nonnegative")
        if not self.inter_arrival.rate > 0:
            raise ConfigError("batch arrival rate must be positive")
        if self.batch.b > MAX_B:
            raise ConfigError(f"maximum batch size {self.batch.b} exceeds the supported {MAX_B}")

    @property
    def lam(self) -> float:
        return self.inter_arrival.rate

    @property
    def theta(self) -> float:
        """Combined depletion rate mu + eta of a busy server."""
        return self.mu + self.eta

    @property
    def b(self) -> int:
        return self.batch.b

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def scaled(self, kappa: float) -> "ModelParams":
        """Every rate multiplied by ``kappa``; the stationary law is unchanged."""
        return ModelParams(
            self.inter_arrival.scaled(kappa),
            self.batch,
            self.mu * kappa,
            self.eta * kappa,
            self.delta * kappa,
        )


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    condition_used: str  # delta_positive | rho_mu_eta | rho_mu
    rho: float

    @property
    def condition_text(self) -> str:
        return {
            "delta_positive": "δ > 0",
            "rho_mu_eta": "λḡ < μ+η",
            "rho_mu": "λḡ < μ",
        }[self.condition_used]


def stability_check(params: ModelParams) -> StabilityReport:
    load = params.lam * params.batch.gbar
    if params.delta > 0:
        return StabilityReport(True, "delta_positive", load / params.theta)
    if params.eta > 0:
        rho = load / params.theta
        return StabilityReport(rho < 1.0, "rho_mu_eta", rho)
    rho = load / params.mu
    return StabilityReport(rho < 1.0, "rho_mu", rho)


def require_stable(params: ModelParams) -> StabilityReport:
    rep = stability_check(params)
    if not rep.stable:
        raise StabilityError(
            f"unstable model: {rep.condition_text} violated "
            f"(λḡ = {params.lam * params.batch.gbar:g}, rho = {rep.rho:g})"
        )
    return rep


def _lst_arg(params, z):
    return params.delta + params.theta * (1.0 - z)


def char_fn(params: ModelParams, z):
    z = np.asarray(z)
    gr = P.polyval(z, params.batch.reversed_poly())
    out = params.inter_arrival.lst(_lst_arg(params, z)) * gr - z**params.b
    return out[()] if np.ndim(out) == 0 else out


def char_fn_derivative(params: ModelParams, z):
    z = np.asarray(z)
    s = _lst_arg(params, z)
    coeffs = params.batch.reversed_poly()
    gr = P.polyval(z, coeffs)
    dgr = P.polyval(z, P.polyder(coeffs)) if params.b > 1 else 0.0
    ia = params.inter_arrival
    out = (
        -params.theta * ia.lst_derivative(s, 1) * gr
        + ia.lst(s) * dgr
        - params.b * z ** (params.b - 1)
    )
    return out[()] if np.ndim(out) == 0 else out


def _compose(p, inner):
    """Ascending coefficients of p(inner(z))."""
    out = np.zeros(1)
    for c in p[::-1]:
        out = P.polyadd(P.polymul(out, inner), [c])
    return out


def char_polynomial(params: ModelParams):
    """Polynomial whose zeros are those of ``f`` (exactly for rational LSTs).

    Returns ``(coeffs, surrogate)`` where coeffs are ascending and surrogate is
    the Pade approximant used for a transcendental LST (else None).
    """
    ia = params.inter_arrival
    surrogate = None
    rat = ia.rational()
    if rat is None:
        if not isinstance(ia, Deterministic):
            raise TypeError(f"no polynomial form for {type(ia).__name__}")
        surrogate = pade_surrogate(ia, *PADE_ORDER, radius=params.delta + 2 * params.theta)
        num, den = surrogate.numerator, surrogate.denominator
    else:
        num, den = rat
    s_of_z = np.array([params.delta + params.theta, -params.theta])
    zb = np.zeros(params.b + 1)
    zb[-1] = 1.0
    poly = P.polysub(
        P.polymul(_compose(num, s_of_z), params.batch.reversed_poly()),
        P.polymul(zb, _compose(den, s_of_z)),
    )
    poly = P.polytrim(poly / np.max(np.abs(poly)), 0.0)
    return poly, surrogate


def _fn_scale(params, z):
    """Magnitude of the two terms of ``f``, the yardstick for its residual."""
    gr = P.polyval(z, params.batch.reversed_poly())
    return abs(params.inter_arrival.lst(_lst_arg(params, z)) * gr) + abs(z) ** params.b


def _newton(params, z0, maxiter=60):
    z = z0
    for _ in range(maxiter):
        fz = char_fn(params, z)
        if abs(fz) < NEWTON_TOL * _fn_scale(params, z):
            break
        step = fz / char_fn_derivative(params, z)
        z = z - step
        if abs(step) <= 4e-16 * max(abs(z), 1e-300):
            break
    return z


def _symmetrize(roots):
    """Force non-real roots into exact conjugate pairs."""
    roots = list(roots)
    is_real = [abs(r.imag) <= 1e-12 * abs(r) for r in roots]
    upper = [r for r, re_ in zip(roots, is_real) if not re_ and r.imag > 0]
    lower = [r for r, re_ in zip(roots, is_real) if not re_ and r.imag < 0]
    real = [complex(r.real, 0.0) for r, re_ in zip(roots, is_real) if re_]
    out = real[:]
    for u in upper:
        if not lower:
            out.append(u)
            continue
        j = int(np.argmin([abs(u.conjugate() - w) for w in lower]))
        w = lower.pop(j)
        if abs(u.conjugate() - w) > 1e-10:
            log.debug("root %r has no conjugate partner within 1e-10", u)
            out.extend([u, w])
            continue
        mid = 0.5 * (u + w.conjugate())
        out.extend([mid, mid.conjugate()])
    out.extend(lower)
    return out


@dataclass(frozen=True)
class RootSet:
    roots: np.ndarray
    residual_max: float
    multiplicity_gap: float
    surrogate_error: float | None = None

    def __len__(self):
        return len(self.roots)

    @property
    def b(self) -> int:
        return len(self.roots)


def _refine(params, candidates):
    """Newton-polish candidates on the exact ``f``; keep those inside the disc."""
    refined = []
    for z0 in candidates:
        if abs(z0.imag) < 1e-9:
            refined.append(complex(_newton(params, float(z0.real)), 0.0))
        else:
            refined.append(complex(_newton(params, complex(z0))))
    refined = _symmetrize(refined)
    return np.array([r for r in refined if abs(r) < 1.0 - MARGIN_TOL], dtype=complex)


def _min_gap(roots):
    if len(roots) < 2:
        return math.inf
    diff = np.abs(roots[:, None] - roots[None, :])
    return float(np.min(diff[~np.eye(len(roots), dtype=bool)]))


def _contour_moments(params, radius, kmax, start_nodes=2**10, max_nodes=2**20):
    """``(1/2 pi i) * contour integral of z**k f'/f`` for k = 0..kmax (power sums of inner zeros)."""
    deflate = params.delta == 0.0
    n = start_nodes
    prev = None
    while n <= max_nodes:
        z = radius * np.exp(2j * np.pi * np.arange(n) / n)
        fz = char_fn(params, z)
        if np.any(fz == 0):
            raise QuadratureError("characteristic function vanishes on the contour")
        q = char_fn_derivative(params, z) / fz
        if deflate:
            q = q - 1.0 / (z - 1.0)
        w = z * q
        s = np.empty(kmax + 1, dtype=complex)
        for k in range(kmax + 1):
            s[k] = w.mean()
            w = w * z
        if prev is not None and np.max(np.abs(s - prev)) <= 1e-11 * max(1.0, float(np.max(np.abs(s)))):
            return s
        prev = s
        n *= 2
    raise QuadratureError(f"contour moments did not converge at radius {radius}")


def _roots_by_moments(params):
    """Localize the inner zeros from contour power sums and Newton's identities."""
    b = params.b
    s = None
    for radius in (1.0 - 1e-3, 1.0 - 1e-6):
        s = _contour_moments(params, radius, b)
        if abs(s[0] - b) < 1e-3:
            break
    else:
        raise RootCountError(
            f"contour count {s[0].real:.3f} differs from b = {b}",
            found=int(round(s[0].real)),
            expected=b,
        )
    e = [1.0 + 0j]
    for k in range(1, b + 1):
        e.append(sum((-1) ** (i - 1) * e[k - i] * s[i] for i in range(1, k + 1)) / k)
    coeffs = [(-1) ** k * e[k] for k in range(b + 1)]
    return np.roots(coeffs)


def find_roots(params: ModelParams) -> RootSet:
    """The ``b`` zeros of the characteristic function inside the unit disc.

    A deterministic law whose Pade surrogate is too coarse to separate all
    ``b`` zeros (large ``a * (mu + eta)``) is localized instead from contour
    power sums; the Newton polish on the exact ``f`` is the same either way.
    """
    require_stable(params)
    b = params.b
    deterministic = isinstance(params.inter_arrival, Deterministic)
    inside, surrogate = None, None
    try:
        poly, surrogate = char_polynomial(params)
        inside = _refine(params, np.roots(poly[::-1]))
    except PadeError as exc:
        if not deterministic:
            raise
        log.info("Pade localization unavailable (%s)", exc)
    if deterministic and (inside is None or len(inside) != b or _min_gap(inside) < GAP_TOL):
        log.info("localizing roots from contour power sums")
        inside = _refine(params, _roots_by_moments(params))
    if len(inside) != b:
        try:
            wc = winding_count(params, 1.0 - 1e-6)
        except QuadratureError:
            wc = None
        raise RootCountError(
            f"found {len(inside)} characteristic roots inside the unit circle, expected {b} "
            f"(winding count {wc})",
            found=len(inside),
            expected=b,
            winding=wc,
        )
    order = sorted(range(b), key=lambda j: (inside[j].real, inside[j].imag), reverse=True)
    inside = inside[order]
    gap = _min_gap(inside)
    if gap < GAP_TOL:
        raise DegenerateSpectrumError(
            f"characteristic roots are (nearly) repeated: minimum separation {gap:.3g}"
        )
    residual = float(np.max(np.abs(char_fn(params, inside))))
    return RootSet(
        inside,
        residual,
        gap,
        None if surrogate is None else surrogate.max_rel_error,
    )


def winding_count(
    params: ModelParams, radius: float, start_nodes: int = 2**10, max_nodes: int = 2**20
) -> int:
    """Number of zeros of ``f`` inside ``|z| = radius`` by the argument principle.

    ``(1/2 pi i) * contour integral of f'/f`` is evaluated with the periodic
    trapezoidal rule, doubling the node count until two successive levels
    agree and sit within 1e-3 of the same integer.  For ``delta = 0`` the known
    zero at ``z = 1`` (outside the contour) is divided out first, which
    leaves the count unchanged but removes a near-singularity when the radius
    is close to 1.
    """
    if not 0.0 < radius < 1.0:
        raise ValueError(f"radius must lie in (0, 1), got {radius!r}")
    deflate = params.delta == 0.0
    n = start_nodes
    prev = None
    while n <= max_nodes:
        z = radius * np.exp(2j * np.pi * np.arange(n) / n)
        fz = char_fn(params, z)
        if np.any(fz == 0):
            raise QuadratureError("characteristic function vanishes on the contour; perturb the radius")
        integrand = z * char_fn_derivative(params, z) / fz
        if deflate:
            integrand = integrand - z / (z - 1.0)
        val = complex(np.mean(integrand))
        near = round(val.real)
        ok = abs(val.real - near) < 1e-3 and abs(val.imag) < 1e-3
        if ok and prev is not None and abs(val - prev) < 1e-3:
            return int(near)
        prev = val
        n *= 2
    raise QuadratureError(
        f"argument-principle quadrature did not converge at radius {radius} "
        f"(last value {prev}); a zero is probably too close to the contour, perturb the radius"
    )
