"""Inter-arrival laws (through their Laplace-Stieltjes transforms) and batch-size laws.

Every inter-arrival model is an immutable dataclass exposing ``lst``,
``lst_derivative`` and ``mean``.  Rational families also expose their LST as
a ratio of polynomials in ``s`` via :meth:`InterArrivalModel.rational`; the
deterministic law is transcendental and gets a Pade surrogate instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import ClassVar, Mapping, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ConfigError, LSTSingularityError, PadeError

__all__ = [
    "InterArrivalModel",
    "Exponential",
    "Erlang",
    "Deterministic",
    "HyperExponential",
    "BatchSizeDistribution",
    "RationalSurrogate",
    "lst",
    "lst_derivative",
    "pade_surrogate",
    "pade_coefficients",
    "pgf",
]


def _scalar(x):
    x = np.asarray(x)
    return x[()] if x.ndim == 0 else x


def _check_pole(den, rate):
    if np.any(np.abs(den) <= 1e-15 * rate):
        raise LSTSingularityError(f"LST evaluated at its pole s = {-rate!r}")


class InterArrivalModel:
    """Renewal inter-arrival law.  Subclasses are frozen dataclasses."""

    family: ClassVar[str]

    @property
    def mean(self) -> float:
        raise NotImplementedError

    @property
    def rate(self) -> float:
        """Batch arrival rate, the reciprocal of the mean inter-arrival time."""
        return 1.0 / self.mean

    def lst(self, s):
        raise NotImplementedError

    def lst_derivative(self, s, order: int = 1):
        raise NotImplementedError

    def rational(self) -> tuple[np.ndarray, np.ndarray] | None:
        """Ascending coefficients ``(num, den)`` with LST = num(s)/den(s), or None."""
        return None

    def scaled(self, kappa: float) -> "InterArrivalModel":
        """Same law with every rate multiplied by ``kappa`` (time measured in units 1/kappa)."""
        raise NotImplementedError

    def with_rate(self, rate: float) -> "InterArrivalModel":
        return self.scaled(rate / self.rate)

    @property
    def params(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def _check_order(order):
        if order not in (1, 2):
            raise ValueError(f"derivative order must be 1 or 2, got {order!r}")


@dataclass(frozen=True)
class Exponential(InterArrivalModel):
    lam: float

    family: ClassVar[str] = "exponential"

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ConfigError(f"exponential rate must be positive, got {self.lam!r}")

    @property
    def mean(self):
        return 1.0 / self.lam

    @property
    def rate(self):
        return self.lam

    def lst(self, s):
        den = self.lam + np.asarray(s)
        _check_pole(den, self.lam)
        return _scalar(self.lam / den)

    def lst_derivative(self, s, order=1):
        self._check_order(order)
        den = self.lam + np.asarray(s)
        _check_pole(den, self.lam)
        if order == 1:
            return _scalar(-self.lam / den**2)
        return _scalar(2.0 * self.lam / den**3)

    def rational(self):
        return np.array([self.lam]), np.array([self.lam, 1.0])

    def scaled(self, kappa):
        return Exponential(self.lam * kappa)

    def with_rate(self, rate):
        return Exponential(rate)

    @property
    def params(self):
        return {"rate": self.lam}


@dataclass(frozen=True)
class Erlang(InterArrivalModel):
    """Erlang-k law with batch arrival rate ``lam`` (each phase runs at k*rate).

    Use :meth:`from_phase_rate` when the per-phase rate is the given quantity.
    """

    k: int
    lam: float

    family: ClassVar[str] = "erlang"

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ConfigError(f"Erlang phase count must be an integer >= 1, got {self.k!r}")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ConfigError(f"Erlang rate must be positive, got {self.lam!r}")

    @classmethod
    def from_phase_rate(cls, k: int, phase_rate: float) -> "Erlang":
        return cls(k, phase_rate / k)

    @property
    def phase_rate(self):
        return self.k * self.lam

    @property
    def mean(self):
        return 1.0 / self.lam

    @property
    def rate(self):
        return self.lam

    def lst(self, s):
        beta = self.phase_rate
        den = beta + np.asarray(s)
        _check_pole(den, beta)
        return _scalar((beta / den) ** self.k)

    def lst_derivative(self, s, order=1):
        self._check_order(order)
        beta, k = self.phase_rate, self.k
        den = beta + np.asarray(s)
        _check_pole(den, beta)
        base = (beta / den) ** k
        if order == 1:
            return _scalar(-k * base / den)
        return _scalar(k * (k + 1) * base / den**2)

    def rational(self):
        beta = self.phase_rate
        return np.array([beta**self.k]), P.polypow([beta, 1.0], self.k)

    def scaled(self, kappa):
        return Erlang(self.k, self.lam * kappa)

    def with_rate(self, rate):
        return Erlang(self.k, rate)

    @property
    def params(self):
        return {"k": self.k, "rate": self.lam}


@dataclass(frozen=True)
class Deterministic(InterArrivalModel):
    period: float

    family: ClassVar[str] = "deterministic"

    def __post_init__(self):
        if not (self.period > 0 and math.isfinite(self.period)):
            raise ConfigError(f"deterministic period must be positive, got {self.period!r}")

    @property
    def mean(self):
        return self.period

    def lst(self, s):
        return _scalar(np.exp(-self.period * np.asarray(s)))

    def lst_derivative(self, s, order=1):
        self._check_order(order)
        a = self.period
        return _scalar((-a) ** order * np.exp(-a * np.asarray(s)))

    def scaled(self, kappa):
        return Deterministic(self.period / kappa)

    def with_rate(self, rate):
        return Deterministic(1.0 / rate)

    @property
    def params(self):
        return {"period": self.period}


@dataclass(frozen=True)
class HyperExponential(InterArrivalModel):
    """Probabilistic mixture of exponentials: branch i w.p. ``probs[i]`` at ``rates[i]``."""

    probs: tuple[float, ...]
    rates: tuple[float, ...]

    family: ClassVar[str] = "hyperexponential"

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        if len(self.probs) != len(self.rates) or not self.probs:
            raise ConfigError("hyperexponential needs matching, non-empty probs and rates")
        if any(p <= 0 for p in self.probs) or abs(sum(self.probs) - 1.0) > 1e-12:
            raise ConfigError("hyperexponential branch probabilities must be positive and sum to 1")
        if any(not (r > 0 and math.isfinite(r)) for r in self.rates):
            raise ConfigError("hyperexponential rates must be positive")

    @property
    def mean(self):
        return sum(p / r for p, r in zip(self.probs, self.rates))

    def lst(self, s):
        s = np.asarray(s)
        out = 0.0
        for p, r in zip(self.probs, self.rates):
            den = r + s
            _check_pole(den, r)
            out = out + p * r / den
        return _scalar(out)

    def lst_derivative(self, s, order=1):
        self._check_order(order)
        s = np.asarray(s)
        out = 0.0
        for p, r in zip(self.probs, self.rates):
            den = r + s
            _check_pole(den, r)
            out = out + (-p * r / den**2 if order == 1 else 2.0 * p * r / den**3)
        return _scalar(out)

    def rational(self):
        den = np.array([1.0])
        for r in self.rates:
            den = P.polymul(den, [r, 1.0])
        num = np.zeros(1)
        for i, (p, r) in enumerate(zip(self.probs, self.rates)):
            term = np.array([p * r])
            for j, other in enumerate(self.rates):
                if j != i:
                    term = P.polymul(term, [other, 1.0])
            num = P.polyadd(num, term)
        return num, den

    def scaled(self, kappa):
        return HyperExponential(self.probs, tuple(r * kappa for r in self.rates))

    @property
    def params(self):
        return {"probs": list(self.probs), "rates": list(self.rates)}


def lst(model: InterArrivalModel, s):
    return model.lst(s)


def lst_derivative(model: InterArrivalModel, s, order: int = 1):
    return model.lst_derivative(s, order)


# --------------------------------------------------------------------------- Pade


def _exact_solve(a: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Gaussian elimination over the rationals; raises ZeroDivisionError if singular."""
    n = len(rhs)
    m = [row[:] + [r] for row, r in zip(a, rhs)]
    for col in range(n):
        piv = next((i for i in range(col, n) if m[i][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular Pade system")
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        for i in range(n):
            if i != col and m[i][col] != 0:
                f = m[i][col] * inv
                m[i] = [x - f * y for x, y in zip(m[i], m[col])]
    return [m[i][n] / m[i][i] for i in range(n)]


def pade_coefficients(taylor: Sequence, m: int, n: int):
    """Exact (m, n) Pade coefficients from Taylor coefficients ``taylor[0..m+n]``.

    The coefficients are converted to :class:`fractions.Fraction` and the
    denominator system is solved without rounding, which sidesteps the
    enormous conditioning of the Toeplitz system for high orders.

    Returns ``(num, den, condition)`` with ascending float coefficients,
    ``den[0] == 1`` and the 2-norm condition number of the floating-point
    version of the system (diagnostic only).
    """
    if len(taylor) < m + n + 1:
        raise ValueError(f"need {m + n + 1} Taylor coefficients, got {len(taylor)}")
    c = [Fraction(x) for x in taylor[: m + n + 1]]

    def coef(j):
        return c[j] if j >= 0 else Fraction(0)

    if n > 0:
        a = [[coef(m + i - k) for k in range(1, n + 1)] for i in range(1, n + 1)]
        rhs = [-coef(m + i) for i in range(1, n + 1)]
        cond = float(np.linalg.cond(np.array(a, dtype=float)))
        try:
            q = [Fraction(1)] + _exact_solve(a, rhs)
        except ZeroDivisionError as exc:
            raise PadeError(f"({m},{n}) Pade system is singular", condition=cond) from exc
    else:
        q, cond = [Fraction(1)], 1.0
    p = [sum(q[k] * coef(j - k) for k in range(min(j, n) + 1)) for j in range(m + 1)]
    return np.array([float(x) for x in p]), np.array([float(x) for x in q]), cond


@dataclass(frozen=True)
class RationalSurrogate:
    """num(s)/den(s) standing in for a transcendental LST inside ``|s| <= validity_radius``."""

    numerator: np.ndarray = field(repr=False)
    denominator: np.ndarray = field(repr=False)
    order: tuple[int, int]
    validity_radius: float
    max_rel_error: float
    condition: float

    def __call__(self, s):
        s = np.asarray(s)
        return _scalar(P.polyval(s, self.numerator) / P.polyval(s, self.denominator))


def pade_surrogate(
    model: InterArrivalModel, m: int = 15, n: int = 15, radius: float | None = None
) -> RationalSurrogate:
    """(m, n) Pade approximant of the deterministic LST ``exp(-s*a)`` about ``s = 0``.

    ``radius`` is the disc on which the surrogate will be used; it defaults to
    ``|s*a| <= 5``.  The maximum relative error on that disc is measured on its
    boundary (the error ratio is analytic inside once the denominator is
    zero-free there).
    """
    if not isinstance(model, Deterministic):
        raise TypeError("a Pade surrogate is only needed for the deterministic law")
    a = model.period
    if radius is None:
        radius = 5.0 / a
    taylor = [Fraction((-1) ** j, math.factorial(j)) for j in range(m + n + 1)]
    p, q, cond = pade_coefficients(taylor, m, n)
    # Coefficients above are in x = s*a.
    num = p * a ** np.arange(m + 1)
    den = q * a ** np.arange(n + 1)
    if n > 0:
        den_zeros = P.polyroots(q) / a
        if np.min(np.abs(den_zeros)) <= radius:
            raise PadeError(
                f"Pade denominator vanishes inside |s| <= {radius:g}", condition=cond
            )
    theta = np.linspace(0.0, 2 * np.pi, 2048, endpoint=False)
    s = radius * np.exp(1j * theta)
    approx = P.polyval(s, num) / P.polyval(s, den)
    err = float(np.max(np.abs(approx / np.exp(-a * s) - 1.0)))
    return RationalSurrogate(num, den, (m, n), float(radius), err, cond)


# --------------------------------------------------------------------------- batches


@dataclass(frozen=True)
class BatchSizeDistribution:
    """Finite batch-size law with ``probs[i-1] = P(X = i)`` for ``i = 1..b``."""

    probs: tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if not probs:
            raise ConfigError("batch-size law needs at least one probability")
        if any(not math.isfinite(p) or p < 0 for p in probs):
            raise ConfigError("batch-size probabilities must be finite and nonnegative")
        if probs[-1] <= 0:
            raise ConfigError("largest batch size must carry positive mass (g_b > 0)")
        if abs(math.fsum(probs) - 1.0) > 1e-12:
            raise ConfigError(f"batch-size probabilities sum to {math.fsum(probs)!r}, not 1")

    @classmethod
    def from_mapping(cls, mass: Mapping[int, float], tol: float = 1e-9) -> "BatchSizeDistribution":
        """Build from sparse ``{size: prob}`` pairs, renormalizing a sum within ``tol`` of 1."""
        if not mass:
            raise ConfigError("empty batch-size mapping")
        sizes = [int(k) for k in mass]
        if any(k < 1 for k in sizes):
            raise ConfigError("batch sizes must be >= 1")
        total = math.fsum(float(v) for v in mass.values())
        if abs(total - 1.0) > tol:
            raise ConfigError(f"batch-size probabilities sum to {total!r}, not 1 (tol {tol})")
        b = max(k for k, v in mass.items() if float(v) > 0)
        dense = [0.0] * b
        for k, v in mass.items():
            if int(k) <= b:
                dense[int(k) - 1] = float(v) / total
        s = math.fsum(dense)
        dense = [p / s for p in dense]
        return cls(tuple(dense))

    @classmethod
    def single(cls) -> "BatchSizeDistribution":
        return cls((1.0,))

    @property
    def b(self) -> int:
        return len(self.probs)

    @property
    def gbar(self) -> float:
        return math.fsum(i * p for i, p in enumerate(self.probs, start=1))

    def pgf(self, z):
        z = np.asarray(z)
        acc = 0.0
        for p in reversed(self.probs):
            acc = (acc + p) * z
        return _scalar(acc)

    def reversed_poly(self) -> np.ndarray:
        """Ascending coefficients of ``sum_i g_i z**(b-i)``."""
        return np.array(self.probs[::-1])

    def as_mapping(self) -> dict[int, float]:
        return {i: p for i, p in enumerate(self.probs, start=1) if p > 0}


def pgf(batch: BatchSizeDistribution, z):
    return batch.pgf(z)
