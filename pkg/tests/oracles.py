"""Reference computations that share no code path with the spectral solver.

* ``embedded_chain``: pre-arrival law from the Markov chain embedded just
  before batch arrivals, and the time-average law from renewal-reward over
  one inter-arrival interval.  Both are truncated at ``n_max`` states.
* ``ctmc_poisson``: stationary law of the truncated CTMC when arrivals are
  Poisson (pre-arrival and time-average laws coincide).
* ``pade_exp_closed_form``: classical Pade coefficients of exp(-x).
* ``gim1_root``: the GI/M/1 root from the quadratic formula (M/M/1 case).
"""
import math

import numpy as np
from scipy import linalg
from scipy.special import gammainc, gammaln

from gixq.arrivals import Deterministic, Erlang, Exponential, HyperExponential


def _log_weights(ia, c, theta, jmax):
    """log E[exp(-c T) (theta T)^j / j!] for j = 0..jmax."""
    j = np.arange(jmax + 1)
    lj = gammaln(j + 1)
    if isinstance(ia, Exponential):
        lam = ia.lam
        return math.log(lam) + j * math.log(theta) - (j + 1) * math.log(lam + c)
    if isinstance(ia, Erlang):
        k, beta = ia.k, ia.phase_rate
        return (
            k * math.log(beta) + j * math.log(theta) + gammaln(k + j) - gammaln(k) - lj
            - (k + j) * math.log(beta + c)
        )
    if isinstance(ia, Deterministic):
        a = ia.period
        return -c * a + j * math.log(theta * a) - lj
    if isinstance(ia, HyperExponential):
        terms = [
            math.log(p * r) + j * math.log(theta) - (j + 1) * math.log(r + c)
            for p, r in zip(ia.probs, ia.rates)
        ]
        return np.logaddexp.reduce(np.vstack(terms), axis=0)
    raise TypeError(ia)


def _occupation(ia, c, theta, jmax):
    """E[int_0^T exp(-c t) (theta t)^j / j! dt] for j = 0..jmax."""
    j = np.arange(jmax + 1)
    lj = gammaln(j + 1)
    if isinstance(ia, Exponential):
        return np.exp(j * math.log(theta) - (j + 1) * math.log(ia.lam + c))
    if isinstance(ia, HyperExponential):
        return sum(
            p * np.exp(j * math.log(theta) - (j + 1) * math.log(r + c))
            for p, r in zip(ia.probs, ia.rates)
        )
    if isinstance(ia, Deterministic):
        return np.exp(j * math.log(theta) - (j + 1) * math.log(c)) * gammainc(j + 1, c * ia.period)
    if isinstance(ia, Erlang):
        k, beta = ia.k, ia.phase_rate
        out = np.zeros(jmax + 1)
        for l in range(k):
            out += np.exp(
                l * math.log(beta) + j * math.log(theta) + gammaln(j + l + 1)
                - gammaln(l + 1) - lj - (j + l + 1) * math.log(beta + c)
            )
        return out
    raise TypeError(ia)


def embedded_chain(params, n_max=1500):
    """Return ``(pre, arb)`` arrays of length ``n_max + 1``."""
    ia, g = params.inter_arrival, np.asarray(params.batch.probs)
    b = len(g)
    theta = params.mu + params.eta
    c = params.delta + theta
    top = n_max + b
    w = np.exp(_log_weights(ia, c, theta, top))
    # Q[m, k]: after-arrival level m -> level k just before the next arrival.
    m = np.arange(top + 1)[:, None]
    k = np.arange(top + 1)[None, :]
    diff = m - k
    Q = np.where((k >= 1) & (diff >= 0), w[np.clip(diff, 0, top)], 0.0)
    Q[:, 0] = 1.0 - Q[:, 1:].sum(axis=1)
    Q[0, 0] = 1.0
    Q[:, n_max] += Q[:, n_max + 1:].sum(axis=1)
    Q = Q[:, : n_max + 1]
    P = np.zeros((n_max + 1, n_max + 1))
    for i in range(1, b + 1):
        P += g[i - 1] * Q[i : i + n_max + 1]
    A = P.T - np.eye(n_max + 1)
    A[-1, :] = 1.0
    rhs = np.zeros(n_max + 1)
    rhs[-1] = 1.0
    pre = linalg.solve(A, rhs)

    post = np.zeros(top + 1)
    for i in range(1, b + 1):
        post[i : i + n_max + 1] += g[i - 1] * pre
    v = _occupation(ia, c, theta, top)
    lam = ia.rate
    arb = np.zeros(n_max + 1)
    for n in range(1, n_max + 1):
        arb[n] = lam * np.dot(post[n:], v[: top + 1 - n])
    arb[0] = 1.0 - arb[1:].sum()
    return pre, arb


def ctmc_poisson(params, n_max=1500):
    """Stationary law of the truncated CTMC for Poisson batch arrivals."""
    lam = params.inter_arrival.rate
    g = params.batch.probs
    theta = params.mu + params.eta
    Q = np.zeros((n_max + 1, n_max + 1))
    for n in range(n_max + 1):
        for i, gi in enumerate(g, start=1):
            Q[n, min(n + i, n_max)] += lam * gi
        if n >= 1:
            Q[n, n - 1] += theta
            Q[n, 0] += params.delta
    np.fill_diagonal(Q, 0.0)
    np.fill_diagonal(Q, -Q.sum(axis=1))
    A = Q.T.copy()
    A[-1, :] = 1.0
    rhs = np.zeros(n_max + 1)
    rhs[-1] = 1.0
    return linalg.solve(A, rhs)


def pade_exp_closed_form(m, n):
    """Ascending (num, den) of the (m, n) Pade approximant of exp(-x)."""
    f = math.factorial
    num = [(-1) ** j * f(m + n - j) * f(m) / (f(m + n) * f(j) * f(m - j)) for j in range(m + 1)]
    den = [f(m + n - j) * f(n) / (f(m + n) * f(j) * f(n - j)) for j in range(n + 1)]
    return np.array(num), np.array(den)


def gim1_root(lam, mu):
    """Root in (0, 1) of mu r^2 - (lam + mu) r + lam = 0 (equals lam/mu)."""
    disc = math.sqrt((lam + mu) ** 2 - 4 * mu * lam)
    return ((lam + mu) - disc) / (2 * mu)
