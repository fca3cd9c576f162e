"""Discrete-event simulation used as an independent check on the analytic solver.

Four event streams drive the state ``N`` (customers present): batch
arrivals from the renewal process, exponential service completions while
``N >= 1``, Poisson negative customers that remove the customer in service,
and Poisson disasters that empty the system.  Negative customers and
disasters arriving to an empty system are counted as no-ops.

Random numbers: each replication ``r`` uses seed ``seed + r``; inside a
replication every stream (arrival, batch, service, negative, disaster) owns a
Philox generator keyed by ``SeedSequence(seed + r, spawn_key=(stream,))``, so
adding or removing a stream never perturbs the others.

The event loop runs in the compiled ``_simkernel`` extension when it is
importable and in ``_simkernel_py`` otherwise (or when ``GIXQ_PURE_PYTHON=1``).
Both produce bit-identical results.
"""
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import _simkernel_py
from .arrivals import Deterministic, Erlang, Exponential, HyperExponential
from .charroots import ModelParams, require_stable
from .errors import ConfigError
from .solver import SystemDistribution

log = logging.getLogger(__name__)

try:
    if os.environ.get("GIXQ_PURE_PYTHON") == "1":
        raise ImportError("pure-Python kernel forced by GIXQ_PURE_PYTHON")
    from . import _simkernel as _compiled
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None

BACKENDS = {"python": _simkernel_py.run_replication}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled.run_replication
DEFAULT_BACKEND = "compiled" if _compiled is not None else "python"

STREAMS = ("arrival", "batch", "service", "negative", "disaster")
EVENTS = ("disaster", "negative", "service", "arrival")
DEFAULT_PRIORITY = EVENTS
COUNTER_NAMES = (
    "batches",
    "customers_arrived",
    "services",
    "negatives_effective",
    "negatives_noop",
    "disasters_effective",
    "disasters_noop",
    "removed_by_disasters",
    "initial_n",
    "final_n",
)

__all__ = [
    "SimConfig",
    "SimResult",
    "ComparisonReport",
    "simulate",
    "compare",
    "total_variation",
    "BACKENDS",
    "DEFAULT_BACKEND",
]


@dataclass(frozen=True)
class SimConfig:
    params: ModelParams
    batch_arrivals_target: int = 10**6
    warmup_fraction: float = 0.1
    seed: int = 0
    replications: int = 10
    priority: tuple[str, ...] = DEFAULT_PRIORITY

    def __post_init__(self):
        if int(self.batch_arrivals_target) < 10**4:
            raise ConfigError("batch_arrivals_target must be at least 10**4")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ConfigError("warmup_fraction must lie in [0, 1)")
        if int(self.replications) < 1:
            raise ConfigError("replications must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if sorted(self.priority) != sorted(EVENTS):
            raise ConfigError(f"priority must be a permutation of {EVENTS}")
        object.__setattr__(self, "priority", tuple(self.priority))

    @property
    def warmup_arrivals(self) -> int:
        return int(math.floor(self.warmup_fraction * self.batch_arrivals_target))

    @property
    def measured_arrivals(self) -> int:
        return int(self.batch_arrivals_target) - self.warmup_arrivals


@dataclass(frozen=True)
class SimResult:
    params: ModelParams
    config: SimConfig
    prearrival_pmf: np.ndarray
    timeavg_pmf: np.ndarray
    prearrival_counts: np.ndarray
    mean_pre: float
    mean_arb: float
    standard_errors: dict
    event_counts: dict
    replication_counts: list = field(repr=False, default_factory=list)

    def conservation_gap(self, rep: int | None = None) -> int:
        """initial + arrived - (served + negatives + disasters + final); zero when consistent."""
        reps = self.replication_counts if rep is None else [self.replication_counts[rep]]
        gap = 0
        for c in reps:
            gap += (
                c["initial_n"]
                + c["customers_arrived"]
                - c["services"]
                - c["negatives_effective"]
                - c["removed_by_disasters"]
                - c["final_n"]
            )
        return gap


def _arrival_encoding(ia):
    if isinstance(ia, Exponential):
        return _simkernel_py.IA_EXP, 1, np.array([ia.lam])
    if isinstance(ia, Erlang):
        return _simkernel_py.IA_ERLANG, ia.k, np.array([ia.phase_rate])
    if isinstance(ia, Deterministic):
        return _simkernel_py.IA_DET, 1, np.array([ia.period])
    if isinstance(ia, HyperExponential):
        cum = np.cumsum(ia.probs)
        cum[-1] = 1.0
        return _simkernel_py.IA_HYPER, 1, np.concatenate([cum, ia.rates])
    raise TypeError(f"cannot simulate inter-arrival law {type(ia).__name__}")


def _bitgens(seed: int):
    return [
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=(k,)))
        for k in range(len(STREAMS))
    ]


def run_replication(config: SimConfig, rep: int, backend: str | None = None):
    """Raw kernel output ``(pre_counts, time_hist, counters)`` for replication ``rep``."""
    p = config.params
    kernel = BACKENDS[backend or DEFAULT_BACKEND]
    code, k, vals = _arrival_encoding(p.inter_arrival)
    cum = np.cumsum(p.batch.probs)
    cum[-1] = 1.0
    prio = [EVENTS.index(e) for e in config.priority]
    return kernel(
        code,
        k,
        vals,
        cum,
        p.mu,
        p.eta,
        p.delta,
        int(config.batch_arrivals_target),
        config.warmup_arrivals,
        prio,
        _bitgens(int(config.seed) + rep),
    )


def _pad(arrays):
    size = max(len(a) for a in arrays)
    out = np.zeros((len(arrays), size), dtype=np.result_type(*arrays))
    for i, a in enumerate(arrays):
        out[i, : len(a)] = a
    return out


def _trim(x):
    nz = np.flatnonzero(x)
    return x[: nz[-1] + 1] if nz.size else x[:1]


def simulate(config: SimConfig, backend: str | None = None) -> SimResult:
    """Run ``config.replications`` independent replications and merge them.

    Empirical pmfs are averages of the per-replication pmfs; standard errors
    are the across-replication standard deviations over sqrt(R).
    """
    require_stable(config.params)
    pre_reps, time_reps, counters = [], [], []
    for rep in range(config.replications):
        pre, hist, cnt = run_replication(config, rep, backend)
        pre_reps.append(pre)
        time_reps.append(hist)
        counters.append(dict(zip(COUNTER_NAMES, (int(x) for x in cnt))))
    pre_counts = _pad(pre_reps)
    time_hist = _pad(time_reps)
    pre_pmf_reps = pre_counts / pre_counts.sum(axis=1, keepdims=True)
    time_pmf_reps = time_hist / time_hist.sum(axis=1, keepdims=True)

    pooled_counts = _trim(pre_counts.sum(axis=0))
    size = max(len(pooled_counts), len(_trim(time_hist.sum(axis=0))))
    pre_pmf = pre_pmf_reps.mean(axis=0)[:size]
    time_pmf = time_pmf_reps.mean(axis=0)[:size]
    pre_pmf = pre_pmf / pre_pmf.sum()
    time_pmf = time_pmf / time_pmf.sum()
    n = np.arange(size)
    mean_pre = float(np.dot(n, pre_pmf))
    mean_arb = float(np.dot(n, time_pmf))

    R = config.replications
    if R > 1:
        se_pre = pre_pmf_reps[:, :size].std(axis=0, ddof=1) / math.sqrt(R)
        se_time = time_pmf_reps[:, :size].std(axis=0, ddof=1) / math.sqrt(R)
        means_pre = pre_pmf_reps[:, :size] @ n
        means_arb = time_pmf_reps[:, :size] @ n
        se_mean_pre = float(means_pre.std(ddof=1) / math.sqrt(R))
        se_mean_arb = float(means_arb.std(ddof=1) / math.sqrt(R))
    else:
        se_pre = np.full(size, np.nan)
        se_time = np.full(size, np.nan)
        se_mean_pre = se_mean_arb = math.nan

    totals = {name: sum(c[name] for c in counters) for name in COUNTER_NAMES}
    return SimResult(
        params=config.params,
        config=config,
        prearrival_pmf=pre_pmf,
        timeavg_pmf=time_pmf,
        prearrival_counts=np.pad(pooled_counts, (0, size - len(pooled_counts))),
        mean_pre=mean_pre,
        mean_arb=mean_arb,
        standard_errors={
            "prearrival": se_pre,
            "timeavg": se_time,
            "mean_pre": se_mean_pre,
            "mean_arb": se_mean_arb,
        },
        event_counts=totals,
        replication_counts=counters,
    )


def total_variation(p, q, tail_p: float = 0.0, tail_q: float = 0.0) -> float:
    """0.5 * sum |p - q| after zero-padding, plus optional mass beyond both supports."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    size = max(len(p), len(q))
    p = np.pad(p, (0, size - len(p)))
    q = np.pad(q, (0, size - len(q)))
    return 0.5 * (float(np.abs(p - q).sum()) + abs(tail_p - tail_q))


@dataclass(frozen=True)
class ComparisonReport:
    tv_prearrival: float
    tv_timeavg: float
    mean_pre_ref: float
    mean_arb_ref: float
    mean_pre_sim: float
    mean_arb_sim: float
    se_mean_pre: float
    se_mean_arb: float
    z_prearrival: np.ndarray = field(repr=False)
    z_timeavg: np.ndarray = field(repr=False)
    tv_limit: float = 0.005
    z_limit: float = 3.0

    @property
    def mean_pre_ok(self) -> bool:
        return abs(self.mean_pre_sim - self.mean_pre_ref) < self.z_limit * self.se_mean_pre

    @property
    def mean_arb_ok(self) -> bool:
        return abs(self.mean_arb_sim - self.mean_arb_ref) < self.z_limit * self.se_mean_arb

    @property
    def passed(self) -> bool:
        return (
            self.tv_prearrival < self.tv_limit
            and self.tv_timeavg < self.tv_limit
            and self.mean_pre_ok
            and self.mean_arb_ok
        )

    def as_dict(self) -> dict:
        def block(ref, sim, se, ok):
            return {"analytic": float(ref), "sim": float(sim), "se": float(se), "ok": bool(ok)}

        return {
            "pass": bool(self.passed),
            "tv_prearrival": float(self.tv_prearrival),
            "tv_timeavg": float(self.tv_timeavg),
            "tv_limit": self.tv_limit,
            "mean_pre": block(self.mean_pre_ref, self.mean_pre_sim, self.se_mean_pre, self.mean_pre_ok),
            "mean_arb": block(self.mean_arb_ref, self.mean_arb_sim, self.se_mean_arb, self.mean_arb_ok),
        }


def compare(analytic, sim: SimResult, strict: bool = True) -> ComparisonReport:
    """Compare a simulation against a reference law.

    ``analytic`` is normally a :class:`SystemDistribution`; another
    :class:`SimResult` is accepted too (its empirical pmfs become the
    reference).  With ``strict`` the two must share identical parameters.
    """
    if strict and analytic.params != sim.params:
        raise ConfigError("analytic and simulated models have different parameters")
    size = len(sim.prearrival_pmf)
    if isinstance(analytic, SystemDistribution):
        n = np.arange(size)
        ref_pre = analytic.prearrival_pmf(n)
        ref_arb = analytic.arbitrary_pmf(n)
        r, c = analytic.roots, analytic.constants
        tail_pre = float(np.real(np.sum(c * r**size / (1.0 - r))) / analytic.lam)
        tail_arb = analytic.arbitrary_pmf_sum_from(size)
        m_pre, m_arb = analytic.means()
    else:
        ref_pre, ref_arb = analytic.prearrival_pmf, analytic.timeavg_pmf
        tail_pre = tail_arb = 0.0
        m_pre, m_arb = analytic.mean_pre, analytic.mean_arb
    tv_pre = total_variation(sim.prearrival_pmf, ref_pre, 0.0, max(tail_pre, 0.0))
    tv_arb = total_variation(sim.timeavg_pmf, ref_arb, 0.0, max(tail_arb, 0.0))

    def zscores(emp, ref, se):
        ref = np.pad(ref, (0, max(0, len(emp) - len(ref))))[: len(emp)]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(se > 0, (emp - ref) / se, np.nan)

    se = sim.standard_errors
    return ComparisonReport(
        tv_prearrival=tv_pre,
        tv_timeavg=tv_arb,
        mean_pre_ref=m_pre,
        mean_arb_ref=m_arb,
        mean_pre_sim=sim.mean_pre,
        mean_arb_sim=sim.mean_arb,
        se_mean_pre=se["mean_pre"],
        se_mean_arb=se["mean_arb"],
        z_prearrival=zscores(sim.prearrival_pmf, np.asarray(ref_pre), se["prearrival"]),
        z_timeavg=zscores(sim.timeavg_pmf, np.asarray(ref_arb), se["timeavg"]),
    )
