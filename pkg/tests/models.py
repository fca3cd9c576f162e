"""Shared parameter sets and frozen reference values for the tests."""
import numpy as np

from gixq import (
    BatchSizeDistribution,
    Deterministic,
    Erlang,
    Exponential,
    HyperExponential,
    ModelParams,
)

TABLE1_BATCH = {1: 0.2, 3: 0.4, 6: 0.3, 10: 0.1}

# Reference values to 8 decimals: n -> (p_pre, p_arb, ratio).
TABLE1_M = {
    0: (0.20533567, 0.20533567, 0.15065676),
    1: (0.03093521, 0.03093521, 0.91498603),
    2: (0.02830528, 0.02830528, 1.65427828),
    3: (0.04682481, 0.04682481, 0.55001705),
    4: (0.02575445, 0.02575445, 1.23727398),
    5: (0.03186531, 0.03186531, 1.45536181),
    6: (0.04637555, 0.04637555, 0.55360053),
    7: (0.02567353, 0.02567353, 1.05065616),
    200: (0.00000060, 0.00000060, 0.94509121),
    201: (0.00000057, 0.00000057, 0.94509121),
    202: (0.00000054, 0.00000054, 0.94509121),
    203: (0.00000051, 0.00000051, 0.94509121),
    204: (0.00000048, 0.00000048, 0.94509121),
    205: (0.00000045, 0.00000045, 0.94509121),
}
TABLE1_D = {
    0: (0.23080160, 0.12004016, 0.15318913),
    1: (0.03535630, 0.03653976, 1.12629474),
    2: (0.03982161, 0.03420904, 1.01859822),
    3: (0.04056222, 0.06060381, 0.85997718),
    4: (0.03488259, 0.02886916, 1.20959058),
    5: (0.04219365, 0.04113680, 0.92958177),
    6: (0.03922244, 0.05948070, 0.75644328),
    7: (0.02966955, 0.03095702, 1.07090478),
    200: (0.00000009, 0.00000010, 0.93533903),
    201: (0.00000008, 0.00000009, 0.93533903),
    202: (0.00000008, 0.00000009, 0.93533903),
    203: (0.00000007, 0.00000008, 0.93533903),
    204: (0.00000007, 0.00000008, 0.93533903),
    205: (0.00000006, 0.00000007, 0.93533903),
}
TABLE1_MEANS = {"M": (15.04001756, 15.04001756), "D": (12.39890533, 14.40030123)}
TABLE1_RB = {"M": 0.94509121, "D": 0.93533903}
TABLE1_ROWS = {"M": TABLE1_M, "D": TABLE1_D}

FAMILIES = ("exponential", "erlang", "deterministic", "hyperexponential")


def table1_params(family="M", **overrides):
    ia = {"M": Exponential(10.0), "D": Deterministic(0.1), "E4": Erlang(4, 10.0)}[family]
    kw = dict(mu=10.0, eta=5.0, delta=2.0)
    kw.update(overrides)
    return ModelParams(ia, BatchSizeDistribution.from_mapping(TABLE1_BATCH), **kw)


def make_inter_arrival(family, lam, rng):
    if family == "exponential":
        return Exponential(lam)
    if family == "erlang":
        return Erlang(int(rng.integers(2, 6)), lam)
    if family == "deterministic":
        return Deterministic(1.0 / lam)
    p = float(rng.uniform(0.1, 0.9))
    # Balanced means keep the overall rate at lam.
    return HyperExponential((p, 1.0 - p), (2 * p * lam, 2 * (1 - p) * lam))


def random_batch(rng, b_max=10):
    b = int(rng.integers(1, b_max + 1))
    support = sorted(set(rng.choice(np.arange(1, b + 1), size=rng.integers(1, b + 1)).tolist()) | {b})
    w = rng.dirichlet(np.ones(len(support)))
    return BatchSizeDistribution.from_mapping(dict(zip(support, w)))


def random_model(rng, family=None, delta_zero=False, b_max=10):
    """A stable model; with ``delta_zero`` the load is kept below the stability limit."""
    family = family or FAMILIES[int(rng.integers(len(FAMILIES)))]
    batch = random_batch(rng, b_max)
    mu = float(rng.uniform(2.0, 20.0))
    eta = 0.0 if rng.random() < 0.2 else float(rng.uniform(0.0, 10.0))
    if delta_zero:
        delta = 0.0
        cap = mu + eta
        lam = float(rng.uniform(0.2, 0.9)) * cap / batch.gbar
    else:
        delta = float(rng.uniform(0.1, 5.0))
        lam = float(rng.uniform(0.2, 2.0)) * (mu + eta) / batch.gbar
    return ModelParams(make_inter_arrival(family, lam, rng), batch, mu, eta, delta)


def random_models(count, seed, **kw):
    rng = np.random.default_rng(seed)
    return [random_model(rng, **kw) for _ in range(count)]


def mixed_models(count=50, seed=2024):
    """Mostly disaster models plus every fifth one with delta = 0."""
    rng = np.random.default_rng(seed)
    return [
        random_model(rng, family=FAMILIES[i % len(FAMILIES)], delta_zero=(i % 5 == 4))
        for i in range(count)
    ]
