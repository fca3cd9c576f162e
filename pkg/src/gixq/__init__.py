"""Stationary laws of a batch-arrival single-server queue with negative customers and disasters.

Typical use::

    from gixq import Exponential, BatchSizeDistribution, ModelParams, solve

    g = BatchSizeDistribution.from_mapping({1: 0.2, 3: 0.4, 6: 0.3, 10: 0.1})
    dist = solve(ModelParams(Exponential(10.0), g, mu=10.0, eta=5.0, delta=2.0))
    dist.prearrival_pmf(0), dist.means()
"""
from .arrivals import (
    BatchSizeDistribution,
    Deterministic,
    Erlang,
    Exponential,
    HyperExponential,
    InterArrivalModel,
    RationalSurrogate,
    lst,
    lst_derivative,
    pade_surrogate,
    pgf,
)
from .charroots import (
    ModelParams,
    RootSet,
    StabilityReport,
    char_fn,
    find_roots,
    stability_check,
    winding_count,
)
from .errors import (
    ConfigError,
    DegenerateSpectrumError,
    GixqError,
    NumericalError,
    RootCountError,
    StabilityError,
)
from .simulator import ComparisonReport, SimConfig, SimResult, compare, simulate
from .solver import (
    SpectralSolution,
    SystemDistribution,
    arbitrary_pmf,
    mean_system_size,
    prearrival_pmf,
    reduce_special_case,
    solve,
    solve_constants,
    tail_decay,
)

__version__ = "0.1.0"
