"""Simulation library for ballooning multi-armed bandits and the BL-Moss policy."""

__version__ = "0.1.0"

from ._accel import USE_NUMBA
from .analysis import FitReport, fit_exponent_grid, fit_exponent_loglog, fit_report
from .arrivals import (
    ArrivalRateProcess,
    BanditInstance,
    TailModel,
    build_instance,
    build_rate_instance,
    resample_qualities,
    sample_best_arrival,
    truncated_cdf,
)
from .engine import (
    RegretCurve,
    SimulationConfig,
    expected_regret,
    lemma1_bound,
    moss_bound,
    run_episode,
    sweep,
    worst_case_regret,
)
from .errors import BLMABError
from .lambertw import AlphaParams, alpha_subexp, alpha_subpareto, lambert_w0
