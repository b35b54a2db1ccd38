"""lobforge: limit-order-book simulation with stochastic liquidity agents
and multi-objective indirect-inference calibration."""

from . import backend
from ._pykernel import ASK, BID
from .agents import (
    AgentParams,
    InitialBookSpec,
    SimConfig,
    SimResult,
    SnapshotSeries,
    apply_quote_to_trade,
    seed_initial_book,
    simulate,
)
from .auxiliary import (
    AuxCoefficients,
    AuxSeries,
    acf_pacf,
    arch_lm_test,
    fit_arima011,
    fit_auxiliary,
    fit_garch11,
    transform,
)
from .book import (
    ActiveWindow,
    BookState,
    IntervalActivity,
    Order,
    SideActivity,
    WindowVolumes,
    apply_interval,
    build_window,
    window_volumes,
)
from .calibrate import (
    Bounds,
    CalibrationReport,
    Individual,
    LobObjective,
    Nsga2Config,
    coverage_analysis,
    crowding_distance,
    dominates,
    indirect_inference_single,
    mutate_covariance,
    non_dominated_sort,
    polynomial_mutation,
    run_nsga2,
    sbx_crossover,
)
from .stochastic import (
    ConstantSize,
    GammaMixtureSize,
    SkewTParams,
    intensity_transform,
    sample_inverse_wishart,
    sample_order_size,
    sample_poisson_vector,
    sample_skew_t,
    sample_truncated_poisson,
    skew_t_log_density,
)

__version__ = "0.1.0"
