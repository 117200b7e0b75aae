"""Capacity bounds, solvers and Monte Carlo simulation for discrete-time
Poisson channels with linear intersymbol interference."""

__version__ = "0.1.0"

from .channel import (
    BlockChannelSpec,
    ChannelSpec,
    DiscreteChannel,
    ImpulseResponse,
    InputGrid,
    NetworkSpec,
    build_block_channel,
    build_memoryless_channel,
    convolve,
    load_instance,
    parse_instance,
    poisson_pmf,
    scale_invariance_transform,
)
from .errors import BudgetExceededError, ConvergenceError
from .solver import (
    CapacityResult,
    SolverConfig,
    ba_capacity,
    capacity_cost_curve,
    mutual_information,
)
from .bounds import (
    SandwichBound,
    StationaryBound,
    SymKLResult,
    block_sandwich_bounds,
    cov_bound_poisson,
    gaussian_sym_bound,
    poisson_sym_bound_closed_form,
    stationary_bounds,
    stationary_lower_bound,
    stationary_upper_bound,
    sym_kl_generic,
    sym_kl_max,
    sym_kl_reference_bound,
)
from .simulate import (
    PluginMiEstimate,
    SimConfig,
    Trace,
    plugin_mi_estimate,
    poisson_draw,
    simulate_network,
    simulate_p2p,
    substream,
)
from .analysis import (
    DegradednessReport,
    OrderingVerdict,
    SweepVerdict,
    capacity_ordering_check,
    check_degraded,
    monotonicity_sweep,
)
