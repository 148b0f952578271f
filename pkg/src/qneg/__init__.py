"""Numerical toolkit for negativity-based nonclassicality measures of
single-mode bosonic states: filtered and order-parametrized quasiprobability
negativities, width-sweep limits, the robustness decomposition, and numeric
checks of the linear-optical monotonicity and convexity properties.
"""

__version__ = "0.1.0"

from .errors import GuardError, QnegError, ValidationError
from .grid import (
    ComplexGrid,
    Domain,
    GridSpec,
    Part,
    cross_fourier,
    dump_grid,
    integrate,
    load_grid,
    parseval_residual,
    sample_function,
)
from .states import (
    BoundReport,
    ChiFunction,
    Coherent,
    Fock,
    Mixture,
    PhotonAddedThermal,
    SqueezedVacuum,
    StateSpec,
    Thermal,
    analytic_quasiprob,
    bound_check,
    char_evaluator,
    char_fn,
    laguerre,
    state_from_dict,
    state_to_dict,
    validate_order,
)
from .filters import (
    FilterDelta,
    FilterPropertiesReport,
    FilterSpec,
    eval_filter,
    filter_from_dict,
    filter_negativity_delta,
    filter_to_dict,
    split_width,
    verify_filter_properties,
)
from .engine import (
    ConvergenceReport,
    Converged,
    Diagnostics,
    Diverging,
    Inconclusive,
    NegativityResult,
    RobustnessDecomposition,
    SPoint,
    SweepEntry,
    filtered_quasiprob,
    negativity,
    resolve_grid,
    robustness_decomposition,
    sampled_char,
    sweep_s,
    sweep_w,
)
from .channels import (
    ChannelSpec,
    Compose,
    ConvexCombine,
    Displacement,
    Loss,
    PhaseShift,
    apply_channel,
    channel_from_dict,
    channel_to_dict,
    check_approx_monotonicity,
    check_convexity,
    check_weak_monotonicity,
)

__all__ = [name for name in dir() if not name.startswith("_")]
