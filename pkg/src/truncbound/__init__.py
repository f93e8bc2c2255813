"""Certified bounds on stationary distributions under state-space truncation."""
from ._backend import BACKEND, get_threads, set_threads
from .bounds import (
    AdaptReport,
    RewardBounds,
    TvReport,
    adapt_boundary,
    mixture_tv_gap,
    reward_bounds,
    tv_diameter,
    tv_norm,
)
from .censor import (
    CensoredKernel,
    NuTable,
    TruncationSpec,
    build_nu_table,
    censor,
    censor_neumann_oracle,
    fundamental_rows,
    neumann_oracle,
    nu_table,
)
from .kernel import Kind, SparseKernel, StateSpace, deficiency, dominates, restrict, validate_kernel
from .models import ModelSpec, closed_form_stationary, transition_row, window, window_from_labels
from .representation import (
    Distribution,
    Measure,
    backward_map,
    conditional_distribution,
    forward_decomposition,
    forward_map,
    mixture,
    stationary_oracle,
)

__version__ = "0.1.0"
