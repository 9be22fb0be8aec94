"""Coarse-grained open-system dynamics (C++ core with numpy bindings)."""

from ._core import (
    CoarseGrainedL,
    Generator,
    PropagationSpec,
    Trajectory,
    coarse_grained_L,
    conventional_rate_tensor,
    fgr_convergence,
    fgr_rates,
    gfgr_apply,
    gfgr_rate_tensor,
    parse_scenario,
    partial_trace,
    propagate,
    run_scenario,
    smoothed_fgr_rates,
    t3_coefficient,
    tensor_product,
    trace_distance,
    validate_state,
)

__all__ = [
    "CoarseGrainedL",
    "Generator",
    "PropagationSpec",
    "Trajectory",
    "coarse_grained_L",
    "conventional_rate_tensor",
    "fgr_convergence",
    "fgr_rates",
    "gfgr_apply",
    "gfgr_rate_tensor",
    "parse_scenario",
    "partial_trace",
    "propagate",
    "run_scenario",
    "smoothed_fgr_rates",
    "t3_coefficient",
    "tensor_product",
    "trace_distance",
    "validate_state",
]
