from .bessel import J1_ARGMAX, J1_MAX, bessel, effective_coupling, effective_couplings
from .refine import RefineResult, refine_schedule
from .synthesis import (
    CouplingTarget,
    base_from_duration,
    duration_from_base,
    feasibility_report,
    invert_link,
    make_schedule,
    synthesize_schedule,
)

__all__ = [
    "J1_ARGMAX",
    "J1_MAX",
    "bessel",
    "effective_coupling",
    "effective_couplings",
    "CouplingTarget",
    "invert_link",
    "make_schedule",
    "synthesize_schedule",
    "feasibility_report",
    "duration_from_base",
    "base_from_duration",
    "refine_schedule",
    "RefineResult",
]
