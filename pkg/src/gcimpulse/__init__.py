"""Simulation and verification of impulsive control systems via graph
completions: path algebra for controls of bounded or locally bounded
variation, unit-speed space-time lifts, fixed-step integration, clock
smoothing, and absolutely continuous approximation with certificates."""

from .approx import (
    ApproxMember,
    ApproxSequence,
    Mollifier,
    MollifiedClock,
    build_approx_sequence,
    mollify_clock,
    terminal_certificate,
    wellposedness_report,
)
from .completion import (
    CompletionResult,
    PlateauDiagnostic,
    SegmentCompletion,
    SpaceTimeControl,
    arc_length_reparam,
    build_completion,
    complete_segment,
    extend_periodic,
    geometric_partition,
    plateau_diagnostic,
    verify_feasibility,
    whitney_bridge,
)
from .errors import (
    ConfigError,
    DiagnosticError,
    DomainError,
    GCImpulseError,
    InvariantViolation,
    PreconditionError,
)
from .ode import (
    ClockedSolution,
    Dynamics,
    Trajectory,
    caratheodory,
    caratheodory_sampled,
    clocked_solution,
    consistency_check,
    integrate_spacetime,
    integrate_spacetime_refined,
    solve_completion,
    uniform_convergence_probe,
)
from .paths import (
    UNIT_DISC,
    AffineSegment,
    AnalyticSegment,
    Clock,
    ClockJump,
    ControlPath,
    ControlSet,
    Jump,
    OrdinaryControl,
    TimeChange,
    clock_from_function,
    clock_pseudo_inverse,
    constant_ordinary,
    constant_path,
    discontinuity_set,
    piecewise_affine,
    piecewise_constant_ordinary,
    total_variation,
)
from . import scenarios

__version__ = "0.1.0"

__all__ = [
    "AffineSegment",
    "AnalyticSegment",
    "ApproxMember",
    "ApproxSequence",
    "Clock",
    "ClockJump",
    "ClockedSolution",
    "CompletionResult",
    "ConfigError",
    "ControlPath",
    "ControlSet",
    "DiagnosticError",
    "DomainError",
    "Dynamics",
    "GCImpulseError",
    "InvariantViolation",
    "Jump",
    "Mollifier",
    "MollifiedClock",
    "OrdinaryControl",
    "PlateauDiagnostic",
    "PreconditionError",
    "SegmentCompletion",
    "SpaceTimeControl",
    "TimeChange",
    "Trajectory",
    "UNIT_DISC",
    "arc_length_reparam",
    "build_approx_sequence",
    "build_completion",
    "caratheodory",
    "caratheodory_sampled",
    "clock_from_function",
    "clock_pseudo_inverse",
    "clocked_solution",
    "complete_segment",
    "consistency_check",
    "constant_ordinary",
    "constant_path",
    "discontinuity_set",
    "extend_periodic",
    "geometric_partition",
    "integrate_spacetime",
    "plateau_diagnostic",
    "integrate_spacetime_refined",
    "mollify_clock",
    "piecewise_affine",
    "piecewise_constant_ordinary",
    "scenarios",
    "solve_completion",
    "terminal_certificate",
    "total_variation",
    "uniform_convergence_probe",
    "verify_feasibility",
    "wellposedness_report",
    "whitney_bridge",
]
