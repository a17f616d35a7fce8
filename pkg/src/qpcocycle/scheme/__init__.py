"""Parameter selection, scale schedules, avalanche checks and the continuity probe."""

from .avalanche import (ApReport, TwoScaleEstimate, aligned_hyperbolic_sequence, avalanche_check,
                        two_scale_defect)
from .induction import (ExtrapolationResult, InitialScale, extrapolation_error, find_initial_scale,
                        fit_decay_exponent, largest_feasible_depth, write_q_table)
from .parameters import HYPOTHESIS, ParameterBundle, check_bundle, select_parameters, violated
from .probe import ContinuityProbeResult, continuity_probe, modulus_table, write_probe_csv
from .schedule import (ScaleSchedule, ScheduleEntry, build_schedule, ldt_range, ldt_window_holds, ms_holds,
                       next_qtilde, ns_holds, ns_range, select_qtildes, smallest_certified_start, window_for)

__all__ = [
    "ApReport", "TwoScaleEstimate", "aligned_hyperbolic_sequence", "avalanche_check", "two_scale_defect",
    "ExtrapolationResult", "InitialScale", "extrapolation_error", "find_initial_scale", "fit_decay_exponent",
    "largest_feasible_depth", "write_q_table",
    "HYPOTHESIS", "ParameterBundle", "check_bundle", "select_parameters", "violated",
    "ContinuityProbeResult", "continuity_probe", "modulus_table", "write_probe_csv",
    "ScaleSchedule", "ScheduleEntry", "build_schedule", "ldt_range", "ldt_window_holds", "ms_holds",
    "next_qtilde", "ns_holds", "ns_range", "select_qtildes", "smallest_certified_start", "window_for",
]
