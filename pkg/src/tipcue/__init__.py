"""Tip-and-cue satellite tasking: tips, cues, visibility windows, and
continuous-time multi-satellite schedule optimization."""

from .model import (
    Cue,
    FeasibilityConstraints,
    Footprint,
    Satellite,
    Schedule,
    ScheduledCue,
    TimeInterval,
    Tip,
    UtilityFunction,
    WindowSet,
    interval_overlap_length,
    project,
    utility_eval,
    utility_grad,
)
from .orbits import (
    EphemerisTable,
    KeplerElements,
    SamplingConfig,
    SatelliteState,
    compute_all_windows,
    compute_windows,
    is_visible,
    propagate,
    visibility_radius,
)
from .scheduling import (
    OptimizerConfig,
    PenaltyParams,
    RankingParams,
    ScheduleResult,
    SeparationModel,
    availability,
    binary_search_prefix,
    delta_ij,
    init_time,
    kappa,
    loss_and_grad,
    penalty,
    pgd,
    rank,
    refine,
    schedule,
    validate_schedule,
)
from .scenario import (
    ScenarioSpec,
    SweepResult,
    SweepRow,
    brute_force_oracle,
    build_cues,
    default_scenario,
    generate_dynamic,
    generate_static,
    make_overhead_satellite,
    run_schedule,
    run_sweep,
)
from .tips import (
    AnomalyObservation,
    FeedbackReport,
    TipScoringParams,
    ais_error_km,
    anomaly_trigger,
    build_dynamic_cue,
    build_static_cue,
    cosine_drift,
    dev_score,
    feedback_trigger,
    relevance,
    tip_score,
    urg_score,
)

__version__ = "0.1.0"
