"""SEIR epidemic simulation with feedback vaccination synthesis.

Core entry points:

    integrate(scenario)            run one scenario (fixed-step RK4)
    build_preset(name)             bundled scenarios
    detect_steady_state(traj)      settled-regime search
    standard_verdicts(params)      stability profile
    vaccination_saturated(...)     clamped feedback law
    vaccination_unsaturated(...)   unclamped law with boundary resets
"""

from .errors import (
    ConfigError,
    DecompositionError,
    DegenerateProfileError,
    IndicatorMismatchError,
    NonUniformGridError,
    NotApplicableError,
    SeirvaxError,
    SingularStateError,
)
from .model import (
    CANONICAL_VARIANT,
    COMPONENT_NAMES,
    N_FLOOR,
    DynamicsMatrix,
    ForcingForm,
    MatrixVariant,
    ModelParams,
    StateRate,
    StateVec,
    build_matrix,
    derivative,
    forcing_vector,
    make_rate_fn,
    reconstruct_derivative,
    total_population_rate,
)
from .positivity import (
    MetzlerReport,
    NonnegativityReport,
    ResetEvent,
    apply_reset,
    check_metzler,
    decompose_star,
    metzler_parameter_criterion,
    monitor_nonnegativity,
)
from .stability import (
    ConditionCheck,
    IntegralDiagnostic,
    StabilityCriterion,
    StabilityVerdict,
    check_mortality_absorbs_growth,
    check_population_nonincreasing,
    check_unforced_boundedness,
    integral_test,
    integral_verdict,
    standard_verdicts,
)
from .control import (
    ControlConfig,
    ControlSample,
    ModulationFamily,
    ReferenceProfile,
    ReferenceSample,
    TrackingBound,
    TrackingCase,
    VaccinationLaw,
    decay_design_g_ceiling,
    g_signal,
    gain_schedule,
    immune_closed_form,
    modulation_identity_residual,
    reference,
    stationary_tracking_level,
    tracking_bound,
    vaccination_saturated,
    vaccination_unsaturated,
)
from .sim import (
    STEADY_STATE_WINDOW_DAYS,
    ConvergenceRow,
    RunStatus,
    ScenarioConfig,
    SteadyState,
    Trajectory,
    TrajectoryRecord,
    convergence_study,
    detect_steady_state,
    integrate,
)
from .presets import BASELINE_PARAMS, PRESETS, build_preset, preset_names
from .config import load_scenario

__version__ = "0.1.0"

__all__ = [
    "BASELINE_PARAMS",
    "CANONICAL_VARIANT",
    "COMPONENT_NAMES",
    "ConditionCheck",
    "ConfigError",
    "ControlConfig",
    "ControlSample",
    "ConvergenceRow",
    "DecompositionError",
    "DegenerateProfileError",
    "DynamicsMatrix",
    "ForcingForm",
    "IndicatorMismatchError",
    "IntegralDiagnostic",
    "MatrixVariant",
    "MetzlerReport",
    "ModelParams",
    "ModulationFamily",
    "N_FLOOR",
    "NonUniformGridError",
    "NonnegativityReport",
    "NotApplicableError",
    "PRESETS",
    "ReferenceProfile",
    "ReferenceSample",
    "ResetEvent",
    "RunStatus",
    "STEADY_STATE_WINDOW_DAYS",
    "ScenarioConfig",
    "SeirvaxError",
    "SingularStateError",
    "StabilityCriterion",
    "StabilityVerdict",
    "StateRate",
    "StateVec",
    "SteadyState",
    "TrackingBound",
    "TrackingCase",
    "Trajectory",
    "TrajectoryRecord",
    "VaccinationLaw",
    "apply_reset",
    "build_matrix",
    "build_preset",
    "check_metzler",
    "check_mortality_absorbs_growth",
    "check_population_nonincreasing",
    "check_unforced_boundedness",
    "convergence_study",
    "decay_design_g_ceiling",
    "decompose_star",
    "derivative",
    "detect_steady_state",
    "forcing_vector",
    "g_signal",
    "gain_schedule",
    "immune_closed_form",
    "integral_test",
    "integral_verdict",
    "integrate",
    "load_scenario",
    "make_rate_fn",
    "metzler_parameter_criterion",
    "modulation_identity_residual",
    "monitor_nonnegativity",
    "preset_names",
    "reconstruct_derivative",
    "reference",
    "stationary_tracking_level",
    "standard_verdicts",
    "total_population_rate",
    "tracking_bound",
    "vaccination_saturated",
    "vaccination_unsaturated",
    "__version__",
]
