"""Two-phase pulsating heat pipe toolkit: a lumped startup model with a
fixed-step integrator, closed-form startup curves, a firefly global
optimizer, and inverse drivers that recover physical parameters from
sparse plug-position observations.

Temperatures are degrees Celsius at the interfaces (Kelvin inside the gas
law and flux law), pressures Pa except where a name says kPa, lengths m.
"""

from .errors import (
    ConfigError,
    DomainError,
    ObjectiveEvaluationError,
    RankDeficiencyError,
)
from .model import (
    ASSUMED_DEFAULTS,
    KELVIN_OFFSET,
    LAMINAR_RE_LIMIT,
    STATE_FIELDS,
    STATIC_FRICTION_FACTOR,
    Derivative,
    DimensionlessCoeffs,
    PhysicalParams,
    State,
    critical_diameter,
    friction_factor,
    interfacial_mass_flux,
    nondim_coeffs,
    plug_mass,
    rhs,
    vapor_pressure,
    wall_shear,
)
from .integrate import (
    STATUS_COMPLETED,
    STATUS_EARLY_STOP,
    Trajectory,
    integrate_path,
    model_field,
    simulate,
    step_rk4,
)
from .analytic import (
    film_temperature,
    plug_position_lncosh,
    plug_velocity_lncosh,
    wong_rhs,
    yuan_rhs,
)
from .firefly import (
    LEVY_S_MIN,
    NOISE_KINDS,
    FireflyConfig,
    OptimizeResult,
    Swarm,
    attractiveness,
    levy_step,
    move_firefly,
    optimize,
)
from .estimation import (
    CONSTRAINED_BOUNDS,
    FORWARD_FAILURE_PENALTY,
    LOOSE_BOUNDS,
    PARAM_NAMES,
    EnsembleStats,
    EstimationProblem,
    FitResult,
    ForwardConfig,
    ObservationSet,
    candidate_params,
    fit_constrained,
    fit_lsq,
    generate_synthetic,
    linear_lsq_estimate,
    observation_times,
    penalized_objective,
    predict_positions,
    residual_ss,
)
from .svgplot import (
    Series,
    line_plot,
)

__version__ = "0.1.0"

__all__ = [
    "ASSUMED_DEFAULTS",
    "attractiveness",
    "candidate_params",
    "ConfigError",
    "CONSTRAINED_BOUNDS",
    "critical_diameter",
    "Derivative",
    "DimensionlessCoeffs",
    "DomainError",
    "EnsembleStats",
    "EstimationProblem",
    "film_temperature",
    "FireflyConfig",
    "fit_constrained",
    "fit_lsq",
    "FitResult",
    "FORWARD_FAILURE_PENALTY",
    "ForwardConfig",
    "friction_factor",
    "generate_synthetic",
    "integrate_path",
    "interfacial_mass_flux",
    "KELVIN_OFFSET",
    "LAMINAR_RE_LIMIT",
    "LEVY_S_MIN",
    "levy_step",
    "line_plot",
    "linear_lsq_estimate",
    "LOOSE_BOUNDS",
    "model_field",
    "move_firefly",
    "NOISE_KINDS",
    "nondim_coeffs",
    "ObjectiveEvaluationError",
    "observation_times",
    "ObservationSet",
    "optimize",
    "OptimizeResult",
    "PARAM_NAMES",
    "penalized_objective",
    "PhysicalParams",
    "plug_mass",
    "plug_position_lncosh",
    "plug_velocity_lncosh",
    "predict_positions",
    "RankDeficiencyError",
    "residual_ss",
    "rhs",
    "Series",
    "simulate",
    "State",
    "STATE_FIELDS",
    "STATIC_FRICTION_FACTOR",
    "STATUS_COMPLETED",
    "STATUS_EARLY_STOP",
    "step_rk4",
    "Swarm",
    "Trajectory",
    "vapor_pressure",
    "wall_shear",
    "wong_rhs",
    "yuan_rhs",
    "__version__",
]
