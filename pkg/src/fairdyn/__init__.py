"""Two-group selection-policy toolkit: utility-maximizing policies under a
demographic-parity constraint, qualification-profile dynamics in discrete and
continuous time, and numerical verification of the equalization and utility
conditions."""

from ._kernels import BACKEND
from .analysis import (
    ContractionReport,
    Equilibrium,
    EquilibriumAtlas,
    PersistenceRecord,
    StatusQuoReport,
    Theorem2Verdict,
    Theorem4Record,
    check_status_quo_bias,
    delta_bounds,
    estimate_contraction,
    find_equilibria,
    prop3_case_persistence,
    theorem2_verdict,
    theorem4_limits,
    un_map,
)
from .core import (
    Policy,
    PopulationState,
    QualificationProfile,
    SelectionRates,
    UtilitySpec,
    selection_rates,
    utility,
)
from .dynamics import (
    CaseSwitchError,
    DynamicsSpec,
    StepHalvingError,
    TrajectoryRecord,
    affine_dynamics,
    appendix_c_dynamics,
    constant_dynamics,
    ct_gradient,
    ct_integrate,
    cumulative_utility_with_tail,
    dt_step,
    dt_trajectory,
    make_builtin,
    parse_dynamics,
)
from .expr import (
    ArityError,
    ExpressionError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
    compile_expression,
)
from .policy import (
    AACase,
    PolicySolution,
    aa_policy,
    advantaged_group,
    determine_aa_case,
    lp_oracle,
    unconstrained_policy,
)
from .scenario import Scenario, ScenarioError, export_field, run_scenario
from .stereotype import (
    StereotypeSpec,
    StereotypeValidityError,
    effective_policy,
    stereotype_trajectory,
)

__version__ = "1.0.0"

__all__ = [
    "BACKEND",
    "AACase",
    "ArityError",
    "CaseSwitchError",
    "ContractionReport",
    "DynamicsSpec",
    "Equilibrium",
    "EquilibriumAtlas",
    "ExpressionError",
    "ExpressionSyntaxError",
    "PersistenceRecord",
    "Policy",
    "PolicySolution",
    "PopulationState",
    "QualificationProfile",
    "Scenario",
    "ScenarioError",
    "SelectionRates",
    "StatusQuoReport",
    "StepHalvingError",
    "StereotypeSpec",
    "StereotypeValidityError",
    "Theorem2Verdict",
    "Theorem4Record",
    "TrajectoryRecord",
    "UnknownIdentifierError",
    "UtilitySpec",
    "aa_policy",
    "advantaged_group",
    "affine_dynamics",
    "appendix_c_dynamics",
    "check_status_quo_bias",
    "compile_expression",
    "constant_dynamics",
    "ct_gradient",
    "ct_integrate",
    "cumulative_utility_with_tail",
    "delta_bounds",
    "determine_aa_case",
    "dt_step",
    "dt_trajectory",
    "effective_policy",
    "estimate_contraction",
    "export_field",
    "find_equilibria",
    "lp_oracle",
    "make_builtin",
    "parse_dynamics",
    "prop3_case_persistence",
    "run_scenario",
    "selection_rates",
    "stereotype_trajectory",
    "theorem2_verdict",
    "theorem4_limits",
    "un_map",
    "unconstrained_policy",
    "utility",
]
