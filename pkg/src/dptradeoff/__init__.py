"""Decision support for the differential-privacy privacy-utility trade-off.

The package answers two questions about a planned noisy data release: how far
a strong membership attacker can push their confidence (trade-off curves,
posteriors, disclosure risk), and how much statistical power the noise costs
(test power, minimal privacy parameters). A Monte Carlo attack simulator
validates every closed form, and an HTTP service plus CLI expose the engine.
"""

__version__ = "0.1.0"

from .advisor import (
    FAMILY_ORDER,
    UNINFORMATIVE_WARNING,
    PrivacyFirstAnswers,
    Recommendation,
    ReliabilityTarget,
    RiskTarget,
    privacy_first,
    utility_first,
)
from .attacksim import (
    AdjacentScenario,
    AttackRun,
    DegenerateThresholdWarning,
    EmpiricalPoint,
    analytic_operating_point,
    empirical_posterior,
    lr_attack,
    sample_release,
    scenario_from_dict,
    thresholds_for_alphas,
    worst_case_scenario,
    ztest_power_mc,
)
from .distributions import STD_LAPLACE, STD_NORMAL, CdfPair
from .errors import (
    BracketExpansionError,
    ConfigurationError,
    DomainError,
    EngineError,
    IndeterminateUpdateError,
    InfeasibleError,
    NotAnalyzedError,
    NumericOverflowError,
    UnsatisfiableTargetError,
)
from .risk import (
    BeliefUpdate,
    RiskProfile,
    TailRatioProbe,
    attack_power,
    classify_failure,
    posterior,
    posterior_curve,
    relative_risk,
    relative_risk_at,
    risk_profile,
    tail_ratio_probe,
)
from .tradeoff import (
    MechanismSpec,
    RiskBoundedness,
    TradeoffCurve,
    custom_log_concave,
    dp_bound,
    f_at_zero,
    gaussian,
    laplace,
    mechanism_from_dict,
    sampling_leak_probability,
    tradeoff_curve,
    tradeoff_eval,
    uniform_sampling,
)
from .utility import (
    MU_CEIL,
    MU_FLOOR,
    TestPlan,
    UtilityModel,
    adjust_level,
    bh_reject,
    mu_min_power_floor,
    mu_min_relative_beta,
    power_at,
    power_function,
    power_roc,
    sigma_n,
    type_ii_error,
    utility_model_from_dict,
)
