"""Mechanism recommendation: family gating, parameter solving, round-trips."""

import math

import pytest

from dptradeoff import (
    ConfigurationError,
    InfeasibleError,
    PrivacyFirstAnswers,
    ReliabilityTarget,
    RiskTarget,
    UNINFORMATIVE_WARNING,
    UnsatisfiableTargetError,
    UtilityModel,
    attack_power,
    mu_min_power_floor,
    power_at,
    privacy_first,
    relative_risk,
    relative_risk_at,
    risk_profile,
    tradeoff_curve,
    utility_first,
)
from dptradeoff.serialize import json_text
from dptradeoff.utility import MU_FLOOR


def answers(blatant, arbitrary, target, prefer=None):
    return PrivacyFirstAnswers(
        allow_blatant=blatant,
        allow_arbitrary_confidence=arbitrary,
        risk_target=target,
        prefer_kind=prefer,
    )


# ---------------------------------------------------------------------------
# privacy-first: worked cases
# ---------------------------------------------------------------------------


def test_overall_rho_cap_picks_laplace_at_log_rho():
    rec = privacy_first(answers(False, False, RiskTarget(max_relative_risk=10.0)))
    assert rec.chosen.kind == "laplace"
    assert rec.chosen.mu == pytest.approx(math.log(10.0), abs=1e-12)
    assert rec.admissible == ("laplace", "dp-bound")
    # round-trip: the chosen mechanism re-evaluates to the target
    assert relative_risk(tradeoff_curve(rec.chosen)) == pytest.approx(10.0, rel=1e-6)


def test_power_cap_with_preferred_gaussian():
    rec = privacy_first(
        answers(
            False,
            True,
            RiskTarget(max_power=0.2, at_alpha0=0.01),
            prefer="gaussian",
        )
    )
    assert rec.chosen.kind == "gaussian"
    assert rec.chosen.mu == pytest.approx(1.4847266404679265, abs=1e-10)
    achieved = attack_power(tradeoff_curve(rec.chosen), 0.01)
    assert achieved == pytest.approx(0.2, abs=1e-6)


def test_pointwise_rho_cap_gaussian_round_trip():
    # the chord-slope example inverted: risk 9.2362... at 0.01 needs mu = 1
    rec = privacy_first(
        answers(
            False,
            True,
            RiskTarget(max_relative_risk=9.236224807369409, at_alpha0=0.01),
            prefer="gaussian",
        )
    )
    assert rec.chosen.mu == pytest.approx(1.0, abs=1e-6)
    assert relative_risk_at(tradeoff_curve(rec.chosen), 0.01) == pytest.approx(
        9.236224807369409, rel=1e-6
    )


def test_uninformative_target_yields_mu_zero():
    rec = privacy_first(answers(False, False, RiskTarget(max_relative_risk=1.0)))
    assert rec.chosen.mu == 0.0
    assert UNINFORMATIVE_WARNING in rec.warnings


def test_power_cap_equal_to_level_is_uninformative():
    rec = privacy_first(
        answers(False, True, RiskTarget(max_power=0.05, at_alpha0=0.05), prefer="gaussian")
    )
    assert rec.chosen.mu == 0.0
    assert UNINFORMATIVE_WARNING in rec.warnings


def test_laplace_pointwise_power_round_trip():
    rec = privacy_first(
        answers(False, False, RiskTarget(max_power=0.3, at_alpha0=0.05))
    )
    assert rec.chosen.kind == "laplace"
    assert attack_power(tradeoff_curve(rec.chosen), 0.05) == pytest.approx(
        0.3, abs=1e-6
    )


def test_dp_bound_preferred_solves_epsilon():
    rec = privacy_first(
        answers(False, False, RiskTarget(max_relative_risk=7.0), prefer="dp-bound")
    )
    assert rec.chosen.kind == "dp-bound"
    assert rec.chosen.epsilon == pytest.approx(math.log(7.0), abs=1e-12)
    assert relative_risk(tradeoff_curve(rec.chosen)) == pytest.approx(7.0, rel=1e-6)


def test_uniform_sampling_pointwise_targets():
    # leak probability (R - 1) * alpha0 = 0.05 is well under the 1/n ceiling
    rec = privacy_first(
        answers(
            True,
            True,
            RiskTarget(max_relative_risk=2.0, at_alpha0=0.05),
            prefer="uniform-sampling",
        ),
        n=10,
    )
    assert rec.chosen.kind == "uniform-sampling"
    curve = tradeoff_curve(rec.chosen)
    assert relative_risk_at(curve, 0.05) == pytest.approx(2.0, rel=1e-6)
    # choosing a catastrophic family is flagged
    assert any("catastrophic" in w for w in rec.warnings)

    power_rec = privacy_first(
        answers(
            True,
            True,
            RiskTarget(max_power=0.12, at_alpha0=0.05),
            prefer="uniform-sampling",
        ),
        n=10,
    )
    assert attack_power(tradeoff_curve(power_rec.chosen), 0.05) == pytest.approx(
        0.12, abs=1e-6
    )


# ---------------------------------------------------------------------------
# privacy-first: gating
# ---------------------------------------------------------------------------


def test_admissible_families_per_answer_combo():
    target = RiskTarget(max_power=0.2, at_alpha0=0.01)
    strict = privacy_first(answers(False, False, target))
    no_blatant = privacy_first(answers(False, True, target))
    no_arbitrary = privacy_first(answers(True, False, target))
    everything = privacy_first(answers(True, True, target), n=100)
    assert strict.admissible == ("laplace", "dp-bound")
    assert no_blatant.admissible == ("laplace", "dp-bound", "gaussian")
    # refusing arbitrary confidence already excludes the blatant family
    assert no_arbitrary.admissible == ("laplace", "dp-bound")
    assert everything.admissible == (
        "laplace",
        "dp-bound",
        "gaussian",
        "uniform-sampling",
    )


def test_relaxing_answers_only_grows_the_admissible_set():
    target = RiskTarget(max_power=0.2, at_alpha0=0.01)
    combos = {
        (b, a): set(privacy_first(answers(b, a, target), n=100).admissible)
        for b in (False, True)
        for a in (False, True)
    }
    assert combos[(False, False)] <= combos[(False, True)]
    assert combos[(False, False)] <= combos[(True, False)]
    assert combos[(True, False)] <= combos[(True, True)]
    assert combos[(False, True)] <= combos[(True, True)]


def test_default_choice_is_first_admissible():
    rec = privacy_first(
        answers(True, True, RiskTarget(max_relative_risk=5.0, at_alpha0=0.05)), n=100
    )
    assert rec.chosen.kind == "laplace"


def test_preferred_family_must_be_admissible():
    with pytest.raises(ConfigurationError):
        privacy_first(
            answers(
                False,
                False,
                RiskTarget(max_power=0.2, at_alpha0=0.01),
                prefer="gaussian",
            )
        )
    with pytest.raises(ConfigurationError):
        privacy_first(
            answers(
                False,
                True,
                RiskTarget(max_power=0.2, at_alpha0=0.01),
                prefer="uniform-sampling",
            )
        )


def test_overall_rho_cap_requires_bounded_risk_answer():
    # without a level, a rho cap only means something if overall risk is finite
    with pytest.raises(ConfigurationError):
        privacy_first(answers(False, True, RiskTarget(max_relative_risk=10.0)))


def test_unsatisfiable_targets():
    with pytest.raises(UnsatisfiableTargetError):
        privacy_first(answers(False, False, RiskTarget(max_relative_risk=0.5)))
    with pytest.raises(UnsatisfiableTargetError):
        # requested power above 1 at this level: R * alpha0 > 1
        privacy_first(
            answers(
                False,
                True,
                RiskTarget(max_relative_risk=300.0, at_alpha0=0.01),
                prefer="gaussian",
            )
        )


def test_uniform_sampling_needs_n():
    with pytest.raises(ConfigurationError):
        privacy_first(
            answers(
                True,
                True,
                RiskTarget(max_power=0.25, at_alpha0=0.05),
                prefer="uniform-sampling",
            )
        )


def test_uniform_sampling_infeasible_leak():
    # (R - 1) * alpha0 * n beyond 1 cannot be reached by any mu
    with pytest.raises(UnsatisfiableTargetError):
        privacy_first(
            answers(
                True,
                True,
                RiskTarget(max_relative_risk=30.0, at_alpha0=0.2),
                prefer="uniform-sampling",
            ),
            n=10,
        )


def test_sensitivity_flows_into_the_mechanism():
    rec = privacy_first(
        answers(False, False, RiskTarget(max_relative_risk=10.0)), sensitivity=2.5
    )
    assert rec.chosen.sensitivity == 2.5


# ---------------------------------------------------------------------------
# recommendation payload
# ---------------------------------------------------------------------------


def test_recommendation_reports_consistent_risk_profile():
    rec = privacy_first(answers(False, False, RiskTarget(max_relative_risk=10.0)))
    independent = risk_profile(tradeoff_curve(rec.chosen))
    assert json_text(rec.risk_profile.to_dict()) == json_text(independent.to_dict())


def test_recommendation_serializes_with_inputs_snapshot():
    rec = privacy_first(
        answers(False, True, RiskTarget(max_power=0.2, at_alpha0=0.01), prefer="gaussian"),
        sensitivity=1.0,
    )
    data = rec.to_dict()
    json_text(data)
    assert data["inputs"]["mode"] == "privacy-first"
    assert data["inputs"]["answers"]["risk_target"]["max_power"] == 0.2
    assert list(data.keys()) == [
        "inputs",
        "admissible",
        "chosen",
        "risk_profile",
        "rationale",
        "warnings",
    ]
    assert any("admissible" in line for line in data["rationale"])


# ---------------------------------------------------------------------------
# utility-first
# ---------------------------------------------------------------------------

MODEL = UtilityModel(n=100, sigma=0.25, delta_q=0.01, m0=0.0, m=0.2, alpha0=0.05)


def test_utility_first_power_floor():
    rec = utility_first(MODEL, ReliabilityTarget(power_floor=0.3))
    assert rec.chosen.kind == "gaussian"
    assert rec.admissible == ("gaussian",)
    assert rec.chosen.sensitivity == MODEL.delta_q
    assert rec.chosen.mu == pytest.approx(mu_min_power_floor(MODEL, 0.3), rel=1e-12)
    assert power_at(MODEL.with_mu(rec.chosen.mu)) >= 0.3


def test_utility_first_relative_beta():
    rec = utility_first(MODEL, ReliabilityTarget(rel_beta_tol=0.05))
    assert rec.chosen.mu > 0.0
    profile = risk_profile(tradeoff_curve(rec.chosen))
    assert json_text(rec.risk_profile.to_dict()) == json_text(
        profile.to_dict()
    )
    assert rec.risk_profile.failure_class == "graceful"


def test_utility_first_trivial_floor_is_near_perfect_privacy():
    rec = utility_first(MODEL, ReliabilityTarget(power_floor=MODEL.alpha0))
    assert rec.chosen.mu == MU_FLOOR
    # at mu = 1e-12 the attacker gains essentially nothing
    assert attack_power(tradeoff_curve(rec.chosen), 0.01) == pytest.approx(
        0.01, abs=1e-9
    )


def test_utility_first_infeasible_floor():
    # the unprotected test tops out just below 1 here; certainty is out of reach
    with pytest.raises(InfeasibleError):
        utility_first(MODEL, ReliabilityTarget(power_floor=1.0))


def test_utility_first_laplace_carries_variance_warning():
    rec = utility_first(MODEL, ReliabilityTarget(power_floor=0.3), mech_kind="laplace")
    assert rec.chosen.kind == "laplace"
    assert any("variance" in w for w in rec.warnings)


def test_utility_first_rejects_other_families():
    with pytest.raises(ConfigurationError):
        utility_first(MODEL, ReliabilityTarget(power_floor=0.3), mech_kind="dp-bound")
    with pytest.raises(ConfigurationError):
        utility_first(
            MODEL, ReliabilityTarget(power_floor=0.3), mech_kind="uniform-sampling"
        )


def test_utility_first_inputs_snapshot():
    rec = utility_first(MODEL, ReliabilityTarget(power_floor=0.3))
    data = rec.to_dict()
    assert data["inputs"]["mode"] == "utility-first"
    assert data["inputs"]["model"]["n"] == 100
    assert data["inputs"]["reliability"]["power_floor"] == 0.3
    assert data["inputs"]["mech_kind"] == "gaussian"
    json_text(data)


def test_utility_first_rationale_mentions_the_decision_numbers():
    rec = utility_first(MODEL, ReliabilityTarget(power_floor=0.3))
    text = " ".join(rec.rationale)
    assert "unprotected" in text
    assert "mu" in text


# ---------------------------------------------------------------------------
# answers/target validation
# ---------------------------------------------------------------------------


def test_risk_target_validation():
    with pytest.raises(ConfigurationError):
        RiskTarget()  # no target
    with pytest.raises(ConfigurationError):
        RiskTarget(max_relative_risk=10.0, max_power=0.2, at_alpha0=0.01)  # both
    with pytest.raises(ConfigurationError):
        RiskTarget(max_power=0.2)  # power cap needs a level
    with pytest.raises(ConfigurationError):
        RiskTarget(max_relative_risk=-1.0)
    with pytest.raises(ConfigurationError):
        RiskTarget(max_power=0.2, at_alpha0=1.0)


def test_reliability_target_validation():
    with pytest.raises(ConfigurationError):
        ReliabilityTarget()
    with pytest.raises(ConfigurationError):
        ReliabilityTarget(rel_beta_tol=0.05, power_floor=0.3)
    with pytest.raises(ConfigurationError):
        ReliabilityTarget(power_floor=1.5)


def test_answers_validation():
    with pytest.raises(ConfigurationError):
        PrivacyFirstAnswers(
            allow_blatant="yes",
            allow_arbitrary_confidence=True,
            risk_target=RiskTarget(max_relative_risk=2.0, at_alpha0=0.05),
        )
    with pytest.raises(ConfigurationError):
        answers(True, True, RiskTarget(max_relative_risk=2.0, at_alpha0=0.05), prefer="exotic")
