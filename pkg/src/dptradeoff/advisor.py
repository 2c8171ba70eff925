"""Turns acceptability answers or utility targets into a mechanism choice.

Two entry points: privacy_first filters mechanism families by what failure
modes the caller can tolerate and then solves the privacy parameter against a
risk target; utility_first fixes the statistical reliability first and asks
for the smallest privacy parameter that preserves it. Every intermediate
number lands in the recommendation's rationale so the choice can be audited.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from scipy.special import ndtri

from .errors import ConfigurationError, UnsatisfiableTargetError
from .risk import DEFAULT_ALPHA0_GRID, RiskProfile, attack_power, relative_risk, relative_risk_at, risk_profile
from .tradeoff import (
    KIND_DP_BOUND,
    KIND_GAUSSIAN,
    KIND_LAPLACE,
    KIND_UNIFORM_SAMPLING,
    MechanismSpec,
    dp_bound,
    gaussian,
    laplace,
    tradeoff_curve,
    tradeoff_eval,
    uniform_sampling,
)
from .utility import (
    UtilityModel,
    mu_min_power_floor,
    mu_min_relative_beta,
    power_at,
    sigma_n,
    type_ii_error,
)

# Families ordered by guarantee strength: bounded posterior gain first, then
# graceful tail growth, then catastrophic leaks. Within the bounded families
# the concrete Laplace mechanism beats the worst-case dp-bound envelope.
FAMILY_ORDER: Tuple[str, ...] = (
    KIND_LAPLACE,
    KIND_DP_BOUND,
    KIND_GAUSSIAN,
    KIND_UNIFORM_SAMPLING,
)

_BOUNDED_FAMILIES = frozenset({KIND_LAPLACE, KIND_DP_BOUND})

UNINFORMATIVE_WARNING = (
    "the requested target is met only by an uninformative release (privacy parameter 0)"
)


@dataclass(frozen=True)
class RiskTarget:
    """Exactly one of: a cap on the odds-gain ratio rho, or a cap on attack power.

    at_alpha0 scopes the cap to one attacker confidence level; without it a
    rho cap constrains the supremum over all levels.
    """

    max_relative_risk: Optional[float] = None
    max_power: Optional[float] = None
    at_alpha0: Optional[float] = None

    def __post_init__(self) -> None:
        given = [x for x in (self.max_relative_risk, self.max_power) if x is not None]
        if len(given) != 1:
            raise ConfigurationError(
                "risk target requires exactly one of max_relative_risk / max_power"
            )
        if self.max_relative_risk is not None:
            r = self.max_relative_risk
            if math.isnan(r) or math.isinf(r) or r <= 0.0:
                raise ConfigurationError(f"max_relative_risk must be finite and > 0, got {r}")
        if self.max_power is not None:
            p = self.max_power
            if math.isnan(p) or not 0.0 < p <= 1.0:
                raise ConfigurationError(f"max_power must be in (0, 1], got {p}")
            if self.at_alpha0 is None:
                raise ConfigurationError("max_power requires at_alpha0")
        if self.at_alpha0 is not None:
            a = self.at_alpha0
            if math.isnan(a) or not 0.0 < a < 1.0:
                raise ConfigurationError(f"at_alpha0 must be in (0, 1), got {a}")

    def to_dict(self) -> dict:
        return {
            "max_relative_risk": self.max_relative_risk,
            "max_power": self.max_power,
            "at_alpha0": self.at_alpha0,
        }


@dataclass(frozen=True)
class PrivacyFirstAnswers:
    """The questionnaire: which failure modes are acceptable, plus the target."""

    allow_blatant: bool
    allow_arbitrary_confidence: bool
    risk_target: RiskTarget
    prefer_kind: Optional[str] = None

    def __post_init__(self) -> None:
        for name in ("allow_blatant", "allow_arbitrary_confidence"):
            if not isinstance(getattr(self, name), bool):
                raise ConfigurationError(f"{name} must be a boolean")
        if self.prefer_kind is not None and self.prefer_kind not in FAMILY_ORDER:
            raise ConfigurationError(
                f"prefer_kind must be one of {list(FAMILY_ORDER)}, got {self.prefer_kind!r}"
            )

    def to_dict(self) -> dict:
        return {
            "allow_blatant": self.allow_blatant,
            "allow_arbitrary_confidence": self.allow_arbitrary_confidence,
            "risk_target": self.risk_target.to_dict(),
            "prefer_kind": self.prefer_kind,
        }


@dataclass(frozen=True)
class ReliabilityTarget:
    """Exactly one of: relative Type II inflation cap, or an absolute power floor."""

    rel_beta_tol: Optional[float] = None
    power_floor: Optional[float] = None

    def __post_init__(self) -> None:
        given = [x for x in (self.rel_beta_tol, self.power_floor) if x is not None]
        if len(given) != 1:
            raise ConfigurationError(
                "reliability target requires exactly one of rel_beta_tol / power_floor"
            )
        if self.rel_beta_tol is not None:
            if math.isnan(self.rel_beta_tol) or self.rel_beta_tol < 0.0:
                raise ConfigurationError(
                    f"rel_beta_tol must be >= 0, got {self.rel_beta_tol}"
                )
        if self.power_floor is not None:
            if math.isnan(self.power_floor) or not 0.0 <= self.power_floor <= 1.0:
                raise ConfigurationError(
                    f"power_floor must be in [0, 1], got {self.power_floor}"
                )

    def to_dict(self) -> dict:
        return {"rel_beta_tol": self.rel_beta_tol, "power_floor": self.power_floor}


@dataclass(frozen=True)
class Recommendation:
    """A chosen mechanism plus everything needed to audit the choice."""

    inputs: dict
    admissible: Tuple[str, ...]
    chosen: MechanismSpec
    risk_profile: RiskProfile
    rationale: Tuple[str, ...]
    warnings: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "inputs": self.inputs,
            "admissible": list(self.admissible),
            "chosen": self.chosen.to_dict(),
            "risk_profile": self.risk_profile.to_dict(),
            "rationale": list(self.rationale),
            "warnings": list(self.warnings),
        }


def _solve_pointwise_power(kind: str, alpha0: float, target_power: float) -> float:
    """Parameter at which 1 - f(alpha0) equals target_power, by bisection.

    Power at a fixed level is strictly increasing in the privacy parameter,
    from alpha0 at parameter 0 toward 1 as the parameter grows.
    """
    def build(param: float) -> MechanismSpec:
        if kind == KIND_DP_BOUND:
            return dp_bound(epsilon=param)
        return MechanismSpec(kind=kind, mu=param)

    def achieved(param: float) -> float:
        return 1.0 - tradeoff_eval(build(param), alpha0)

    lo, hi = 0.0, 1.0
    for _ in range(60):
        if achieved(hi) >= target_power:
            break
        hi *= 2.0
    else:
        raise UnsatisfiableTargetError(
            f"no parameter below {hi:g} reaches power {target_power:g} at alpha0 {alpha0:g}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if achieved(mid) >= target_power:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-13 * max(1.0, hi):
            break
    return hi


def _solve_parameter(
    kind: str, target: RiskTarget, n: Optional[int], rationale: list
) -> Tuple[float, list]:
    """Privacy parameter meeting the target for one family; also returns warnings."""
    warns: list = []
    if target.max_relative_risk is not None:
        r = target.max_relative_risk
        if r < 1.0:
            raise UnsatisfiableTargetError(
                f"relative risk below 1 is impossible; every release has rho >= 1 (got {r})"
            )
        if target.at_alpha0 is None:
            if kind not in _BOUNDED_FAMILIES:
                raise UnsatisfiableTargetError(
                    f"{kind!r} has unbounded overall relative risk; "
                    "cap it at a specific level instead"
                )
            param = math.log(r)
            rationale.append(
                f"target rho <= {r:g} overall: {kind} meets it exactly at parameter "
                f"ln({r:g}) = {param:.12g}"
            )
            if r == 1.0:
                warns.append(UNINFORMATIVE_WARNING)
            return param, warns
        alpha0 = target.at_alpha0
        target_power = r * alpha0
        if target_power > 1.0 or (target_power == 1.0 and kind != KIND_UNIFORM_SAMPLING):
            raise UnsatisfiableTargetError(
                f"rho {r:g} at alpha0 {alpha0:g} needs attack power {target_power:g}, "
                "which no mechanism attains"
            )
        if r == 1.0:
            warns.append(UNINFORMATIVE_WARNING)
            rationale.append(
                f"target rho <= 1 at alpha0 {alpha0:g}: only the uninformative release "
                "(parameter 0) achieves it"
            )
            return 0.0, warns
        if kind == KIND_UNIFORM_SAMPLING:
            param = _solve_sampling_leak(target_power - alpha0, n)
            rationale.append(
                f"target rho <= {r:g} at alpha0 {alpha0:g}: sampling leak probability "
                f"{target_power - alpha0:.12g} gives mu = {param:.12g}"
            )
            return param, warns
        param = _solve_pointwise_power(kind, alpha0, target_power)
        rationale.append(
            f"target rho <= {r:g} at alpha0 {alpha0:g}: attack power {target_power:.12g} "
            f"reached at parameter {param:.12g}"
        )
        return param, warns

    assert target.max_power is not None and target.at_alpha0 is not None
    p, alpha0 = target.max_power, target.at_alpha0
    if p < alpha0:
        raise UnsatisfiableTargetError(
            f"attack power can never drop below the level itself: "
            f"max_power {p:g} < alpha0 {alpha0:g}"
        )
    if p == alpha0:
        warns.append(UNINFORMATIVE_WARNING)
        rationale.append(
            f"target power <= alpha0 = {alpha0:g}: only the uninformative release "
            "(parameter 0) achieves it"
        )
        return 0.0, warns
    if kind == KIND_GAUSSIAN:
        param = float(ndtri(1.0 - alpha0) - ndtri(1.0 - p))
        rationale.append(
            f"target power <= {p:g} at alpha0 {alpha0:g}: gaussian closed form "
            f"mu = {param:.12g}"
        )
        return param, warns
    if kind == KIND_UNIFORM_SAMPLING:
        if p == 1.0:
            raise UnsatisfiableTargetError(
                "attack power 1 at a fixed level does not pin down a sampling parameter"
            )
        param = _solve_sampling_leak(p - alpha0, n)
        rationale.append(
            f"target power <= {p:g} at alpha0 {alpha0:g}: sampling leak probability "
            f"{p - alpha0:.12g} gives mu = {param:.12g}"
        )
        return param, warns
    param = _solve_pointwise_power(kind, alpha0, p)
    rationale.append(
        f"target power <= {p:g} at alpha0 {alpha0:g}: reached at parameter {param:.12g}"
    )
    return param, warns


def _solve_sampling_leak(leak: float, n: Optional[int]) -> float:
    """mu with (1 - e^-mu) / n equal to the requested leak probability."""
    if n is None:
        raise ConfigurationError("uniform-sampling targets require the dataset size n")
    scaled = leak * n
    if scaled >= 1.0:
        raise UnsatisfiableTargetError(
            f"leak probability {leak:g} is unreachable with n = {n}; "
            "even mu = inf leaks at most 1/n per release"
        )
    return -math.log1p(-scaled)


def _build_mechanism(
    kind: str, param: float, sensitivity: float, n: Optional[int]
) -> MechanismSpec:
    if kind == KIND_LAPLACE:
        return laplace(mu=param, sensitivity=sensitivity)
    if kind == KIND_GAUSSIAN:
        return gaussian(mu=param, sensitivity=sensitivity)
    if kind == KIND_DP_BOUND:
        return dp_bound(epsilon=param)
    assert kind == KIND_UNIFORM_SAMPLING
    if n is None:
        raise ConfigurationError("uniform-sampling requires the dataset size n")
    return uniform_sampling(mu=param, n=n)


def privacy_first(
    answers: PrivacyFirstAnswers, sensitivity: float = 1.0, n: Optional[int] = None
) -> Recommendation:
    """Pick the strongest admissible family, then solve for its parameter.

    Filtering: refusing blatant leaks excludes uniform sampling; refusing
    arbitrary attacker confidence keeps only families with bounded odds gain.
    A rho target with no level requires the bounded-risk answer, since only
    there is the overall rho finite.
    """
    target = answers.risk_target
    if (
        target.max_relative_risk is not None
        and target.at_alpha0 is None
        and answers.allow_arbitrary_confidence
    ):
        raise ConfigurationError(
            "an overall rho cap is only meaningful when arbitrary attacker confidence "
            "is refused; either refuse it or scope the cap with at_alpha0"
        )
    if not 0.0 < sensitivity < math.inf:
        raise ConfigurationError(f"sensitivity must be finite and > 0, got {sensitivity}")

    rationale: list = []
    admissible = list(FAMILY_ORDER)
    if not answers.allow_blatant:
        admissible.remove(KIND_UNIFORM_SAMPLING)
        rationale.append(
            "blatant leaks refused: excluded uniform-sampling, whose releases can be "
            "certain evidence of membership"
        )
    else:
        rationale.append("blatant leaks accepted: uniform-sampling stays admissible")
    if not answers.allow_arbitrary_confidence:
        admissible = [k for k in admissible if k in _BOUNDED_FAMILIES]
        rationale.append(
            "arbitrary attacker confidence refused: kept only bounded odds-gain "
            f"families {admissible}"
        )
    else:
        rationale.append(
            "arbitrary attacker confidence accepted: unbounded-risk families stay admissible"
        )
    if not admissible:
        raise ConfigurationError("no mechanism family is admissible under these answers")

    if answers.prefer_kind is not None:
        if answers.prefer_kind not in admissible:
            raise ConfigurationError(
                f"preferred kind {answers.prefer_kind!r} is not admissible; "
                f"admissible: {admissible}"
            )
        chosen_kind = answers.prefer_kind
        rationale.append(f"caller preference: {chosen_kind}")
    else:
        chosen_kind = admissible[0]
        rationale.append(
            f"chose {chosen_kind}, the strongest-guarantee admissible family"
        )

    param, warns = _solve_parameter(chosen_kind, target, n, rationale)
    mech = _build_mechanism(chosen_kind, param, sensitivity, n)
    curve = tradeoff_curve(mech)
    profile = risk_profile(curve)
    if target.max_relative_risk is not None and target.at_alpha0 is None:
        achieved = relative_risk(curve)
        rationale.append(f"achieved overall rho = {achieved:.12g}")
    elif target.max_relative_risk is not None:
        achieved = relative_risk_at(curve, target.at_alpha0)
        rationale.append(
            f"achieved rho at alpha0 {target.at_alpha0:g} = {achieved:.12g}"
        )
    else:
        achieved = attack_power(curve, target.at_alpha0)
        rationale.append(
            f"achieved attack power at alpha0 {target.at_alpha0:g} = {achieved:.12g}"
        )
    if profile.failure_class == "catastrophic":
        warns.append(
            "chosen mechanism is catastrophic: some outputs are certain evidence of membership"
        )

    inputs = {
        "mode": "privacy-first",
        "answers": answers.to_dict(),
        "sensitivity": sensitivity,
        "n": n,
    }
    return Recommendation(
        inputs=inputs,
        admissible=tuple(admissible),
        chosen=mech,
        risk_profile=profile,
        rationale=tuple(rationale),
        warnings=tuple(warns),
    )


def utility_first(
    model: UtilityModel,
    reliability: ReliabilityTarget,
    mech_kind: str = KIND_GAUSSIAN,
) -> Recommendation:
    """Smallest privacy parameter that keeps the test reliable, then report risk.

    The power model treats the release noise scale delta_q / mu as one
    Gaussian standard deviation, so gaussian is the exact family here;
    laplace is accepted with a warning because its same-scale noise has
    higher variance.
    """
    if mech_kind not in (KIND_GAUSSIAN, KIND_LAPLACE):
        raise ConfigurationError(
            f"utility-first supports 'gaussian' or 'laplace', got {mech_kind!r}"
        )
    rationale: list = []
    warns: list = []
    base = model.with_mu(math.inf)
    power_base = power_at(base)
    rationale.append(
        f"unprotected test: sigma_n = {sigma_n(base):.12g}, power = {power_base:.12g} "
        f"at alpha0 = {model.alpha0:g}"
    )
    if reliability.rel_beta_tol is not None:
        mu_star = mu_min_relative_beta(model, reliability.rel_beta_tol)
        rationale.append(
            f"smallest mu with Type II inflation <= {reliability.rel_beta_tol:g}: "
            f"mu = {mu_star:.12g}"
        )
    else:
        assert reliability.power_floor is not None
        mu_star = mu_min_power_floor(model, reliability.power_floor)
        rationale.append(
            f"smallest mu with power >= {reliability.power_floor:g}: mu = {mu_star:.12g}"
        )
    protected = model.with_mu(mu_star)
    power_star = power_at(protected)
    beta_base = type_ii_error(base)
    beta_star = type_ii_error(protected)
    rationale.append(
        f"at mu = {mu_star:.12g}: sigma_n = {sigma_n(protected):.12g}, "
        f"power = {power_star:.12g}, Type II error {beta_star:.12g} vs "
        f"unprotected {beta_base:.12g}"
    )
    if mech_kind == KIND_LAPLACE:
        warns.append(
            "power model takes the noise scale as one Gaussian standard deviation; "
            "laplace noise of the same scale has higher variance, so power is optimistic"
        )
    mech = _build_mechanism(mech_kind, mu_star, model.delta_q, None)
    curve = tradeoff_curve(mech)
    profile = risk_profile(curve)
    rho_001 = relative_risk_at(curve, 0.01)
    rationale.append(
        f"membership risk at this mu: failure class {profile.failure_class}, "
        f"rho at alpha0 0.01 = {rho_001:.12g}, attack power at 0.01 = "
        f"{attack_power(curve, 0.01):.12g}"
    )
    inputs = {
        "mode": "utility-first",
        "model": model.to_dict(),
        "reliability": reliability.to_dict(),
        "mech_kind": mech_kind,
    }
    return Recommendation(
        inputs=inputs,
        admissible=(mech_kind,),
        chosen=mech,
        risk_profile=profile,
        rationale=tuple(rationale),
        warnings=tuple(warns),
    )
