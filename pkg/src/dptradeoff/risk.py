"""Membership-attack risk metrics derived from a trade-off curve.

Everything here is deterministic arithmetic on the curve: the Bayes posterior
an attacker reaches from a prior, the failure class of the mechanism, and the
relative disclosure risk rho = sup over alpha of (1 - f(alpha)) / alpha, the
worst-case multiplicative gain on prior odds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .distributions import CdfPair
from .errors import DomainError, IndeterminateUpdateError, NotAnalyzedError, NumericOverflowError
from .serialize import UNBOUNDED_SENTINEL, encode_extended
from .tradeoff import BOUNDED, NOT_ANALYZED, UNBOUNDED, TradeoffCurve

FAILURE_NONE = "none"
FAILURE_GRACEFUL = "graceful"
FAILURE_CATASTROPHIC = "catastrophic"

VERDICT_BOUNDED = "bounded"
VERDICT_DIVERGING = "diverging"
VERDICT_INCONCLUSIVE = "inconclusive"

# Default confidence levels at which profiles report pointwise risk.
DEFAULT_ALPHA0_GRID: Tuple[float, ...] = (0.001, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0)

# Levels probed when curve metadata does not settle boundedness.
PROBE_ALPHAS: Tuple[float, ...] = tuple(10.0 ** -k for k in range(1, 10))

# Stabilization / growth thresholds for the numeric limit probe.
_STABLE_REL_TOL = 1e-3
_GROWTH_PER_DECADE = 1.1


@dataclass(frozen=True)
class BeliefUpdate:
    """One Bayes update: prior, test level, resulting posterior."""

    p_prior: float
    alpha: float
    p_posterior: float


@dataclass(frozen=True)
class TailRatioProbe:
    """Ratios F_bar(F^-1(1-alpha) - mu) / F_bar(F^-1(1-alpha)) along a probe sequence."""

    alphas: Tuple[float, ...]
    ratios: Tuple[float, ...]
    verdict: str


@dataclass(frozen=True)
class RiskProfile:
    """Pointwise and worst-case attack risk for one mechanism."""

    failure_class: str
    rho: float
    rho_at: Tuple[Tuple[float, float], ...]
    attack_power_at: Tuple[Tuple[float, float], ...]

    def to_dict(self) -> dict:
        return {
            "failure_class": self.failure_class,
            "rho": encode_extended(self.rho, UNBOUNDED_SENTINEL),
            "rho_at": [[a, v] for a, v in self.rho_at],
            "attack_power_at": [[a, v] for a, v in self.attack_power_at],
        }


def posterior(p_prior: float, alpha: float, curve: TradeoffCurve) -> float:
    """Posterior membership probability after observing a rejection at level alpha.

    Bayes rule on the optimal attacker: numerator p * (1 - f(alpha)),
    denominator (1 - p) * alpha + p * (1 - f(alpha)). When both vanish the
    update carries no information and no posterior exists.
    """
    if math.isnan(p_prior) or not 0.0 <= p_prior <= 1.0:
        raise DomainError(f"prior must be in [0, 1], got {p_prior}")
    if math.isnan(alpha) or not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must be in [0, 1], got {alpha}")
    power = 1.0 - curve.f(alpha)
    numerator = p_prior * power
    denominator = (1.0 - p_prior) * alpha + numerator
    if denominator == 0.0:
        raise IndeterminateUpdateError(
            "rejection has probability zero under both hypotheses; posterior undefined"
        )
    return numerator / denominator


def posterior_curve(
    curve: TradeoffCurve, p_prior: float, alphas: Sequence[float]
) -> Tuple[BeliefUpdate, ...]:
    return tuple(BeliefUpdate(p_prior, a, posterior(p_prior, a, curve)) for a in alphas)


def _chord_ratio(curve: TradeoffCurve, alpha: float) -> float:
    return (1.0 - curve.f(alpha)) / alpha


def _sequence_verdict(alphas: Sequence[float], ratios: Sequence[float]) -> str:
    """Classify a probe sequence as bounded / diverging / inconclusive.

    Overflowed (non-finite) ratios count as diverging only when the finite
    prefix already grows monotonically; otherwise the probe is unusable.
    """
    finite = []
    for r in ratios:
        if math.isnan(r):
            raise NumericOverflowError("probe ratio is NaN")
        if math.isinf(r):
            break
        finite.append(r)
    overflowed = len(finite) < len(ratios)
    monotone = all(a < b for a, b in zip(finite, finite[1:]))
    if overflowed:
        if len(finite) >= 2 and monotone:
            return VERDICT_DIVERGING
        raise NumericOverflowError(
            "probe ratios overflow without a monotone growth trend"
        )
    if len(finite) >= 3:
        last = finite[-3:]
        lo, hi = min(last), max(last)
        if lo > 0.0 and hi / lo - 1.0 <= _STABLE_REL_TOL:
            return VERDICT_BOUNDED
    if monotone and len(finite) >= 2:
        decades = math.log10(alphas[0] / alphas[-1])
        if decades > 0.0:
            growth = (finite[-1] / finite[0]) ** (1.0 / decades)
            if growth > _GROWTH_PER_DECADE:
                return VERDICT_DIVERGING
    return VERDICT_INCONCLUSIVE


def tail_ratio_probe(
    noise_cdf: CdfPair, mu: float, alphas: Sequence[float] = PROBE_ALPHAS
) -> TailRatioProbe:
    """Probe whether shifted-to-unshifted tail mass ratios stabilize.

    The ratio F_bar(F^-1(1-alpha) - mu) / F_bar(F^-1(1-alpha)) equals
    (1 - f(alpha)) / alpha for log-concave additive noise, so a stabilizing
    sequence certifies a bounded relative disclosure risk and a monotone
    fast-growing one certifies divergence. The denominator is alpha by
    construction and is substituted analytically.
    """
    if math.isnan(mu) or mu < 0.0 or math.isinf(mu):
        raise DomainError(f"mu must be finite and >= 0, got {mu}")
    values = tuple(float(a) for a in alphas)
    if len(values) < 3:
        raise DomainError("probe needs at least three levels")
    for a in values:
        if not 0.0 < a < 0.5:
            raise DomainError(f"probe levels must lie in (0, 0.5), got {a}")
    for hi, lo in zip(values, values[1:]):
        if not hi > lo:
            raise DomainError("probe levels must be strictly decreasing")
    ratios = []
    for a in values:
        numerator = noise_cdf.survival(noise_cdf.quantile(1.0 - a) - mu)
        ratios.append(numerator / a)
    verdict = _sequence_verdict(values, ratios)
    return TailRatioProbe(values, tuple(ratios), verdict)


def _probe_curve(curve: TradeoffCurve) -> TailRatioProbe:
    ratios = tuple(_chord_ratio(curve, a) for a in PROBE_ALPHAS)
    verdict = _sequence_verdict(PROBE_ALPHAS, ratios)
    return TailRatioProbe(PROBE_ALPHAS, ratios, verdict)


def classify_failure(curve: TradeoffCurve) -> str:
    """Failure class under a strong membership attacker.

    catastrophic: some outcomes are certain evidence (f(0) < 1).
    graceful: no certain evidence, but confidence is unbounded in the tail.
    none: the posterior stays bounded away from 1 for every prior.
    """
    if curve.f_at_zero < 1.0:
        return FAILURE_CATASTROPHIC
    kind = curve.risk_bounded.kind
    if kind == BOUNDED:
        return FAILURE_NONE
    if kind == UNBOUNDED:
        return FAILURE_GRACEFUL
    probe = _probe_curve(curve)
    if probe.verdict == VERDICT_BOUNDED:
        return FAILURE_NONE
    if probe.verdict == VERDICT_DIVERGING:
        return FAILURE_GRACEFUL
    raise NotAnalyzedError(
        "curve carries no boundedness metadata and the numeric probe is inconclusive"
    )


def relative_risk(curve: TradeoffCurve) -> float:
    """Worst-case posterior odds gain rho = sup (1 - f(alpha)) / alpha.

    Returns math.inf for curves with unbounded risk; for curves lacking
    metadata the numeric probe supplies an estimate or raises.
    """
    if curve.f_at_zero < 1.0:
        return math.inf
    rb = curve.risk_bounded
    if rb.kind == BOUNDED:
        assert rb.rho is not None
        return rb.rho
    if rb.kind == UNBOUNDED:
        return math.inf
    probe = _probe_curve(curve)
    if probe.verdict == VERDICT_BOUNDED:
        return probe.ratios[-1]
    if probe.verdict == VERDICT_DIVERGING:
        return math.inf
    raise NotAnalyzedError(
        "curve carries no boundedness metadata and the numeric probe is inconclusive"
    )


def relative_risk_at(curve: TradeoffCurve, alpha0: float) -> float:
    """Chord-slope risk (1 - f(alpha0)) / alpha0 at one confidence level.

    At alpha0 = 0 this is the limiting value, which is relative_risk itself
    for convex curves.
    """
    if math.isnan(alpha0) or not 0.0 <= alpha0 <= 1.0:
        raise DomainError(f"alpha0 must be in [0, 1], got {alpha0}")
    if alpha0 == 0.0:
        return relative_risk(curve)
    return _chord_ratio(curve, alpha0)


def attack_power(curve: TradeoffCurve, alpha0: float) -> float:
    """Best attacker true-positive rate 1 - f(alpha0) at level alpha0."""
    if math.isnan(alpha0) or not 0.0 <= alpha0 <= 1.0:
        raise DomainError(f"alpha0 must be in [0, 1], got {alpha0}")
    return 1.0 - curve.f(alpha0)


def risk_profile(
    curve: TradeoffCurve, alpha0_grid: Sequence[float] = DEFAULT_ALPHA0_GRID
) -> RiskProfile:
    """Bundle failure class, rho, and pointwise risk over a level grid."""
    levels = tuple(float(a) for a in alpha0_grid)
    if not levels:
        raise DomainError("alpha0 grid must not be empty")
    for a in levels:
        if math.isnan(a) or not 0.0 < a <= 1.0:
            raise DomainError(f"alpha0 grid values must lie in (0, 1], got {a}")
    for lo, hi in zip(levels, levels[1:]):
        if not lo < hi:
            raise DomainError("alpha0 grid must be strictly increasing")
    return RiskProfile(
        failure_class=classify_failure(curve),
        rho=relative_risk(curve),
        rho_at=tuple((a, relative_risk_at(curve, a)) for a in levels),
        attack_power_at=tuple((a, attack_power(curve, a)) for a in levels),
    )
