"""Trade-off curves for differentially private mechanisms.

A trade-off curve f maps a membership test's false-positive rate alpha to the
smallest achievable false-negative rate beta against an adversary who knows
everything except the target record's presence. Smaller f means a stronger
attacker, so curves closer to the diagonal beta = 1 - alpha are safer.

Closed forms are used for the built-in mechanism families; arbitrary
log-concave additive noise is supported through a CDF handle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from scipy.special import ndtr, ndtri

from .distributions import CdfPair, STD_LAPLACE, STD_NORMAL
from .errors import ConfigurationError, DomainError

KIND_LAPLACE = "laplace"
KIND_GAUSSIAN = "gaussian"
KIND_UNIFORM_SAMPLING = "uniform-sampling"
KIND_DP_BOUND = "dp-bound"
KIND_CUSTOM = "custom-log-concave"

KINDS = frozenset(
    {KIND_LAPLACE, KIND_GAUSSIAN, KIND_UNIFORM_SAMPLING, KIND_DP_BOUND, KIND_CUSTOM}
)

# Noise-addition families: release = query value + scaled unit noise.
NOISE_KINDS = frozenset({KIND_LAPLACE, KIND_GAUSSIAN, KIND_CUSTOM})

BOUNDED = "bounded"
UNBOUNDED = "unbounded"
NOT_ANALYZED = "not-analyzed"

# exp(mu) overflows IEEE doubles past this point; treat the bound as unusable.
_EXP_OVERFLOW = 709.0

_CONVEXITY_TOL = 1e-9


@dataclass(frozen=True)
class RiskBoundedness:
    """Whether the posterior-gain ratio (1 - f(alpha)) / alpha stays bounded."""

    kind: str
    rho: Optional[float] = None

    @classmethod
    def bounded(cls, rho: float) -> "RiskBoundedness":
        return cls(BOUNDED, rho)

    @classmethod
    def unbounded(cls) -> "RiskBoundedness":
        return cls(UNBOUNDED)

    @classmethod
    def not_analyzed(cls) -> "RiskBoundedness":
        return cls(NOT_ANALYZED)

    def to_dict(self) -> dict:
        if self.kind == BOUNDED:
            return {"kind": BOUNDED, "rho": self.rho}
        return {"kind": self.kind}


@dataclass(frozen=True)
class MechanismSpec:
    """Parameters of one privacy mechanism.

    kind selects the family; the other fields are family specific and must be
    provided exactly when the family uses them:

    - "laplace", "gaussian": mu (privacy parameter) and sensitivity.
    - "uniform-sampling": mu, n (dataset size); releases one record or a
      dummy symbol, never adds noise.
    - "dp-bound": epsilon and delta; the worst-case envelope any
      (epsilon, delta) mechanism must respect, not a samplable mechanism.
    - "custom-log-concave": mu, sensitivity and a noise_cdf handle for
      zero-mean unit-scale log-concave noise. Log-concavity is the caller's
      asserted responsibility; only convexity of the resulting curve is
      audited on a grid.
    """

    kind: str
    mu: Optional[float] = None
    sensitivity: float = 1.0
    n: Optional[int] = None
    epsilon: Optional[float] = None
    delta: Optional[float] = None
    noise_cdf: Optional[CdfPair] = None
    dummy_symbol: str = "c"

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConfigurationError(
                f"unknown mechanism kind {self.kind!r}; expected one of {sorted(KINDS)}"
            )
        if self.kind == KIND_DP_BOUND:
            if self.mu is not None:
                raise ConfigurationError("dp-bound takes epsilon/delta, not mu")
            if self.epsilon is None:
                raise ConfigurationError("dp-bound requires epsilon")
            if not (0.0 <= self.epsilon < math.inf):
                raise ConfigurationError(f"epsilon must be finite and >= 0, got {self.epsilon}")
            delta = 0.0 if self.delta is None else self.delta
            if not 0.0 <= delta <= 1.0:
                raise ConfigurationError(f"delta must be in [0, 1], got {delta}")
            object.__setattr__(self, "delta", float(delta))
        else:
            if self.epsilon is not None or self.delta is not None:
                raise ConfigurationError(f"epsilon/delta only apply to {KIND_DP_BOUND!r}")
            if self.mu is None:
                raise ConfigurationError(f"{self.kind!r} requires mu")
            if math.isnan(self.mu) or self.mu < 0.0:
                raise ConfigurationError(f"mu must be >= 0, got {self.mu}")
        if self.kind == KIND_UNIFORM_SAMPLING:
            if self.n is None:
                raise ConfigurationError("uniform-sampling requires the dataset size n")
            if not isinstance(self.n, int) or self.n < 1:
                raise ConfigurationError(f"n must be an integer >= 1, got {self.n}")
        elif self.n is not None:
            raise ConfigurationError(f"n only applies to {KIND_UNIFORM_SAMPLING!r}")
        if self.kind == KIND_CUSTOM:
            if self.noise_cdf is None:
                raise ConfigurationError("custom-log-concave requires a noise_cdf handle")
        elif self.noise_cdf is not None:
            raise ConfigurationError(f"noise_cdf only applies to {KIND_CUSTOM!r}")
        if self.kind in NOISE_KINDS:
            if not 0.0 < self.sensitivity < math.inf:
                raise ConfigurationError(
                    f"sensitivity must be finite and > 0, got {self.sensitivity}"
                )

    def noise_handle(self) -> CdfPair:
        """The unit-scale noise distribution for noise-addition kinds."""
        if self.kind == KIND_LAPLACE:
            return STD_LAPLACE
        if self.kind == KIND_GAUSSIAN:
            return STD_NORMAL
        if self.kind == KIND_CUSTOM:
            assert self.noise_cdf is not None
            return self.noise_cdf
        raise ConfigurationError(f"{self.kind!r} does not add noise")

    def noise_scale(self) -> float:
        """Unit-noise multiplier sensitivity / mu for noise-addition kinds."""
        if self.kind not in NOISE_KINDS:
            raise ConfigurationError(f"{self.kind!r} does not add noise")
        assert self.mu is not None
        if self.mu == 0.0:
            return math.inf
        return self.sensitivity / self.mu

    def to_dict(self) -> dict:
        """JSON-ready dict with exactly the family's fields."""
        out: dict = {"kind": self.kind}
        if self.kind == KIND_DP_BOUND:
            out["epsilon"] = self.epsilon
            out["delta"] = self.delta
            return out
        if self.mu is None or math.isinf(self.mu):
            raise ConfigurationError("mechanism with non-finite mu is not serializable")
        out["mu"] = self.mu
        if self.kind == KIND_UNIFORM_SAMPLING:
            out["n"] = self.n
            return out
        if self.kind == KIND_CUSTOM:
            raise ConfigurationError(
                "custom-log-concave carries a CDF handle and is not serializable"
            )
        out["sensitivity"] = self.sensitivity
        return out


def mechanism_from_dict(data: dict) -> MechanismSpec:
    """Parse the mechanism JSON object used by the service and the CLI."""
    if not isinstance(data, dict):
        raise ConfigurationError(f"mechanism must be an object, got {type(data).__name__}")
    allowed = {"kind", "mu", "sensitivity", "n", "epsilon", "delta"}
    extra = set(data) - allowed
    if extra:
        raise ConfigurationError(f"unknown mechanism fields: {sorted(extra)}")
    kind = data.get("kind")
    if not isinstance(kind, str):
        raise ConfigurationError("mechanism requires a string 'kind'")
    if kind == KIND_CUSTOM:
        raise ConfigurationError("custom-log-concave mechanisms cannot be sent as JSON")

    def number(name: str) -> Optional[float]:
        value = data.get(name)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"mechanism field {name!r} must be a number")
        return float(value)

    n = data.get("n")
    if n is not None:
        if isinstance(n, bool) or not isinstance(n, int):
            raise ConfigurationError("mechanism field 'n' must be an integer")
    kwargs: dict = {
        "kind": kind,
        "mu": number("mu"),
        "n": n,
        "epsilon": number("epsilon"),
        "delta": number("delta"),
    }
    sensitivity = number("sensitivity")
    if sensitivity is not None:
        kwargs["sensitivity"] = sensitivity
    return MechanismSpec(**kwargs)


def laplace(mu: float, sensitivity: float = 1.0) -> MechanismSpec:
    return MechanismSpec(kind=KIND_LAPLACE, mu=mu, sensitivity=sensitivity)


def gaussian(mu: float, sensitivity: float = 1.0) -> MechanismSpec:
    return MechanismSpec(kind=KIND_GAUSSIAN, mu=mu, sensitivity=sensitivity)


def uniform_sampling(mu: float, n: int) -> MechanismSpec:
    return MechanismSpec(kind=KIND_UNIFORM_SAMPLING, mu=mu, n=n)


def dp_bound(epsilon: float, delta: float = 0.0) -> MechanismSpec:
    return MechanismSpec(kind=KIND_DP_BOUND, epsilon=epsilon, delta=delta)


def custom_log_concave(
    mu: float, noise_cdf: CdfPair, sensitivity: float = 1.0
) -> MechanismSpec:
    return MechanismSpec(
        kind=KIND_CUSTOM, mu=mu, sensitivity=sensitivity, noise_cdf=noise_cdf
    )


def sampling_leak_probability(mech: MechanismSpec) -> float:
    """Probability that uniform-sampling releases a real record, (1 - e^-mu) / n."""
    if mech.kind != KIND_UNIFORM_SAMPLING:
        raise ConfigurationError("leak probability only applies to uniform-sampling")
    assert mech.mu is not None and mech.n is not None
    return -math.expm1(-mech.mu) / mech.n


def f_at_zero(mech: MechanismSpec) -> float:
    """Analytic limit of the trade-off curve at alpha = 0."""
    if mech.kind == KIND_UNIFORM_SAMPLING:
        return 1.0 - sampling_leak_probability(mech)
    if mech.kind == KIND_DP_BOUND:
        assert mech.delta is not None
        return 1.0 - mech.delta
    assert mech.mu is not None
    if math.isinf(mech.mu):
        return 0.0
    return 1.0


def tradeoff_eval(mech: MechanismSpec, alpha: float) -> float:
    """Evaluate the trade-off curve f(alpha) for one mechanism.

    Endpoints are handled analytically so no quantile is ever taken at 0 or 1.
    """
    if math.isnan(alpha) or not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must be in [0, 1], got {alpha}")
    if alpha == 0.0:
        return f_at_zero(mech)
    if alpha == 1.0:
        return 0.0

    if mech.kind == KIND_UNIFORM_SAMPLING:
        return max(0.0, 1.0 - sampling_leak_probability(mech) - alpha)

    if mech.kind == KIND_DP_BOUND:
        assert mech.epsilon is not None and mech.delta is not None
        eps, delta = mech.epsilon, mech.delta
        if eps > _EXP_OVERFLOW:
            return max(0.0, math.exp(-eps) * (1.0 - delta - alpha))
        return max(
            0.0,
            1.0 - delta - math.exp(eps) * alpha,
            math.exp(-eps) * (1.0 - delta - alpha),
        )

    assert mech.mu is not None
    mu = mech.mu
    if mu == 0.0:
        return 1.0 - alpha
    if math.isinf(mu):
        return 0.0

    if mech.kind == KIND_LAPLACE:
        half_tail = 0.5 * math.exp(-mu)
        if alpha < half_tail:
            return 1.0 - math.exp(mu) * alpha
        if alpha <= 0.5:
            return math.exp(-mu) / (4.0 * alpha)
        return math.exp(-mu) * (1.0 - alpha)

    if mech.kind == KIND_GAUSSIAN:
        return float(ndtr(ndtri(1.0 - alpha) - mu))

    handle = mech.noise_handle()
    return handle.cdf(handle.quantile(1.0 - alpha) - mu)


@dataclass(frozen=True)
class TradeoffCurve:
    """A trade-off curve plus the metadata downstream risk analysis needs.

    points is the optional (alpha, beta) sample produced when a grid was
    supplied; f itself remains exact and can be evaluated anywhere.
    """

    f: Callable[[float], float]
    f_at_zero: float
    convex: bool
    risk_bounded: RiskBoundedness
    mech: Optional[MechanismSpec] = None
    points: Optional[tuple] = field(default=None, compare=False)


def _risk_boundedness(mech: MechanismSpec) -> RiskBoundedness:
    if mech.kind == KIND_DP_BOUND:
        assert mech.epsilon is not None and mech.delta is not None
        if mech.delta > 0.0:
            return RiskBoundedness.unbounded()
        if mech.epsilon > _EXP_OVERFLOW:
            return RiskBoundedness.unbounded()
        return RiskBoundedness.bounded(math.exp(mech.epsilon))
    assert mech.mu is not None
    if mech.mu == 0.0:
        return RiskBoundedness.bounded(1.0)
    if mech.kind == KIND_LAPLACE:
        if mech.mu > _EXP_OVERFLOW:
            return RiskBoundedness.unbounded()
        return RiskBoundedness.bounded(math.exp(mech.mu))
    if mech.kind in (KIND_GAUSSIAN, KIND_UNIFORM_SAMPLING):
        return RiskBoundedness.unbounded()
    return RiskBoundedness.not_analyzed()


def _validate_grid(grid: Sequence[float]) -> tuple:
    values = tuple(float(a) for a in grid)
    if not values:
        raise DomainError("alpha grid must not be empty")
    for a in values:
        if math.isnan(a) or not 0.0 <= a <= 1.0:
            raise DomainError(f"grid values must lie in [0, 1], got {a}")
    for lo, hi in zip(values, values[1:]):
        if not lo < hi:
            raise DomainError("alpha grid must be strictly increasing")
    return values


def _audit_convexity(f: Callable[[float], float], grid: Sequence[float]) -> bool:
    values = [f(a) for a in grid]
    for (x0, y0), (x1, y1), (x2, y2) in zip(
        zip(grid, values), zip(grid[1:], values[1:]), zip(grid[2:], values[2:])
    ):
        lam = (x1 - x0) / (x2 - x0)
        if y1 > (1.0 - lam) * y0 + lam * y2 + _CONVEXITY_TOL:
            return False
    return True


_DEFAULT_AUDIT_GRID = tuple(i / 256.0 for i in range(257))


def tradeoff_curve(
    mech: MechanismSpec, grid: Optional[Sequence[float]] = None
) -> TradeoffCurve:
    """Build the trade-off curve for a mechanism, sampling it when a grid is given.

    Built-in families are convex by construction; custom curves get a grid
    convexity audit instead of a symbolic proof.
    """
    points = None
    if grid is not None:
        alphas = _validate_grid(grid)
        points = tuple((a, tradeoff_eval(mech, a)) for a in alphas)

    if mech.kind == KIND_CUSTOM:
        audit_grid = [a for a, _ in points] if points else list(_DEFAULT_AUDIT_GRID)
        if len(audit_grid) < 3:
            audit_grid = list(_DEFAULT_AUDIT_GRID)
        convex = _audit_convexity(lambda a: tradeoff_eval(mech, a), audit_grid)
    else:
        convex = True

    return TradeoffCurve(
        f=lambda a: tradeoff_eval(mech, a),
        f_at_zero=f_at_zero(mech),
        convex=convex,
        risk_bounded=_risk_boundedness(mech),
        mech=mech,
        points=points,
    )
