"""Statistical utility of a noisy release: power of the one-sided mean test.

The analyst averages n observations with known standard deviation sigma,
the release adds mechanism noise of scale delta_q / mu, and the combined
statistic stays Gaussian with variance sigma^2 / n + delta_q^2 / mu^2. That
closed form drives the power calculations and the minimal-mu solvers; no
simulation happens here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

from scipy.special import ndtr, ndtri

from .errors import (
    BracketExpansionError,
    ConfigurationError,
    DomainError,
    InfeasibleError,
)
from .serialize import UNPROTECTED_SENTINEL, decode_extended, encode_extended

UNPROTECTED = math.inf

# Solver constants: initial bracket, hard expansion limits, mu tolerance.
MU_BRACKET_LO = 1e-4
MU_BRACKET_HI = 1e4
MU_FLOOR = 1e-12
MU_CEIL = 1e12
MU_REL_TOL = 1e-6

CORRECTION_NONE = "none"
CORRECTION_BONFERRONI = "bonferroni"
CORRECTION_BH = "benjamini-hochberg"
_CORRECTIONS = (CORRECTION_NONE, CORRECTION_BONFERRONI, CORRECTION_BH)


@dataclass(frozen=True)
class UtilityModel:
    """Inputs of the noisy one-sided mean test.

    mu = math.inf models the unprotected release (no mechanism noise);
    delta_q is the query sensitivity, (hi - lo) / n for a mean over a public
    data range. m is the alternative mean, m0 the null mean.
    """

    n: int
    sigma: float
    delta_q: float
    m0: float
    m: float
    alpha0: float
    mu: float = UNPROTECTED

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 1:
            raise ConfigurationError(f"n must be an integer >= 1, got {self.n}")
        if not 0.0 < self.sigma < math.inf:
            raise ConfigurationError(f"sigma must be finite and > 0, got {self.sigma}")
        if not 0.0 < self.delta_q < math.inf:
            raise ConfigurationError(f"delta_q must be finite and > 0, got {self.delta_q}")
        for name in ("m0", "m"):
            value = getattr(self, name)
            if math.isnan(value) or math.isinf(value):
                raise ConfigurationError(f"{name} must be a finite real, got {value}")
        if math.isnan(self.alpha0) or not 0.0 < self.alpha0 < 1.0:
            raise ConfigurationError(f"alpha0 must be in (0, 1), got {self.alpha0}")
        if math.isnan(self.mu) or self.mu < 0.0:
            raise ConfigurationError(f"mu must be >= 0 or math.inf, got {self.mu}")

    @classmethod
    def from_data_range(
        cls,
        n: int,
        sigma: float,
        data_range: Tuple[float, float],
        m0: float,
        m: float,
        alpha0: float,
        mu: float = UNPROTECTED,
    ) -> "UtilityModel":
        lo, hi = data_range
        if not lo < hi:
            raise ConfigurationError(f"data range must satisfy lo < hi, got ({lo}, {hi})")
        return cls(n=n, sigma=sigma, delta_q=(hi - lo) / n, m0=m0, m=m, alpha0=alpha0, mu=mu)

    def with_mu(self, mu: float) -> "UtilityModel":
        return replace(self, mu=mu)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "sigma": self.sigma,
            "delta_q": self.delta_q,
            "m0": self.m0,
            "m": self.m,
            "alpha0": self.alpha0,
            "mu": encode_extended(self.mu, UNPROTECTED_SENTINEL),
        }


def utility_model_from_dict(data: dict) -> UtilityModel:
    if not isinstance(data, dict):
        raise ConfigurationError(f"utility model must be an object, got {type(data).__name__}")
    allowed = {"n", "sigma", "delta_q", "m0", "m", "alpha0", "mu"}
    extra = set(data) - allowed
    if extra:
        raise ConfigurationError(f"unknown utility model fields: {sorted(extra)}")
    missing = {"n", "sigma", "delta_q", "m0", "m", "alpha0"} - set(data)
    if missing:
        raise ConfigurationError(f"utility model missing fields: {sorted(missing)}")
    n = data["n"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise ConfigurationError("utility model field 'n' must be an integer")

    def number(name: str) -> float:
        value = data[name]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"utility model field {name!r} must be a number")
        return float(value)

    mu = UNPROTECTED
    if "mu" in data:
        mu = decode_extended(data["mu"], UNPROTECTED_SENTINEL, "mu")
    return UtilityModel(
        n=n,
        sigma=number("sigma"),
        delta_q=number("delta_q"),
        m0=number("m0"),
        m=number("m"),
        alpha0=number("alpha0"),
        mu=mu,
    )


def sigma_n(model: UtilityModel) -> float:
    """Standard deviation of the released mean: sqrt(sigma^2/n + delta_q^2/mu^2)."""
    if model.mu == 0.0:
        raise DomainError("mu = 0 adds infinite noise; the released mean has no finite scale")
    sampling_var = model.sigma ** 2 / model.n
    if math.isinf(model.mu):
        return math.sqrt(sampling_var)
    return math.sqrt(sampling_var + (model.delta_q / model.mu) ** 2)


def _shift(model: UtilityModel) -> float:
    return (model.m - model.m0) / sigma_n(model)


def power_at(model: UtilityModel) -> float:
    """Rejection probability of the one-sided level-alpha0 test at mean m.

    Equals Phi((m - m0) / sigma_n - Phi^-1(1 - alpha0)); both tails are
    evaluated through ndtr directly so deep-tail values do not cancel.
    """
    if not 0.0 < model.alpha0 < 1.0:
        raise DomainError(f"alpha0 must be in (0, 1), got {model.alpha0}")
    if model.m < model.m0:
        raise DomainError(
            f"one-sided test assumes m >= m0, got m={model.m} < m0={model.m0}"
        )
    return float(ndtr(_shift(model) - ndtri(1.0 - model.alpha0)))


def type_ii_error(model: UtilityModel) -> float:
    """Miss probability beta = Phi(Phi^-1(1 - alpha0) - (m - m0) / sigma_n)."""
    if not 0.0 < model.alpha0 < 1.0:
        raise DomainError(f"alpha0 must be in (0, 1), got {model.alpha0}")
    if model.m < model.m0:
        raise DomainError(
            f"one-sided test assumes m >= m0, got m={model.m} < m0={model.m0}"
        )
    return float(ndtr(ndtri(1.0 - model.alpha0) - _shift(model)))


def power_roc(
    model: UtilityModel, alphas: Sequence[float]
) -> Tuple[Tuple[float, float], ...]:
    """Power as a function of the test level; endpoints handled analytically."""
    points = []
    shift = _shift(model)
    for a in alphas:
        a = float(a)
        if math.isnan(a) or not 0.0 <= a <= 1.0:
            raise DomainError(f"alpha must be in [0, 1], got {a}")
        if a == 0.0:
            points.append((a, 0.0))
        elif a == 1.0:
            points.append((a, 1.0))
        else:
            points.append((a, float(ndtr(shift - ndtri(1.0 - a)))))
    return tuple(points)


def power_function(
    model: UtilityModel, m_values: Sequence[float]
) -> Tuple[Tuple[float, float], ...]:
    """Power as a function of the alternative mean m >= m0 at fixed alpha0."""
    return tuple(
        (float(m), power_at(replace(model, m=float(m)))) for m in m_values
    )


def _smallest_mu(satisfied) -> float:
    """Smallest mu with satisfied(mu) true, for predicates monotone in mu.

    Geometric bisection over [MU_BRACKET_LO, MU_BRACKET_HI], expanding to at
    most [MU_FLOOR, MU_CEIL]. Returns the satisfying bracket endpoint, so the
    constraint holds at the result and fails just below it whenever the
    crossing is interior; MU_FLOOR is returned when every probed mu works.
    """
    lo, hi = MU_BRACKET_LO, MU_BRACKET_HI
    if satisfied(lo):
        hi = lo
        while True:
            if hi <= MU_FLOOR:
                return MU_FLOOR
            lo = max(hi / 10.0, MU_FLOOR)
            if not satisfied(lo):
                break
            hi = lo
        if hi <= MU_FLOOR:
            return MU_FLOOR
    else:
        while not satisfied(hi):
            if hi >= MU_CEIL:
                raise BracketExpansionError(
                    f"constraint still violated at mu = {MU_CEIL:g}"
                )
            hi = min(hi * 10.0, MU_CEIL)
    for _ in range(200):
        if hi - lo <= MU_REL_TOL * lo:
            break
        mid = math.sqrt(lo * hi)
        if satisfied(mid):
            hi = mid
        else:
            lo = mid
    return hi


def mu_min_relative_beta(model: UtilityModel, rel_tol: float) -> float:
    """Smallest mu keeping the relative Type II inflation within rel_tol.

    The constraint is (beta_mu - beta_unprotected) / beta_unprotected
    <= rel_tol, where beta is the miss probability at the model's alpha0.
    rel_tol = math.inf accepts any positive mu and returns the solver floor.
    """
    if math.isnan(rel_tol) or rel_tol < 0.0:
        raise DomainError(f"rel_tol must be >= 0, got {rel_tol}")
    if math.isinf(rel_tol):
        return MU_FLOOR
    beta_base = type_ii_error(model.with_mu(UNPROTECTED))
    if beta_base == 0.0:
        raise DomainError(
            "unprotected Type II error underflows to zero; relative inflation undefined"
        )

    def satisfied(mu: float) -> bool:
        beta_mu = type_ii_error(model.with_mu(mu))
        return beta_mu - beta_base <= rel_tol * beta_base

    return _smallest_mu(satisfied)


def mu_min_power_floor(model: UtilityModel, power_floor: float) -> float:
    """Smallest mu keeping test power at or above power_floor."""
    if math.isnan(power_floor) or not 0.0 <= power_floor <= 1.0:
        raise DomainError(f"power_floor must be in [0, 1], got {power_floor}")
    power_base = power_at(model.with_mu(UNPROTECTED))
    if power_floor > power_base:
        raise InfeasibleError(
            f"even the unprotected test has power {power_base:.6g} < floor {power_floor:.6g}"
        )

    def satisfied(mu: float) -> bool:
        return power_at(model.with_mu(mu)) >= power_floor

    return _smallest_mu(satisfied)


@dataclass(frozen=True)
class TestPlan:
    """A family of one-sided mean tests plus a multiplicity correction."""

    __test__ = False  # not a pytest class, despite the name

    correction: str = CORRECTION_NONE
    k: int = 1
    q: Optional[float] = None

    def __post_init__(self) -> None:
        if self.correction not in _CORRECTIONS:
            raise ConfigurationError(
                f"correction must be one of {_CORRECTIONS}, got {self.correction!r}"
            )
        if not isinstance(self.k, int) or isinstance(self.k, bool) or self.k < 1:
            raise ConfigurationError(f"k must be an integer >= 1, got {self.k}")
        if self.correction == CORRECTION_BH:
            if self.q is None or math.isnan(self.q) or not 0.0 < self.q < 1.0:
                raise ConfigurationError(
                    f"benjamini-hochberg requires a target FDR q in (0, 1), got {self.q}"
                )
        elif self.q is not None:
            raise ConfigurationError("q only applies to benjamini-hochberg")


def adjust_level(plan: TestPlan, alpha0: float) -> float:
    """Per-test level after correction: alpha0 / k for Bonferroni."""
    if math.isnan(alpha0) or not 0.0 < alpha0 < 1.0:
        raise DomainError(f"alpha0 must be in (0, 1), got {alpha0}")
    if plan.correction == CORRECTION_NONE:
        return alpha0
    if plan.correction == CORRECTION_BONFERRONI:
        return alpha0 / plan.k
    raise DomainError(
        "benjamini-hochberg is a step-up rule without a single adjusted level; use bh_reject"
    )


def bh_reject(pvalues: Sequence[float], q: float) -> List[bool]:
    """Benjamini-Hochberg step-up: reject p_(i) <= i * q / m up to the largest such i."""
    if math.isnan(q) or not 0.0 < q < 1.0:
        raise DomainError(f"q must be in (0, 1), got {q}")
    values = [float(p) for p in pvalues]
    if not values:
        return []
    for p in values:
        if math.isnan(p) or not 0.0 <= p <= 1.0:
            raise DomainError(f"p-values must lie in [0, 1], got {p}")
    m = len(values)
    order = sorted(range(m), key=lambda i: values[i])
    cutoff = -1.0
    for rank, idx in enumerate(order, start=1):
        if values[idx] <= rank * q / m:
            cutoff = values[idx]
    return [p <= cutoff for p in values]
