"""Monte Carlo membership attacks used to validate the analytic curves.

The simulator plays the strong adversary: it draws releases under both the
without-target and with-target worlds and thresholds the likelihood-ratio
statistic. Randomness is counter-based (Philox): trial i always consumes
counter block i of the stream keyed by (seed, world), so runs are bit
deterministic, order independent and mergeable across batch sizes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from numpy.random import Generator, Philox
from scipy.special import ndtri

from .errors import ConfigurationError, DomainError, IndeterminateUpdateError
from .tradeoff import (
    KIND_DP_BOUND,
    KIND_UNIFORM_SAMPLING,
    NOISE_KINDS,
    MechanismSpec,
    sampling_leak_probability,
)
from .utility import UtilityModel, sigma_n

_MAX_SEED = 2 ** 64

# Trials per vectorized chunk; results do not depend on this value.
_CHUNK = 1 << 18

# Statistic-space category offsets for the sampling mechanism: the released
# symbol is collapsed to how strongly it favors the with-target world, then
# tie-broken uniformly so thresholds can sweep the full ROC.
_CAT_REPLACEMENT = 0.0
_CAT_NEUTRAL = 1.0
_CAT_TARGET = 2.0


class DegenerateThresholdWarning(UserWarning):
    """A threshold produced an empirical false-positive rate of exactly 0 or 1."""


@dataclass(frozen=True)
class AdjacentScenario:
    """One pair of adjacent worlds: same data except for the target record.

    Noise mechanisms release query_value_without or query_value_with plus
    noise. Uniform sampling releases a record from record_pool or the dummy
    symbol; record_pool lists the n - 1 shared records, then the target,
    then the replacement record that takes the target's slot in the
    without-target world.
    """

    mech: MechanismSpec
    query_value_without: Optional[float] = None
    query_value_with: Optional[float] = None
    record_pool: Optional[Tuple[float, ...]] = None

    def __post_init__(self) -> None:
        mech = self.mech
        if mech.kind == KIND_DP_BOUND:
            raise ConfigurationError(
                "dp-bound is an analytic envelope, not a samplable mechanism"
            )
        if mech.kind in NOISE_KINDS:
            if self.query_value_without is None or self.query_value_with is None:
                raise ConfigurationError(
                    f"{mech.kind!r} scenarios require both query values"
                )
            for name in ("query_value_without", "query_value_with"):
                value = getattr(self, name)
                if math.isnan(value) or math.isinf(value):
                    raise ConfigurationError(f"{name} must be finite, got {value}")
            gap = abs(self.query_value_with - self.query_value_without)
            if gap > mech.sensitivity:
                raise ConfigurationError(
                    f"query value gap {gap:g} exceeds sensitivity {mech.sensitivity:g}"
                )
            if self.record_pool is not None:
                raise ConfigurationError(
                    f"record_pool only applies to {KIND_UNIFORM_SAMPLING!r}"
                )
            return
        # uniform-sampling
        if self.query_value_without is not None or self.query_value_with is not None:
            raise ConfigurationError(
                "uniform-sampling releases records, not query values"
            )
        if self.record_pool is None:
            raise ConfigurationError("uniform-sampling scenarios require record_pool")
        pool = tuple(float(x) for x in self.record_pool)
        assert mech.n is not None
        if len(pool) != mech.n + 1:
            raise ConfigurationError(
                f"record_pool must hold n + 1 = {mech.n + 1} records "
                f"(n - 1 shared, target, replacement), got {len(pool)}"
            )
        for x in pool:
            if math.isnan(x) or math.isinf(x):
                raise ConfigurationError(f"records must be finite, got {x}")
        if len(set(pool)) != len(pool):
            raise ConfigurationError("records must be pairwise distinct")
        object.__setattr__(self, "record_pool", pool)

    def to_dict(self) -> dict:
        out: dict = {"mech": self.mech.to_dict()}
        if self.mech.kind in NOISE_KINDS:
            out["query_value_without"] = self.query_value_without
            out["query_value_with"] = self.query_value_with
        else:
            out["record_pool"] = list(self.record_pool or ())
        return out


def scenario_from_dict(data: dict) -> AdjacentScenario:
    from .tradeoff import mechanism_from_dict

    if not isinstance(data, dict):
        raise ConfigurationError(f"scenario must be an object, got {type(data).__name__}")
    allowed = {"mech", "query_value_without", "query_value_with", "record_pool"}
    extra = set(data) - allowed
    if extra:
        raise ConfigurationError(f"unknown scenario fields: {sorted(extra)}")
    if "mech" not in data:
        raise ConfigurationError("scenario requires a 'mech' object")
    mech = mechanism_from_dict(data["mech"])

    def number(name: str) -> Optional[float]:
        value = data.get(name)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"scenario field {name!r} must be a number")
        return float(value)

    pool = data.get("record_pool")
    if pool is not None:
        if not isinstance(pool, (list, tuple)):
            raise ConfigurationError("record_pool must be a list of numbers")
        pool = tuple(
            float(x)
            for x in pool
            if not isinstance(x, bool) and isinstance(x, (int, float))
        )
        if len(pool) != len(data["record_pool"]):
            raise ConfigurationError("record_pool must be a list of numbers")
    return AdjacentScenario(
        mech=mech,
        query_value_without=number("query_value_without"),
        query_value_with=number("query_value_with"),
        record_pool=pool,
    )


def worst_case_scenario(mech: MechanismSpec) -> AdjacentScenario:
    """The adversary's best case: adjacent values a full sensitivity apart."""
    if mech.kind in NOISE_KINDS:
        return AdjacentScenario(
            mech=mech,
            query_value_without=0.0,
            query_value_with=mech.sensitivity,
        )
    if mech.kind == KIND_UNIFORM_SAMPLING:
        assert mech.n is not None
        return AdjacentScenario(
            mech=mech, record_pool=tuple(float(i) for i in range(1, mech.n + 2))
        )
    raise ConfigurationError(
        "dp-bound is an analytic envelope, not a samplable mechanism"
    )


@dataclass(frozen=True)
class EmpiricalPoint:
    """One threshold's empirical operating point with binomial standard errors."""

    threshold: float
    alpha_hat: float
    power_hat: float
    alpha_se: float
    power_se: float

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "alpha_hat": self.alpha_hat,
            "power_hat": self.power_hat,
            "alpha_se": self.alpha_se,
            "power_se": self.power_se,
        }


@dataclass(frozen=True)
class AttackRun:
    """Result of thresholding the attack statistic over many simulated trials."""

    trials: int
    seed: int
    thresholds: Tuple[float, ...]
    points: Tuple[EmpiricalPoint, ...]

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "seed": self.seed,
            "thresholds": list(self.thresholds),
            "points": [p.to_dict() for p in self.points],
        }


def _validate_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise DomainError(f"seed must be an integer, got {seed!r}")
    if not 0 <= seed < _MAX_SEED:
        raise DomainError(f"seed must be in [0, 2^64), got {seed}")
    return seed


def _uniform_blocks(seed: int, with_target: bool, start: int, count: int) -> np.ndarray:
    """count x 4 uniforms; trial i always maps to counter block start + i."""
    key = np.array([seed, 1 if with_target else 0], dtype=np.uint64)
    counter = np.array([start, 0, 0, 0], dtype=np.uint64)
    gen = Generator(Philox(key=key, counter=counter))
    u = gen.random(4 * count)
    return u.reshape(count, 4)


def _noise_from_uniforms(mech: MechanismSpec, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF noise draws at the mechanism's scale."""
    scale = mech.noise_scale()
    if scale == 0.0:
        return np.zeros_like(u)
    if math.isinf(scale):
        return np.where(u < 0.5, -np.inf, np.inf)
    handle = mech.noise_handle()
    if handle.name == "normal":
        return ndtri(np.maximum(u, 2.0 ** -53)) * scale
    if handle.name == "laplace":
        u = np.maximum(u, 2.0 ** -53)
        return np.where(
            u < 0.5, np.log(2.0 * u), -np.log(2.0 * np.maximum(1.0 - u, 2.0 ** -53))
        ) * scale
    quantile = np.vectorize(handle.quantile, otypes=[float])
    return quantile(np.maximum(u, 2.0 ** -53)) * scale


def _sampling_indices(mech: MechanismSpec, u: np.ndarray) -> np.ndarray:
    """Map uniforms to released slots: -1 dummy, 0..n-2 shared, n-1 swapped slot."""
    assert mech.mu is not None and mech.n is not None
    dummy_mass = math.exp(-mech.mu) if not math.isinf(mech.mu) else 0.0
    if dummy_mass >= 1.0:
        return np.full(u.shape, -1, dtype=np.int64)
    scaled = (u - dummy_mass) / (1.0 - dummy_mass) * mech.n
    idx = np.clip(scaled.astype(np.int64), 0, mech.n - 1)
    return np.where(u < dummy_mass, -1, idx)


def _orientation(scenario: AdjacentScenario) -> float:
    gap = (scenario.query_value_with or 0.0) - (scenario.query_value_without or 0.0)
    return -1.0 if gap < 0 else 1.0


def _statistics(
    scenario: AdjacentScenario, with_target: bool, seed: int, start: int, count: int
) -> np.ndarray:
    """Attack statistic for trials [start, start + count), oriented so that
    larger values favor the with-target world."""
    mech = scenario.mech
    u = _uniform_blocks(seed, with_target, start, count)
    if mech.kind in NOISE_KINDS:
        center = (
            scenario.query_value_with if with_target else scenario.query_value_without
        )
        released = center + _noise_from_uniforms(mech, u[:, 0])
        return _orientation(scenario) * released
    idx = _sampling_indices(mech, u[:, 0])
    assert mech.n is not None
    swapped = mech.n - 1
    category = np.full(count, _CAT_NEUTRAL)
    if with_target:
        category[idx == swapped] = _CAT_TARGET
    else:
        category[idx == swapped] = _CAT_REPLACEMENT
    return category + u[:, 1]


def sample_release(
    scenario: AdjacentScenario, with_target: bool, seed: int, trial_index: int = 0
) -> Union[float, str]:
    """One released output: a noisy value, a record, or the dummy symbol."""
    _validate_seed(seed)
    if not isinstance(trial_index, int) or trial_index < 0:
        raise DomainError(f"trial_index must be an integer >= 0, got {trial_index}")
    mech = scenario.mech
    u = _uniform_blocks(seed, with_target, trial_index, 1)
    if mech.kind in NOISE_KINDS:
        center = (
            scenario.query_value_with if with_target else scenario.query_value_without
        )
        return float(center + _noise_from_uniforms(mech, u[:, 0])[0])
    idx = int(_sampling_indices(mech, u[:, 0])[0])
    if idx < 0:
        return mech.dummy_symbol
    assert scenario.record_pool is not None and mech.n is not None
    if idx < mech.n - 1:
        return scenario.record_pool[idx]
    # slot n-1 holds the target with it present, the replacement without
    return scenario.record_pool[mech.n - 1 if with_target else mech.n]


def lr_attack(
    scenario: AdjacentScenario,
    trials: int,
    thresholds: Sequence[float],
    seed: int,
) -> AttackRun:
    """Empirical ROC of 'claim the target is present when statistic > threshold'.

    For noise mechanisms the statistic is the released value (oriented), which
    is a monotone transform of the likelihood ratio; for uniform sampling it
    is the tie-broken evidence category. Identical inputs give bit-identical
    results regardless of internal batching.
    """
    _validate_seed(seed)
    if isinstance(trials, bool) or not isinstance(trials, int) or trials < 1:
        raise DomainError(f"trials must be an integer >= 1, got {trials}")
    phis = tuple(float(t) for t in thresholds)
    if not phis:
        raise DomainError("at least one threshold is required")
    for phi in phis:
        if math.isnan(phi):
            raise DomainError("thresholds must not be NaN")
    phi_arr = np.array(phis)
    reject_without = np.zeros(len(phis), dtype=np.int64)
    reject_with = np.zeros(len(phis), dtype=np.int64)
    start = 0
    while start < trials:
        count = min(_CHUNK, trials - start)
        t0 = _statistics(scenario, False, seed, start, count)
        t1 = _statistics(scenario, True, seed, start, count)
        reject_without += (t0[:, None] > phi_arr[None, :]).sum(axis=0)
        reject_with += (t1[:, None] > phi_arr[None, :]).sum(axis=0)
        start += count
    points = []
    for j, phi in enumerate(phis):
        alpha_hat = int(reject_without[j]) / trials
        power_hat = int(reject_with[j]) / trials
        if alpha_hat in (0.0, 1.0):
            warnings.warn(
                f"threshold {phi:g} gives empirical alpha_hat = {alpha_hat:g}; "
                "the operating point is degenerate at this trial count",
                DegenerateThresholdWarning,
                stacklevel=2,
            )
        points.append(
            EmpiricalPoint(
                threshold=phi,
                alpha_hat=alpha_hat,
                power_hat=power_hat,
                alpha_se=math.sqrt(alpha_hat * (1.0 - alpha_hat) / trials),
                power_se=math.sqrt(power_hat * (1.0 - power_hat) / trials),
            )
        )
    return AttackRun(trials=trials, seed=seed, thresholds=phis, points=tuple(points))


def empirical_posterior(run: AttackRun, p_prior: float, threshold_index: int) -> float:
    """Plug empirical rates into the Bayes update at one threshold."""
    if math.isnan(p_prior) or not 0.0 <= p_prior <= 1.0:
        raise DomainError(f"prior must be in [0, 1], got {p_prior}")
    if not isinstance(threshold_index, int) or not 0 <= threshold_index < len(run.points):
        raise DomainError(
            f"threshold_index must be in [0, {len(run.points)}), got {threshold_index}"
        )
    point = run.points[threshold_index]
    numerator = p_prior * point.power_hat
    denominator = (1.0 - p_prior) * point.alpha_hat + numerator
    if denominator == 0.0:
        raise IndeterminateUpdateError(
            "zero denominator: no rejections were observed under either world"
        )
    return numerator / denominator


def _sampling_masses(mech: MechanismSpec, with_target: bool) -> Tuple[float, float, float]:
    """Probability mass of (replacement, neutral, target) categories."""
    leak = sampling_leak_probability(mech)
    if with_target:
        return 0.0, 1.0 - leak, leak
    return leak, 1.0 - leak, 0.0


def analytic_operating_point(
    scenario: AdjacentScenario, threshold: float
) -> Tuple[float, float]:
    """Exact (alpha, power) of the statistic > threshold test."""
    if math.isnan(threshold):
        raise DomainError("threshold must not be NaN")
    mech = scenario.mech

    if mech.kind in NOISE_KINDS:
        scale = mech.noise_scale()
        sign = _orientation(scenario)
        handle = mech.noise_handle()

        def tail(center: float) -> float:
            if math.isinf(scale):
                return 0.5
            if scale == 0.0:
                return 1.0 if sign * center > threshold else 0.0
            if sign > 0:
                return handle.survival((threshold - center) / scale)
            return handle.cdf((-threshold - center) / scale)

        return (
            tail(scenario.query_value_without),
            tail(scenario.query_value_with),
        )

    def tail_mass(masses: Tuple[float, float, float]) -> float:
        total = 0.0
        for category, mass in zip((_CAT_REPLACEMENT, _CAT_NEUTRAL, _CAT_TARGET), masses):
            total += mass * min(1.0, max(0.0, category + 1.0 - threshold))
        return total

    return (
        tail_mass(_sampling_masses(mech, False)),
        tail_mass(_sampling_masses(mech, True)),
    )


def thresholds_for_alphas(
    scenario: AdjacentScenario, alphas: Sequence[float]
) -> Tuple[float, ...]:
    """Statistic-space thresholds whose exact false-positive rate is alpha."""
    mech = scenario.mech
    out = []
    for a in alphas:
        a = float(a)
        if math.isnan(a) or not 0.0 <= a <= 1.0:
            raise DomainError(f"alpha must be in [0, 1], got {a}")
        if mech.kind in NOISE_KINDS:
            scale = mech.noise_scale()
            if math.isinf(scale):
                raise DomainError("mu = 0 has a flat ROC; no threshold attains this alpha")
            if scale == 0.0:
                raise DomainError("mu = inf is deterministic; no threshold attains this alpha")
            if not 0.0 < a < 1.0:
                raise DomainError(f"alpha must be in (0, 1) for noise mechanisms, got {a}")
            sign = _orientation(scenario)
            v0 = scenario.query_value_without
            handle = mech.noise_handle()
            if sign > 0:
                out.append(v0 + scale * handle.quantile(1.0 - a))
            else:
                out.append(-(v0 + scale * handle.quantile(a)))
            continue
        replacement_mass, neutral_mass, _ = _sampling_masses(mech, False)
        if a <= neutral_mass:
            out.append(
                _CAT_NEUTRAL + 1.0 - (a / neutral_mass if neutral_mass > 0.0 else 0.0)
            )
        else:
            if replacement_mass == 0.0:
                raise DomainError(f"no threshold attains alpha = {a}")
            out.append(_CAT_REPLACEMENT + 1.0 - (a - neutral_mass) / replacement_mass)
    return tuple(out)


def ztest_power_mc(model: UtilityModel, trials: int, seed: int) -> float:
    """End-to-end Monte Carlo power of the noisy one-sided mean test.

    Draws n observations per trial, averages them, adds Gaussian mechanism
    noise at scale delta_q / mu, and applies the level-alpha0 Z-test. This is
    the independent oracle for the closed-form power.
    """
    _validate_seed(seed)
    if isinstance(trials, bool) or not isinstance(trials, int) or trials < 1:
        raise DomainError(f"trials must be an integer >= 1, got {trials}")
    if model.mu == 0.0:
        raise DomainError("mu = 0 adds infinite noise; the released mean has no finite scale")
    key = np.array([seed, 0], dtype=np.uint64)
    gen = Generator(Philox(key=key))
    scale = 0.0 if math.isinf(model.mu) else model.delta_q / model.mu
    critical = float(ndtri(1.0 - model.alpha0))
    sd = sigma_n(model)
    rejected = 0
    remaining = trials
    chunk = max(1, min(_CHUNK, 10_000_000 // (model.n + 1)))
    while remaining > 0:
        count = min(chunk, remaining)
        draws = gen.standard_normal((count, model.n + 1))
        means = model.m + model.sigma * draws[:, : model.n].mean(axis=1)
        released = means + scale * draws[:, model.n]
        z = (released - model.m0) / sd
        rejected += int(np.count_nonzero(z > critical))
        remaining -= count
    return rejected / trials
