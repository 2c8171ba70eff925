"""Trade-off curves: frozen values, closed forms vs independent oracles, validation."""

import math

import pytest
from scipy.special import ndtr, ndtri

from dptradeoff import (
    ConfigurationError,
    DomainError,
    CdfPair,
    MechanismSpec,
    STD_LAPLACE,
    STD_NORMAL,
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

ALPHAS = [1e-6, 1e-3, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0 - 1e-6]


# ---------------------------------------------------------------------------
# frozen point values
# ---------------------------------------------------------------------------


def test_laplace_frozen_value():
    # alpha below e^-mu / 2: beta = 1 - e^mu * alpha
    assert tradeoff_eval(laplace(1.0), 0.1) == pytest.approx(
        0.7281718171540954, abs=1e-15
    )


def test_laplace_middle_branch():
    # e^-mu / 2 <= alpha <= 1/2: beta = e^-mu / (4 alpha)
    mu = 1.0
    alpha = 0.3
    assert tradeoff_eval(laplace(mu), alpha) == pytest.approx(
        math.exp(-mu) / (4.0 * alpha), abs=1e-15
    )


def test_laplace_upper_branch_symmetry():
    # alpha > 1/2: beta = e^-mu (1 - alpha)
    mu = 2.0
    assert tradeoff_eval(laplace(mu), 0.8) == pytest.approx(
        math.exp(-mu) * 0.2, abs=1e-15
    )


def test_gaussian_frozen_value():
    assert tradeoff_eval(gaussian(1.0), 0.05) == pytest.approx(
        0.7404889771585558, abs=1e-15
    )


def test_gaussian_matches_normal_cdf_identity():
    for mu in (0.1, 1.0, 2.5):
        for alpha in ALPHAS:
            expected = float(ndtr(ndtri(1.0 - alpha) - mu))
            assert tradeoff_eval(gaussian(mu), alpha) == pytest.approx(
                expected, abs=1e-14
            )


def test_uniform_sampling_frozen_value_at_zero():
    mech = uniform_sampling(1.0, 5)
    assert f_at_zero(mech) == pytest.approx(0.8735758882342884, abs=1e-15)
    assert tradeoff_eval(mech, 0.0) == f_at_zero(mech)


def test_sampling_leak_probability():
    assert sampling_leak_probability(uniform_sampling(1.0, 5)) == pytest.approx(
        (1.0 - math.exp(-1.0)) / 5.0, abs=1e-16
    )
    assert sampling_leak_probability(uniform_sampling(0.0, 7)) == 0.0


def test_dp_bound_frozen_value():
    assert tradeoff_eval(dp_bound(math.log(2.0)), 0.25) == pytest.approx(0.5, abs=1e-15)


def test_dp_bound_with_delta():
    eps, delta = 0.5, 0.01
    alpha = 0.1
    expected = max(
        0.0,
        1.0 - delta - math.exp(eps) * alpha,
        math.exp(-eps) * (1.0 - delta - alpha),
    )
    assert tradeoff_eval(dp_bound(eps, delta), alpha) == pytest.approx(
        expected, abs=1e-15
    )
    assert f_at_zero(dp_bound(eps, delta)) == pytest.approx(1.0 - delta, abs=1e-15)


# ---------------------------------------------------------------------------
# degenerate parameters
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "mech",
    [
        laplace(0.0),
        gaussian(0.0),
        uniform_sampling(0.0, 5),
        dp_bound(0.0),
        custom_log_concave(0.0, STD_NORMAL),
    ],
)
def test_mu_zero_is_uninformative(mech):
    # perfect privacy: f(alpha) = 1 - alpha regardless of family
    for alpha in ALPHAS:
        assert tradeoff_eval(mech, alpha) == pytest.approx(1.0 - alpha, abs=1e-15)
    assert f_at_zero(mech) == 1.0


@pytest.mark.parametrize("mech", [laplace(math.inf), gaussian(math.inf)])
def test_mu_infinite_noise_is_unprotected(mech):
    for alpha in ALPHAS:
        assert tradeoff_eval(mech, alpha) == 0.0
    assert f_at_zero(mech) == 0.0


def test_mu_infinite_sampling_saturates_at_leak_one_over_n():
    # always release a record: the target leaks with probability exactly 1/n
    mech = uniform_sampling(math.inf, 3)
    assert sampling_leak_probability(mech) == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert f_at_zero(mech) == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert tradeoff_eval(mech, 0.3) == pytest.approx(1.0 - 1.0 / 3.0 - 0.3, abs=1e-15)


def test_curve_endpoints():
    for mech in (laplace(1.0), gaussian(1.0), uniform_sampling(1.0, 5), dp_bound(1.0)):
        assert tradeoff_eval(mech, 1.0) == 0.0


# ---------------------------------------------------------------------------
# independent oracles
# ---------------------------------------------------------------------------


def test_laplace_piecewise_equals_generic_form():
    # the piecewise evaluation must agree with F(F^-1(1 - alpha) - mu)
    for mu in (0.1, 1.0, 2.5):
        mech = laplace(mu)
        for alpha in ALPHAS:
            generic = STD_LAPLACE.cdf(STD_LAPLACE.quantile(1.0 - alpha) - mu)
            assert abs(tradeoff_eval(mech, alpha) - generic) < 1e-10


def test_custom_normal_handle_equals_gaussian():
    mech = custom_log_concave(1.0, STD_NORMAL)
    for alpha in ALPHAS:
        assert tradeoff_eval(mech, alpha) == pytest.approx(
            tradeoff_eval(gaussian(1.0), alpha), abs=1e-12
        )


def _np_beta_discrete(outcomes, alpha):
    """Brute-force Neyman-Pearson Type II error over a discrete outcome space.

    outcomes: list of (p_without, p_with) pairs. Orders outcomes by likelihood
    ratio (with/without, descending) and fills the rejection region with
    randomized tie-splitting until its mass under 'without' reaches alpha.
    """
    def ratio(pair):
        p0, p1 = pair
        return math.inf if p0 == 0.0 else p1 / p0

    power = 0.0
    spent = 0.0
    for p0, p1 in sorted(outcomes, key=ratio, reverse=True):
        if spent + p0 <= alpha:
            spent += p0
            power += p1
        else:
            frac = (alpha - spent) / p0 if p0 > 0.0 else 0.0
            power += frac * p1
            break
    return 1.0 - power


@pytest.mark.parametrize("mu,n", [(0.5, 3), (1.0, 5), (2.5, 2), (0.1, 10)])
def test_uniform_sampling_matches_brute_force_neyman_pearson(mu, n):
    mech = uniform_sampling(mu, n)
    stay = math.exp(-mu)
    per_record = (1.0 - stay) / n
    outcomes = [(stay, stay)]  # dummy symbol
    outcomes += [(per_record, per_record)] * (n - 1)  # shared records
    outcomes += [(0.0, per_record), (per_record, 0.0)]  # target / replacement
    for alpha in [0.0, 1e-4, 0.01, 0.05, 0.1, 0.3, 0.5, 0.8, 0.95, 1.0]:
        assert tradeoff_eval(mech, alpha) == pytest.approx(
            _np_beta_discrete(outcomes, alpha), abs=1e-12
        )


# ---------------------------------------------------------------------------
# structural invariants
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "factory",
    [laplace, gaussian, lambda mu: uniform_sampling(mu, 5), lambda mu: dp_bound(mu)],
)
def test_stronger_privacy_dominates(factory):
    # smaller mu -> pointwise higher curve
    for alpha in ALPHAS:
        lo = tradeoff_eval(factory(0.5), alpha)
        hi = tradeoff_eval(factory(1.5), alpha)
        assert lo >= hi - 1e-15


def test_curve_bounded_by_blind_test():
    for mech in (laplace(1.0), gaussian(1.0), uniform_sampling(1.0, 5), dp_bound(1.0)):
        for alpha in ALPHAS:
            beta = tradeoff_eval(mech, alpha)
            assert 0.0 <= beta <= 1.0 - alpha + 1e-15


def test_laplace_dominates_dp_bound_at_equal_epsilon():
    # the pure-DP envelope never lies above the actual Laplace curve
    for mu in (0.1, 1.0, 2.5):
        for alpha in ALPHAS:
            assert tradeoff_eval(laplace(mu), alpha) >= tradeoff_eval(
                dp_bound(mu), alpha
            ) - 1e-15


def test_alpha_out_of_range():
    for bad in (-0.1, 1.1, math.nan):
        with pytest.raises(DomainError):
            tradeoff_eval(laplace(1.0), bad)


# ---------------------------------------------------------------------------
# curve objects
# ---------------------------------------------------------------------------


def test_tradeoff_curve_metadata():
    curve = tradeoff_curve(laplace(1.0))
    assert curve.convex is True
    assert curve.f_at_zero == 1.0
    assert curve.risk_bounded.kind == "bounded"
    assert curve.risk_bounded.rho == pytest.approx(math.e, abs=1e-12)
    assert curve.f(0.1) == pytest.approx(0.7281718171540954, abs=1e-15)


def test_curve_boundedness_by_family():
    assert tradeoff_curve(gaussian(1.0)).risk_bounded.kind == "unbounded"
    assert tradeoff_curve(uniform_sampling(1.0, 5)).risk_bounded.kind == "unbounded"
    assert tradeoff_curve(dp_bound(0.7)).risk_bounded.rho == pytest.approx(
        math.exp(0.7)
    )
    assert tradeoff_curve(dp_bound(0.7, 0.01)).risk_bounded.kind == "unbounded"
    custom = tradeoff_curve(custom_log_concave(1.0, STD_NORMAL))
    assert custom.risk_bounded.kind == "not-analyzed"


def test_mu_zero_is_bounded_for_every_family():
    # f = 1 - alpha makes the chord ratio identically 1
    for mech in (gaussian(0.0), uniform_sampling(0.0, 5), laplace(0.0), dp_bound(0.0)):
        bounded = tradeoff_curve(mech).risk_bounded
        assert bounded.kind == "bounded"
        assert bounded.rho == 1.0


def test_convexity_audit_flags_non_log_concave_noise():
    def mix_cdf(x):
        return 0.5 * ndtr((x + 3.0) / 0.5) + 0.5 * ndtr((x - 3.0) / 0.5)

    def mix_quantile(u):
        lo, hi = -30.0, 30.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mix_cdf(mid) < u:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    bimodal = CdfPair("bimodal", mix_cdf, mix_quantile)
    assert tradeoff_curve(custom_log_concave(1.0, bimodal)).convex is False
    assert tradeoff_curve(custom_log_concave(1.0, STD_NORMAL)).convex is True


def test_curve_points_follow_supplied_grid():
    grid = (0.0, 0.25, 0.5, 1.0)
    curve = tradeoff_curve(laplace(1.0), grid)
    assert tuple(a for a, _ in curve.points) == grid
    for a, b in curve.points:
        assert b == tradeoff_eval(laplace(1.0), a)


def test_curve_grid_validation():
    with pytest.raises(DomainError):
        tradeoff_curve(laplace(1.0), (0.5, 0.25))  # not increasing
    with pytest.raises(DomainError):
        tradeoff_curve(laplace(1.0), (0.0, 1.5))  # out of range
    with pytest.raises(DomainError):
        tradeoff_curve(laplace(1.0), ())  # empty grid


# ---------------------------------------------------------------------------
# construction and serialization
# ---------------------------------------------------------------------------


def test_mechanism_validation():
    with pytest.raises(ConfigurationError):
        MechanismSpec(kind="triangle", mu=1.0)
    with pytest.raises(ConfigurationError):
        laplace(-1.0)
    with pytest.raises(ConfigurationError):
        laplace(math.nan)
    with pytest.raises(ConfigurationError):
        laplace(1.0, sensitivity=0.0)
    with pytest.raises(ConfigurationError):
        uniform_sampling(1.0, 0)
    with pytest.raises(ConfigurationError):
        MechanismSpec(kind="uniform-sampling", mu=1.0)  # n required
    with pytest.raises(ConfigurationError):
        MechanismSpec(kind="laplace", mu=1.0, n=5)  # n is sampling-only
    with pytest.raises(ConfigurationError):
        MechanismSpec(kind="dp-bound", mu=1.0, epsilon=1.0)
    with pytest.raises(ConfigurationError):
        dp_bound(1.0, delta=1.5)
    with pytest.raises(ConfigurationError):
        custom_log_concave(1.0, None)


def test_noise_scale():
    assert laplace(2.0, sensitivity=3.0).noise_scale() == 1.5
    assert gaussian(0.0).noise_scale() == math.inf
    assert gaussian(math.inf).noise_scale() == 0.0


def test_mechanism_round_trip():
    for mech in (
        laplace(1.25, sensitivity=0.5),
        gaussian(2.0),
        uniform_sampling(0.7, 9),
        dp_bound(0.3, 0.001),
    ):
        assert mechanism_from_dict(mech.to_dict()) == mech


def test_mechanism_dict_rejects_unknowns():
    data = laplace(1.0).to_dict()
    data["color"] = "blue"
    with pytest.raises(ConfigurationError):
        mechanism_from_dict(data)
    with pytest.raises(ConfigurationError):
        mechanism_from_dict({"kind": "laplace"})  # mu missing
    with pytest.raises(ConfigurationError):
        mechanism_from_dict({"kind": "laplace", "mu": True})  # bool is not a number


def test_custom_mechanism_is_not_serializable():
    with pytest.raises(ConfigurationError):
        custom_log_concave(1.0, STD_NORMAL).to_dict()
