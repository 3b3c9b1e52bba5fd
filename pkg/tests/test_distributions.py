import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from compressible.distributions import (
    DistributionModel as D,
    Family,
    absolute_moment,
    folded_cdf,
    folded_quantile,
    parse_distribution,
    sample,
)
from compressible.errors import DomainError, SaturationError

from .conftest import ALL_FAMILIES, family_id


def scipy_folded(dist):
    """Folded law of |X| from scipy.stats, as an independent reference."""
    lam = dist.scale
    if dist.family is Family.LAPLACE:
        return stats.expon(scale=lam)
    if dist.family is Family.GGD:
        return stats.halfgennorm(beta=dist.tau, scale=lam)
    if dist.family is Family.TAU_S and dist.tau == 1.0:
        return stats.lomax(c=dist.s - 1.0, scale=lam)
    if dist.family is Family.TAU_S and dist.tau == 2.0:
        nu = dist.s - 1.0
        return stats.halfcauchy if nu == 1 else _HalfT(nu, lam / math.sqrt(nu))
    return None


class _HalfT:
    # (1 + x^2)^(-s/2) is a Student t with s-1 dof rescaled by 1/sqrt(s-1)
    def __init__(self, nu, scale):
        self.t = stats.t(df=nu, scale=scale)

    def cdf(self, x):
        return 2.0 * self.t.cdf(x) - 1.0

    def ppf(self, u):
        return self.t.ppf(0.5 + 0.5 * np.asarray(u))


REFERENCE = [
    D.laplace(),
    D.laplace(3.0),
    D.ggd(0.3),
    D.ggd(0.7, 5.0),
    D.ggd(1.5),
    D.ggd(4.0),
    D.tau_s(1.0, 2.69, 8.0),
    D.tau_s(1.0, 6.0),
    D.tau_s(2.0, 2.64, 4.5),
    D.tau_s(2.0, 5.0),
]


# -- examples -------------------------------------------------------------------


def test_laplace_cdf_at_ln2(laplace):
    assert laplace.folded_cdf(math.log(2.0)) == pytest.approx(0.5, abs=1e-15)


def test_pzero_cdf_at_one(pzero):
    assert pzero.folded_cdf(1.0) == pytest.approx(0.75, abs=1e-15)


def test_pzero_quantile(pzero):
    assert pzero.folded_quantile(0.75) == pytest.approx(1.0, rel=1e-14)


def test_laplace_quantile_is_minus_log_kappa(laplace):
    assert laplace.folded_quantile(0.5) == pytest.approx(math.log(2.0), rel=1e-14)
    for kappa in (0.3, 1e-3, 1e-10):
        assert laplace.folded_isf(kappa) == pytest.approx(-math.log(kappa), rel=1e-13)


def test_zero_maps_to_zero(any_dist):
    assert any_dist.folded_cdf(0.0) == 0.0
    assert any_dist.folded_quantile(0.0) == 0.0


def test_functional_aliases(laplace):
    assert folded_cdf(laplace, 1.0) == laplace.folded_cdf(1.0)
    assert folded_quantile(laplace, 0.2) == laplace.folded_quantile(0.2)
    assert absolute_moment(laplace, 1).value == pytest.approx(1.0)
    assert np.array_equal(sample(laplace, 5, 1), laplace.sample(5, 1))


# -- errors -----------------------------------------------------------------------


def test_negative_t_rejected(laplace):
    with pytest.raises(DomainError):
        laplace.folded_cdf(-0.5)


@pytest.mark.parametrize("u", [-0.1, 1.0, 1.5, float("nan")])
def test_quantile_domain(laplace, u):
    with pytest.raises(DomainError):
        laplace.folded_quantile(u)


@pytest.mark.parametrize("q", [0.0, -1.0])
def test_moment_order_domain(laplace, q):
    with pytest.raises(DomainError):
        laplace.absolute_moment(q)


def test_quantile_saturation():
    with pytest.raises(SaturationError):
        D.tau_s(0.3, 1.01).folded_isf(1e-300)


@pytest.mark.parametrize("bad", [
    lambda: D.ggd(0.0), lambda: D.ggd(-1.0), lambda: D.tau_s(1.0, 1.0),
    lambda: D.tau_s(0.0, 3.0), lambda: D.laplace(0.0), lambda: D.pzero(-2.0),
])
def test_parameter_validation(bad):
    with pytest.raises(DomainError):
        bad()


# -- parsing ----------------------------------------------------------------------


@pytest.mark.parametrize("text, expected", [
    ("laplace", D.laplace()),
    ("LAPLACE:2", D.laplace(2.0)),
    ("ggd:0.7", D.ggd(0.7)),
    ("GGD:0.7:5", D.ggd(0.7, 5.0)),
    ("ts:1:2.69:8", D.tau_s(1.0, 2.69, 8.0)),
    ("Ts:2:2.64", D.tau_s(2.0, 2.64)),
    ("pzero", D.pzero()),
])
def test_parse(text, expected):
    d = parse_distribution(text)
    assert d == expected
    assert parse_distribution(d.spec) == d


@pytest.mark.parametrize("text", ["", "gauss", "ggd", "ggd:a", "ts:1", "ts:1:2:3:4", "laplace:-1", "ts:1:0.5"])
def test_parse_rejects(text):
    with pytest.raises(DomainError):
        parse_distribution(text)


# -- invariants -------------------------------------------------------------------


@pytest.mark.parametrize("dist", ALL_FAMILIES, ids=family_id)
def test_pdf_integrates_to_one(dist):
    lam = dist.scale
    total = sum(
        integrate.quad(lambda x: float(dist.pdf(x)), a, b, limit=400, epsabs=1e-13, epsrel=1e-12)[0]
        for a, b in [(-np.inf, -lam), (-lam, 0.0), (0.0, lam), (lam, np.inf)]
    )
    assert total == pytest.approx(1.0, abs=1e-8)


def test_folded_pdf_definition(any_dist):
    x = np.linspace(0.01, 20.0, 57) * any_dist.scale
    assert np.allclose(any_dist.folded_pdf(x), any_dist.pdf(x) + any_dist.pdf(-x), rtol=1e-14, atol=0)
    assert np.all(any_dist.folded_pdf(-x) == 0.0)


def test_quantile_round_trip(any_dist):
    u = np.linspace(0.01, 0.99, 99)
    t = any_dist.folded_quantile(u)
    assert np.allclose(any_dist.folded_cdf(t), u, rtol=1e-12, atol=1e-14)
    back = any_dist.folded_quantile(any_dist.folded_cdf(t))
    assert np.allclose(back, t, rtol=1e-9)


def test_cdf_strictly_increasing(any_dist):
    hi = any_dist.folded_quantile(1.0 - 1e-9)
    t = np.geomspace(1e-3 * any_dist.scale, hi, 200)
    f = any_dist.folded_cdf(t)
    assert np.all(np.diff(f) > 0)
    assert np.all((f > 0) & (f < 1))
    # the survival function keeps resolving the tail where the CDF rounds to 1
    sf = any_dist.folded_sf(t * 1e3)
    assert np.all(np.diff(sf) <= 0) and np.all(sf + any_dist.folded_cdf(t * 1e3) == pytest.approx(1.0))


@pytest.mark.parametrize("dist", REFERENCE, ids=family_id)
def test_cdf_and_quantile_against_scipy(dist):
    ref = scipy_folded(dist)
    t = np.geomspace(1e-3, 50.0, 80) * dist.scale
    assert np.max(np.abs(dist.folded_cdf(t) - ref.cdf(t))) < 1e-12
    u = np.linspace(0.001, 0.999, 57)
    assert np.allclose(dist.folded_quantile(u), ref.ppf(u), rtol=1e-9)


def test_laplace_closed_cdf_matches_quadrature(laplace):
    t = np.linspace(0.0, 15.0, 100)
    quad = np.array([laplace.quad_cdf(v) for v in t])
    assert np.max(np.abs(laplace.folded_cdf(t) - quad)) < 1e-10


@pytest.mark.parametrize("tau", [0.3, 0.7, 1.0, 2.0, 4.0])
def test_ggd_incomplete_gamma_matches_quadrature(tau):
    d = D.ggd(tau)
    t = d.folded_quantile(np.linspace(0.02, 0.98, 25))
    quad = np.array([integrate.quad(lambda x: float(d.folded_pdf(x)), 0.0, v, epsabs=1e-13, limit=200)[0] for v in t])
    assert np.max(np.abs(d.folded_cdf(t) - quad)) < 1e-8


def test_total_mass_random_parameters():
    rng = np.random.default_rng(11)
    for _ in range(50):
        kind = rng.integers(4)
        lam = float(rng.uniform(0.2, 5.0))
        if kind == 0:
            d = D.laplace(lam)
        elif kind == 1:
            d = D.ggd(float(rng.uniform(0.3, 4.0)), lam)
        elif kind == 2:
            d = D.tau_s(float(rng.uniform(0.5, 3.0)), float(rng.uniform(1.5, 8.0)), lam)
        else:
            d = D.pzero(lam)
        upper = d.folded_quantile(1.0 - 1e-6)
        mass = d.quad_partial_moment(0.0, upper)
        assert 1.0 - 1e-5 <= mass <= 1.0 + 1e-12, d.spec


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(ALL_FAMILIES), st.floats(0, 0.999999), st.floats(0, 0.999999))
def test_quantile_monotone(dist, u1, u2):
    lo, hi = sorted((u1, u2))
    assert dist.folded_quantile(lo) <= dist.folded_quantile(hi)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(ALL_FAMILIES), st.floats(0.1, 10.0), st.floats(0.01, 0.99))
def test_scale_equivariance(dist, lam, u):
    scaled = dist.with_scale(dist.scale * lam)
    assert scaled.folded_quantile(u) == pytest.approx(lam * dist.folded_quantile(u), rel=1e-10)


# -- moments ----------------------------------------------------------------------


def test_laplace_second_moment(laplace):
    m = laplace.absolute_moment(2)
    assert m.value == 2.0 and m.method == "closed_form" and m.finite


def test_laplace_integer_moments_factorial():
    d = D.laplace(1.5)
    for q in range(1, 7):
        assert d.absolute_moment(q).value == pytest.approx(math.factorial(q) * 1.5**q, rel=1e-14)


def test_pzero_unit_second_moment(pzero):
    assert pzero.absolute_moment(2).value == pytest.approx(1.0, rel=1e-14)


def test_tau_s_infinite_variance():
    m = D.tau_s(1.0, 2.5).absolute_moment(2)
    assert m.value == math.inf and m.method == "divergence_rule" and not m.finite


@pytest.mark.parametrize("dist, q, finite", [
    (D.tau_s(1.0, 2.5), 1.4, True),
    (D.tau_s(1.0, 2.5), 1.5, False),
    (D.tau_s(2.0, 6.0), 4.9, True),
    (D.tau_s(2.0, 6.0), 5.0, False),
    (D.pzero(), 3.9, True),
    (D.pzero(), 4.0, False),
    (D.ggd(0.2), 20.0, True),
    (D.laplace(), 100.0, True),
])
def test_tail_exponent_rule(dist, q, finite):
    assert dist.moment_is_finite(q) is finite
    assert dist.absolute_moment(q).finite is finite


def test_moment_overflow_is_saturation():
    d = D.ggd(0.2)
    assert d.moment_is_finite(40.0)
    with pytest.raises(SaturationError):
        d.absolute_moment(40.0)


@pytest.mark.parametrize("dist", ALL_FAMILIES, ids=family_id)
@pytest.mark.parametrize("q", [0.5, 1.0, 1.7])
def test_closed_moments_match_quadrature(dist, q):
    if not dist.moment_is_finite(q):
        pytest.skip("infinite moment")
    closed = dist.absolute_moment(q).value
    quad = dist.absolute_moment(q, method="quadrature")
    assert quad.method == "quadrature"
    assert quad.value == pytest.approx(closed, rel=1e-8)


# -- sampling ---------------------------------------------------------------------


def test_sampling_deterministic(any_dist):
    a = any_dist.sample(1000, 123)
    assert np.array_equal(a, any_dist.sample(1000, 123))
    assert not np.array_equal(a, any_dist.sample(1000, 124))


def test_sampling_symmetric_signs(laplace):
    x = laplace.sample(100_000, 9)
    frac = np.mean(x > 0)
    assert abs(frac - 0.5) < 3 * 0.5 / math.sqrt(x.size)


def test_laplace_mean_abs(laplace):
    x = laplace.sample(100_000, 2)
    # |X| ~ Exp(1): mean 1, sd 1
    assert abs(np.mean(np.abs(x)) - 1.0) < 3.0 / math.sqrt(x.size)


def test_tau_s_sample_median():
    d = D.tau_s(1.0, 2.69, 8.0)
    n = 10_000
    x = np.abs(d.sample(n, 5))
    med = d.folded_quantile(0.5)
    sd = math.sqrt(0.25 / n) / float(d.folded_pdf(med))
    assert abs(np.median(x) - med) < 3 * sd


@pytest.mark.parametrize("dist", ALL_FAMILIES, ids=family_id)
def test_sampler_ks(dist):
    x = np.abs(dist.sample(100_000, 77))
    res = stats.kstest(x, lambda t: dist.folded_cdf(t))
    assert res.pvalue > 0.001
