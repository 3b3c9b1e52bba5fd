import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from compressible.distributions import DistributionModel, parse_distribution
from compressible.errors import DomainError
from compressible.instance_opt import (
    KAPPA0,
    io_constant,
    kernel_basis,
    nsp_ratio,
    robust_nsp_check,
    trivial_guarantee_test,
    weak_boundary,
)
from compressible.metrics import g_fun
from compressible.simulation import gaussian_encoder


def test_io_constant_examples():
    assert io_constant(0) == 2.0
    assert io_constant(1 / 3) == pytest.approx(4.0, rel=1e-15)
    assert io_constant(1) == math.inf
    assert io_constant(2.5) == math.inf
    with pytest.raises(DomainError):
        io_constant(-0.1)


@given(st.floats(0, 0.999), st.floats(0, 0.999))
def test_io_constant_increasing(a, b):
    if a < b:
        assert io_constant(a) < io_constant(b)
    assert io_constant(a) >= 2.0


def test_laplace_trivial_at_kappa0():
    res = trivial_guarantee_test(DistributionModel.laplace())
    g1 = 1 - KAPPA0 * (1 + math.log(1 / KAPPA0))
    assert res.g1_at_kappa0 == pytest.approx(g1, abs=1e-9)
    assert res.g1_at_kappa0 == pytest.approx(0.5113, abs=1e-4)
    assert res.trivial_at_kappa0 is True
    assert res.weak_boundary_delta0 == pytest.approx(0.18, abs=0.01)
    assert res.to_dict()["kappa0"] == 0.18


def test_laplace_weak_boundary_closed_form():
    d0 = weak_boundary(DistributionModel.laplace())
    assert d0 * (1 + math.log(1 / d0)) == pytest.approx(0.5, abs=1e-9)


def test_heavy_tail_report_matches_quadrature():
    d = parse_distribution("ts:1:2.5")
    res = trivial_guarantee_test(d)
    t = d.folded_isf(KAPPA0)
    num, _ = integrate.quad(lambda x: x * d.folded_pdf(x), 0, t, limit=200)
    den = d.absolute_moment(1).value
    assert res.g1_at_kappa0 == pytest.approx(num / den, rel=1e-6)
    assert res.trivial_at_kappa0 is False


@pytest.mark.parametrize("spec", ["laplace", "ggd:0.7", "ggd:2", "ts:1:2.5", "ts:2:4", "pzero"])
def test_assessment_invariants(spec):
    res = trivial_guarantee_test(parse_distribution(spec))
    assert 0.0 <= res.g1_at_kappa0 <= 1.0
    assert res.trivial_at_kappa0 == (res.g1_at_kappa0 >= 0.5)
    if res.weak_boundary_delta0 is not None:
        assert abs(g_fun(parse_distribution(spec), 1, res.weak_boundary_delta0) - 0.5) < 1e-6


@pytest.mark.parametrize("base, scaled", [("laplace", "laplace:7.5"), ("ggd:0.7", "ggd:0.7:5"), ("ts:1:2.5", "ts:1:2.5:8")])
def test_scale_invariance(base, scaled):
    a = trivial_guarantee_test(parse_distribution(base))
    b = trivial_guarantee_test(parse_distribution(scaled))
    assert a.trivial_at_kappa0 == b.trivial_at_kappa0
    assert a.g1_at_kappa0 == pytest.approx(b.g1_at_kappa0, abs=1e-7)


def test_nsp_ratio_basics():
    assert nsp_ratio([3, -1, 1], 1) == pytest.approx(1.5)
    assert nsp_ratio([1, 2], 0) == 0.0
    assert nsp_ratio([1, 2], 2) == math.inf


def test_kernel_basis_orthonormal():
    phi = gaussian_encoder(20, 50, 2)
    b = kernel_basis(phi)
    assert b.shape == (50, 30)
    assert np.allclose(phi.entries @ b, 0, atol=1e-12)
    assert np.allclose(b.T @ b, np.eye(30), atol=1e-12)


def test_nsp_k_zero_vacuous():
    res = robust_nsp_check(gaussian_encoder(20, 50, 0), 0.5, 0)
    assert res.holds_so_far and res.worst_ratio == 0.0


def test_nsp_large_k_falsified():
    n, m = 100, 40
    res = robust_nsp_check(gaussian_encoder(m, n, 1), 1.0, n - m - 5, n_directions=1000, seed=3)
    assert not res.holds_so_far
    assert res.worst_ratio >= 1.0


def test_nsp_one_dimensional_kernel_exact():
    n = 12
    phi = gaussian_encoder(n - 1, n, 4)
    z = kernel_basis(phi)[:, 0]
    exact = nsp_ratio(z, 1)
    res = robust_nsp_check(phi, 100.0, 1, n_directions=50, seed=1)
    # every draw is a multiple of z, and the ratio is scale free
    assert res.worst_ratio == pytest.approx(exact, rel=1e-12)
    assert res.holds_so_far
    assert robust_nsp_check(phi, exact * 0.999, 1, n_directions=1).holds_so_far is False


def test_nsp_deterministic():
    phi = gaussian_encoder(30, 80, 9)
    a = robust_nsp_check(phi, 10.0, 5, n_directions=300, seed=2)
    b = robust_nsp_check(phi, 10.0, 5, n_directions=300, seed=2)
    assert a == b and a.directions == 300
