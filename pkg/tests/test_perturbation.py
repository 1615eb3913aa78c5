import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from mltplab import core
from mltplab.errors import HypothesisError
from mltplab.generate import generate_perturbation, generate_random_unital
from mltplab.norms import vector_norm
from mltplab.perturbation import (
    c_m,
    neumann_invert,
    perturbed_inverse_bound,
    perturbed_unit,
    s_factor,
    unit_distance_bound,
)
from mltplab.spectral import invert

ONE = np.ones(1, dtype=complex)


def test_s_factor():
    for r in (0.0, 0.1, 0.5, 0.9):
        assert s_factor(r) == pytest.approx(1 + r / (1 - r), abs=1e-12)
    for bad in (-0.1, 1.0, 2.0):
        with pytest.raises(ValueError):
            s_factor(bad)


# -- constant for the inverse bound ----------------------------------------------


def test_c_m_from_chained_inequalities():
    M, s, d, u = sp.symbols("M s delta u", positive=True)
    r = 1 - 1 / s  # s = 1 + r/(1-r)
    unit_gap = s * M**2 * d  # ||e_d - e_*||
    op_gap = s * M**5 * d  # |l_{d,a}^-1 - l_{*,a}^-1|
    unit_norm = M + unit_gap  # ||e_d||
    chain = op_gap * unit_norm + M**2 * unit_gap  # |l_{*,a}^-1| <= |*| ||a^-1|| <= M^2
    quad = sp.expand(op_gap * unit_gap)
    assert sp.degree(quad, d) == 2
    # the quadratic term is bounded using delta <= r M^-3
    linear = sp.expand(chain - quad + quad / d * r * M**-3)
    claimed = s**2 * (M**6 + 2 * M**4) * d
    slack = sp.expand((claimed - linear).subs(s, 1 + u) / (d * M**4))
    coeffs = sp.Poly(slack, u, M).coeffs()
    assert all(c >= 0 for c in coeffs)
    # the package constant agrees with the symbolic one
    for Mv in (1.0, 2.0, 4.0, 7.5):
        assert c_m(Mv) == pytest.approx(float((M**6 + 2 * M**4).subs(M, Mv)), rel=1e-15)


def test_c_m_chain_numerically_dominated():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        M = rng.uniform(1.0, 10.0)
        r = rng.uniform(0.0, 0.999)
        s = s_factor(r)
        d = rng.uniform(0.0, r * M**-3)
        chain = s * M**5 * d * (M + s * M**2 * d) + M**2 * s * M**2 * d
        assert chain <= s**2 * c_m(M) * d * (1 + 1e-12)


# -- scalar fixtures -------------------------------------------------------------


def test_neumann_scalar_equality(scalar):
    b_inv, cert = neumann_invert(scalar, ONE, ONE, 0.9 * ONE, 0.1)
    assert b_inv[0] == pytest.approx(1 / 0.9, abs=1e-13)
    assert cert.bound == pytest.approx((1 + 1 / 9) * 0.1, abs=1e-12)
    assert cert.measured == pytest.approx(1 / 9, abs=1e-12)
    assert cert.ratio == pytest.approx(1.0, abs=1e-12)


def test_neumann_trivial(scalar):
    _, cert = neumann_invert(scalar, 2 * ONE, 0.5 * ONE, 2 * ONE, 0.5)
    assert cert.measured == 0.0 and cert.bound == 0.0 and cert.satisfied


def test_neumann_matrix_algebra(matrix_algebra):
    I = np.array([1, 0, 0, 1], dtype=complex)
    E12 = core.basis(4, 1)
    b_inv, cert = neumann_invert(matrix_algebra, I, I, I - 0.1 * E12, 0.2)
    np.testing.assert_allclose(b_inv, I + 0.1 * E12, atol=1e-14)
    np.testing.assert_allclose(b_inv.reshape(2, 2), np.linalg.inv((I - 0.1 * E12).reshape(2, 2)), atol=1e-14)
    assert cert.measured == pytest.approx(0.1, abs=1e-14)
    assert cert.bound == pytest.approx(0.9, abs=1e-12)


def test_neumann_hypothesis_checks(scalar):
    with pytest.raises(HypothesisError):
        neumann_invert(scalar, ONE, ONE, 0.5 * ONE, 0.1)  # outside the radius
    with pytest.raises(HypothesisError):
        neumann_invert(scalar, ONE, 2 * ONE, ONE, 0.1)  # wrong inverse
    with pytest.raises(HypothesisError):
        neumann_invert(core.zero_algebra(1), ONE, ONE, ONE, 0.1)  # no unit


def test_unit_perturb_scalar(scalar):
    e_d, cert = perturbed_unit(scalar, core.scalar_algebra(1.1), 0.1)
    assert e_d[0] == pytest.approx(1 / 1.1, abs=1e-13)
    assert cert.measured == pytest.approx(0.1 / 1.1, abs=1e-12)
    assert cert.bound == pytest.approx(0.1 / 0.9, abs=1e-12)
    _, same = perturbed_unit(scalar, scalar, 0.5)
    assert same.measured == 0.0


def test_unit_perturb_pointwise(pointwise2):
    lam = pointwise2.lam.copy()
    lam[1, 1, 1] = 1.05
    e_d, cert = perturbed_unit(pointwise2, core.make_multiplication(lam), 0.05 * 2 + 1e-12)
    np.testing.assert_allclose(e_d, [1, 1 / 1.05], atol=1e-13)
    assert cert.satisfied


def test_unit_perturb_radius_enforced(scalar):
    with pytest.raises(HypothesisError):
        perturbed_unit(scalar, core.scalar_algebra(1.5), 0.1)


def test_unit_distance_scalar(scalar):
    cert = unit_distance_bound(scalar, core.scalar_algebra(1.1))
    assert cert.measured == pytest.approx(0.1 / 1.1, abs=1e-12)
    assert cert.bound == pytest.approx(0.1 / 1.1, abs=1e-12)
    zero = unit_distance_bound(scalar, scalar)
    assert zero.measured == 0.0 and zero.bound == 0.0 and zero.satisfied


def test_inverse_perturb_scalar(scalar):
    eps, M = 0.01, 2.0
    r = eps * M**3
    a_inv, cert = perturbed_inverse_bound(scalar, core.scalar_algebra(1 + eps), ONE, r, M)
    # 1 (*) x = (1 + eps) x must equal e_d = 1/(1 + eps)
    assert a_inv[0] == pytest.approx(1 / (1 + eps) ** 2, abs=1e-13)
    assert cert.measured == pytest.approx(1 - 1 / (1 + eps) ** 2, abs=1e-12)
    assert cert.bound == pytest.approx(s_factor(r) ** 2 * 96 * eps, rel=1e-12)
    _, same = perturbed_inverse_bound(scalar, scalar, ONE, 0.5, M)
    assert same.measured == 0.0


def test_inverse_perturb_cap_message(scalar):
    with pytest.raises(HypothesisError, match=r"\|\|a\|\|"):
        perturbed_inverse_bound(scalar, scalar, 3 * ONE, 0.5, 2.0)


def test_certified_bound_ratio_invariant(scalar):
    _, cert = neumann_invert(scalar, ONE, ONE, 0.95 * ONE, 0.1)
    assert cert.satisfied and cert.ratio <= 1 + 1e-9


# -- properties ------------------------------------------------------------------


@given(st.integers(1, 5), st.integers(0, 2**32 - 1), st.floats(0.05, 0.9))
def test_neumann_bound_property(dim, seed, r):
    m = generate_random_unital(dim, seed)
    e = core.find_unit(m)
    rng = np.random.default_rng(seed)
    a = e + 0.3 * (rng.standard_normal(dim) + 1j * rng.standard_normal(dim)) / (dim * m.opnorm)
    a_inv = invert(m, a, e)
    if a_inv is None:
        return
    radius = r / (vector_norm(a_inv) * m.opnorm**2)
    d = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    b = a + radius * d / vector_norm(d)
    b_inv, cert = neumann_invert(m, a, a_inv, b, r)
    assert cert.satisfied
    np.testing.assert_allclose(core.multiply(m, b, b_inv), e, atol=1e-9 * (1 + vector_norm(b_inv)))


@given(st.integers(1, 5), st.integers(0, 2**32 - 1), st.floats(0.05, 0.9))
def test_unit_perturb_property(dim, seed, r):
    m = generate_random_unital(dim, seed)
    e = core.find_unit(m)
    diamond, _ = generate_perturbation(m, r / vector_norm(e), seed + 1)
    e_d, cert = perturbed_unit(m, diamond, r)
    assert cert.satisfied
    assert core.unit_residual(diamond, e_d) <= 1e-9 * (1 + vector_norm(e_d))


@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_unit_distance_property(dim, seed):
    m = generate_random_unital(dim, seed)
    diamond, _ = generate_perturbation(m, 0.1, seed + 1)
    assert unit_distance_bound(m, diamond).satisfied
