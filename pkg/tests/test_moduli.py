import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mltplab import core, moduli
from mltplab.generate import generate_random_unital, random_monoid
from mltplab.norms import L1, linear_opnorm, mult_distance


def test_group_element_validation():
    with pytest.raises(ValueError):
        moduli.group_element(np.zeros((2, 2)))
    t = moduli.group_element(np.diag([2.0, 4.0]))
    np.testing.assert_allclose(t.inverse, np.diag([0.5, 0.25]))
    assert t.cond == pytest.approx(2.0)


def test_identity_action():
    m = generate_random_unital(3, 1)
    np.testing.assert_allclose(moduli.act(moduli.identity_element(3), m).lam, m.lam, atol=1e-15)


def test_scalar_doubling(scalar):
    m = moduli.act(moduli.group_element(2 * np.eye(1)), scalar)
    assert m.lam[0, 0, 0] == 2.0 and m.opnorm == 2.0


def test_permutation_relabels_table():
    rng = np.random.default_rng(0)
    table = random_monoid(rng, 4)
    perm = rng.permutation(4)
    P = np.eye(4)[:, perm]  # P e_i = e_perm[i]
    moved = moduli.act(moduli.group_element(P), core.semigroup_algebra(table))
    # the new basis vector i plays the role of the old perm[i]
    inv = np.argsort(perm)
    relabeled = inv[table[np.ix_(perm, perm)]]
    np.testing.assert_allclose(moved.lam, core.semigroup_algebra(relabeled).lam, atol=1e-15)


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_action_law(dim, seed):
    rng = np.random.default_rng(seed)
    m = generate_random_unital(dim, seed)
    s = moduli.random_group_element(rng, dim, 10)
    t = moduli.random_group_element(rng, dim, 10)
    lhs = moduli.act(t, moduli.act(s, m)).lam
    rhs = moduli.act(moduli.compose(s, t), m).lam
    np.testing.assert_allclose(lhs, rhs, atol=1e-10 * (1 + np.abs(m.lam).max()))


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_transport_is_isomorphism(dim, seed):
    rng = np.random.default_rng(seed)
    m = generate_random_unital(dim, seed)
    t = moduli.random_group_element(rng, dim, 10)
    mt = moduli.act(t, m)
    x, y = rng.standard_normal(dim), rng.standard_normal(dim)
    lhs = core.multiply(mt, moduli.transported_element(t, x), moduli.transported_element(t, y))
    rhs = moduli.transported_element(t, core.multiply(m, x, y))
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)
    e = core.find_unit(m)
    np.testing.assert_allclose(core.find_unit(mt), moduli.transported_element(t, e), atol=1e-8)


def test_scaling_orbit():
    assert moduli.scaling_orbit_norm(core.zero_algebra(2), 5) == 0.0
    assert moduli.scaling_orbit_norm(core.pointwise_algebra(2), 4) == 0.25
    for seed in range(20):
        m = generate_random_unital(3, seed)
        for n in range(1, 11):
            assert moduli.scaling_orbit_norm(m, n) * n / m.opnorm == pytest.approx(1.0, abs=1e-12)


def test_action_continuity_fixtures(scalar):
    one = moduli.identity_element(1)
    zero = moduli.action_continuity_bound(one, one, scalar, scalar)
    assert zero.measured == 0.0 and zero.bound == 0.0
    two = moduli.group_element(2 * np.eye(1))
    cert = moduli.action_continuity_bound(two, one, scalar, scalar)
    assert cert.measured == 1.0 and cert.bound == 5.0


def test_joint_continuity_scalar(scalar):
    n = np.arange(1, 30)
    mseq = [core.scalar_algebra(1 + 1 / k) for k in n]
    rep = moduli.joint_continuity_check(mseq, scalar, [np.array([1 + 1 / k]) for k in n], np.ones(1), [np.ones(1)] * len(n), np.ones(1))
    for k, lhs in zip(n, rep.lhs):
        assert lhs == pytest.approx((1 + 1 / k) ** 2 - 1, rel=1e-12)
    assert rep.passed


def test_joint_continuity_constant():
    m = generate_random_unital(3, 2)
    a, b = np.ones(3), np.arange(3.0)
    rep = moduli.joint_continuity_check([m] * 5, m, [a] * 5, a, [b] * 5, b)
    assert rep.lhs == [0.0] * 5 and rep.rhs == [0.0] * 5


# -- cohomology ------------------------------------------------------------------


def test_coboundary_trivial_cases(scalar):
    z = core.zero_algebra(2)
    for d in range(3):
        assert not np.any(moduli.coboundary_matrix(z, d))
    assert moduli.coboundary_matrix(scalar, 0).shape == (1, 1)
    assert moduli.coboundary_matrix(scalar, 0)[0, 0] == 0


def test_coboundary_degree_one_by_hand(matrix_algebra):
    # (delta f)(x, y) = x f(y) - f(x y) + f(x) y
    rng = np.random.default_rng(0)
    n = 4
    F = rng.standard_normal((n, n))  # f(a_x) = sum_p F[x, p] a_p
    D = moduli.coboundary_matrix(matrix_algebra, 1)
    got = (D @ F.ravel()).reshape(n, n, n)
    for x in range(n):
        for y in range(n):
            ex, ey = core.basis(n, x), core.basis(n, y)
            fx, fy = F[x], F[y]
            want = core.multiply(matrix_algebra, ex, fy) - F.T @ core.multiply(matrix_algebra, ex, ey) + core.multiply(matrix_algebra, fx, ey)
            np.testing.assert_allclose(got[x, y], want, atol=1e-12)


@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_delta_squared_vanishes(dim, seed):
    m = generate_random_unital(dim, seed)
    for d in range(3):
        DD = moduli.coboundary_matrix(m, d + 1) @ moduli.coboundary_matrix(m, d)
        assert np.abs(DD).max() <= 1e-10 * (1 + m.opnorm) ** 2


def test_hochschild_fixtures(scalar, matrix_algebra):
    sig = moduli.hochschild_dims(scalar)
    assert sig.dims == [1, 0, 0, 0] and sig.rigid_certificate
    sig = moduli.hochschild_dims(matrix_algebra)
    assert sig.dims == [1, 0, 0, 0] and sig.rigid_certificate
    sig = moduli.hochschild_dims(core.zero_algebra(1))
    assert sig.dims == [1, 1, 1, 1] and not sig.rigid_certificate


def test_hochschild_pointwise():
    assert moduli.hochschild_dims(core.pointwise_algebra(2)).dims == [2, 0, 0, 0]


def test_certificate_needs_degree_three(scalar):
    assert not moduli.hochschild_dims(scalar, K=2).rigid_certificate


def test_invariant_signatures():
    s = moduli.invariant_signature(core.pointwise_algebra(2))
    assert (s.unital, s.commutative, s.cohomology.dims) == (True, True, [2, 0, 0, 0])
    s = moduli.invariant_signature(core.zero_algebra(1))
    assert (s.unital, s.commutative, s.cohomology.dims) == (False, True, [1, 1, 1, 1])


@pytest.mark.parametrize("seed", range(3))
def test_orbit_invariance(seed):
    rng = np.random.default_rng(seed)
    m = generate_random_unital(3, seed)
    ref = moduli.invariant_signature(m)
    for _ in range(20):
        t = moduli.random_group_element(rng, 3, 1e3)
        assert moduli.invariant_signature(moduli.act(t, m)) == ref


# -- boundary ----------------------------------------------------------------------


def test_blowup_scalar():
    rep = moduli.boundary_blowup_experiment(lambda eps: core.scalar_algebra(eps), [1, 0.5, 0.25, 0.125], core.zero_algebra(1))
    assert [u for _, _, u in rep.rows] == [1.0, 2.0, 4.0, 8.0]
    assert rep.monotone


def test_blowup_constant_control(pointwise2):
    rep = moduli.boundary_blowup_experiment(lambda eps: pointwise2, [1, 0.5, 0.25], core.zero_algebra(2))
    assert len({u for _, _, u in rep.rows}) == 1


def test_blowup_one_coordinate():
    def family(eps):
        lam = core.pointwise_algebra(2).lam.copy()
        lam[1, 1, 1] = eps
        return core.make_multiplication(lam)

    rep = moduli.boundary_blowup_experiment(family, [1, 0.5, 0.25, 0.125], core.zero_algebra(2))
    for eps, _, u in rep.rows:
        assert u == pytest.approx(1 + 1 / eps, rel=1e-14)
