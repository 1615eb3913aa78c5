import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mltplab import core
from mltplab.generate import generate_random_unital
from mltplab.norms import (
    L1,
    L2,
    LINF,
    NormContext,
    bilinear_opnorm,
    linear_opnorm,
    mult_distance,
    mult_norm_sandwich_check,
    sampled_lower_bound,
    vector_norm,
)

CTXS = [L1, L2, LINF]


def test_vector_norms():
    assert vector_norm([3, 4], L1) == 7
    assert vector_norm([3, 4], L2) == 5
    assert vector_norm([3, 4], LINF) == 4


def test_context_names():
    for name in ("l1", "l2", "linf"):
        assert NormContext.from_name(name).name == name
    with pytest.raises(ValueError):
        NormContext.from_name("l3")


def test_linear_opnorms():
    for ctx in CTXS:
        assert linear_opnorm(np.eye(3), ctx) == pytest.approx(1.0)
    assert linear_opnorm(np.diag([2, 5]), L1) == 5
    N = np.array([[0, 1], [0, 0]])
    assert linear_opnorm(N, L1) == 1
    rng = np.random.default_rng(0)
    x = rng.standard_normal((10_000, 2)) + 1j * rng.standard_normal((10_000, 2))
    x /= np.abs(x).sum(axis=1, keepdims=True)
    assert np.abs(x @ N.T).sum(axis=1).max() <= 1.0 + 1e-12


def test_bilinear_norm_fixtures(pointwise2):
    v = bilinear_opnorm(pointwise2.lam, L1)
    assert v.value == 1.0 and v.exact
    assert bilinear_opnorm(np.zeros((2, 2, 2)), L1).value == 0.0
    assert bilinear_opnorm(2 * np.ones((1, 1, 1)), L1).value == 2.0


def test_l1_norm_never_exceeded_by_sampling():
    rng = np.random.default_rng(3)
    for _ in range(10):
        m = generate_random_unital(int(rng.integers(2, 5)), int(rng.integers(2**31)))
        exact = m.opnorm
        lower = sampled_lower_bound(m.lam, L1)
        assert lower <= exact * (1 + 1e-12)
        # basis pairs attain it
        n = m.dim
        best = max(np.abs(m.lam[i, j]).sum() for i in range(n) for j in range(n))
        assert best == pytest.approx(exact, rel=1e-14)


@pytest.mark.parametrize("ctx", [L2, LINF])
def test_upper_bound_dominates_lower_bound(ctx):
    for seed in range(10):
        m = generate_random_unital(3, seed)
        v = bilinear_opnorm(m.lam, ctx)
        assert not v.exact
        assert v.lower <= v.value * (1 + 1e-12)


def test_distances(pointwise2, scalar):
    assert mult_distance(pointwise2, pointwise2) == 0.0
    assert mult_distance(pointwise2, core.zero_algebra(2)) == 1.0
    assert mult_distance(scalar, core.scalar_algebra(2.0)) == 1.0


def test_distance_requires_matching_context(scalar):
    with pytest.raises(ValueError):
        mult_distance(scalar, core.scalar_algebra(1.0, L2))


def test_sandwich(pointwise2):
    assert mult_norm_sandwich_check(pointwise2, np.array([2.0, 5.0]))
    e = core.find_unit(pointwise2)
    assert mult_norm_sandwich_check(pointwise2, e)


@given(st.integers(1, 5), st.integers(0, 2**32 - 1), st.sampled_from(["l1", "l2", "linf"]))
def test_sandwich_on_random_instances(dim, seed, norm):
    ctx = NormContext.from_name(norm)
    m = generate_random_unital(dim, seed, ctx)
    x = np.random.default_rng(seed).standard_normal(dim) + 0j
    assert mult_norm_sandwich_check(m, x)


@given(st.integers(1, 4), st.integers(0, 2**32 - 1), st.sampled_from(["l1", "l2", "linf"]))
def test_product_norm_inequality(dim, seed, norm):
    ctx = NormContext.from_name(norm)
    m = generate_random_unital(dim, seed, ctx)
    rng = np.random.default_rng(seed)
    for _ in range(20):
        x = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        y = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        lhs = vector_norm(core.multiply(m, x, y), ctx)
        assert lhs <= m.opnorm * vector_norm(x, ctx) * vector_norm(y, ctx) * (1 + 1e-12)


def test_sampling_is_deterministic():
    m = generate_random_unital(3, 9)
    assert sampled_lower_bound(m.lam, L2) == sampled_lower_bound(m.lam, L2)
    assert math.isfinite(sampled_lower_bound(m.lam, LINF))
