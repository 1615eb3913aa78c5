"""Seeded random instances: unital multiplications and in-variety perturbations."""

from __future__ import annotations

import numpy as np

from .core import (
    Multiplication,
    SemigroupTable,
    convolution_algebra,
    direct_sum,
    scalar_algebra,
    semigroup_algebra,
    twisted_sum,
    make_multiplication,
    find_unit,
)
from .moduli import act, group_element, random_group_element
from .norms import L1, NormContext, linear_opnorm

MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (next_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def trial_seeds(root: int, count: int) -> list[int]:
    state = root & MASK64
    out = []
    for _ in range(count):
        state, z = splitmix64(state)
        out.append(z)
    return out


# -- semigroups ----------------------------------------------------------------


def _monogenic(k: int, index: int) -> np.ndarray:
    # elements x^1..x^k stored as 0..k-1; x^{k+1} = x^index
    period = k - index + 1
    t = np.empty((k, k), dtype=int)
    for a in range(1, k + 1):
        for b in range(1, k + 1):
            e = a + b
            if e > k:
                e = index + (e - index) % period
            t[a - 1, b - 1] = e - 1
    return t


def random_semigroup(rng: np.random.Generator, k: int) -> np.ndarray:
    """Cayley table of a random semigroup of order k from a small catalogue."""
    i, j = np.indices((k, k))
    kinds = ["null", "left_zero", "right_zero", "max", "min", "cyclic", "monogenic"]
    divisors = [d for d in range(2, k) if k % d == 0]
    if divisors:
        kinds.append("rectangular")
    kind = kinds[rng.integers(len(kinds))]
    if kind == "null":
        t = np.zeros((k, k), dtype=int)
    elif kind == "left_zero":
        t = i.copy()
    elif kind == "right_zero":
        t = j.copy()
    elif kind == "max":
        t = np.maximum(i, j)
    elif kind == "min":
        t = np.minimum(i, j)
    elif kind == "cyclic":
        t = (i + j) % k
    elif kind == "monogenic":
        t = _monogenic(k, int(rng.integers(1, k + 1)))
    else:
        rows = divisors[rng.integers(len(divisors))]
        cols = k // rows
        # (r, c)(r', c') = (r, c')
        t = (i // cols) * cols + (j % cols)
    perm = rng.permutation(k)
    inv = np.argsort(perm)
    relabeled = perm[t[np.ix_(inv, inv)]]
    return SemigroupTable(relabeled).table


def adjoin_identity(table: np.ndarray) -> np.ndarray:
    k = table.shape[0]
    out = np.empty((k + 1, k + 1), dtype=int)
    out[:k, :k] = table
    out[k, :] = np.arange(k + 1)
    out[:, k] = np.arange(k + 1)
    return out


def random_monoid(rng: np.random.Generator, size: int) -> np.ndarray:
    if size == 1:
        return np.zeros((1, 1), dtype=int)
    if rng.random() < 0.2:
        i, j = np.indices((size, size))
        return SemigroupTable((i + j) % size).table
    return SemigroupTable(adjoin_identity(random_semigroup(rng, size - 1))).table


# -- unital instances ----------------------------------------------------------


def _random_blocks(rng: np.random.Generator, dim: int, ctx: NormContext) -> Multiplication:
    parts: list[Multiplication] = []
    remaining = dim
    while remaining:
        options = ["scalar"]
        if remaining >= 2:
            options.append("monoid")
        if remaining >= 4:
            options.append("matrix")
        kind = options[rng.integers(len(options))]
        if kind == "scalar":
            parts.append(convolution_algebra(1, [rng.uniform(0.5, 2.0)], ctx))
            remaining -= 1
        elif kind == "matrix":
            parts.append(convolution_algebra(2, rng.uniform(0.5, 2.0, size=2), ctx))
            remaining -= 4
        else:
            size = int(rng.integers(2, remaining + 1))
            parts.append(semigroup_algebra(random_monoid(rng, size), ctx))
            remaining -= size
    out = parts[0]
    for p in parts[1:]:
        out = direct_sum(out, p)
    return out


def generate_random_unital(dim: int, seed: int, ctx: NormContext = L1, max_cond: float = 10.0) -> Multiplication:
    """Deterministic random unital multiplication of dimension ``dim``.

    Mixture of monoid algebras, direct sums of convolution blocks and C
    factors, and well-conditioned transports of either.
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    if dim == 1:
        return scalar_algebra(1.0, ctx)
    rng = np.random.default_rng(seed)
    for _ in range(100):
        kind = rng.integers(3)
        if kind == 0:
            m = semigroup_algebra(random_monoid(rng, dim), ctx)
        elif kind == 1:
            m = _random_blocks(rng, dim, ctx)
        else:
            base = semigroup_algebra(random_monoid(rng, dim), ctx) if rng.random() < 0.5 else _random_blocks(rng, dim, ctx)
            m = act(random_group_element(rng, dim, max_cond), base)
        if find_unit(m) is not None:
            return m
    raise RuntimeError("failed to produce a unital instance")  # pragma: no cover


def generate_twisted(dim: int, seed: int, literal: bool = False, ctx: NormContext = L1):
    """A (+) C twisted by the unital homomorphism T(1) = e_A; returns a raw tensor."""
    if dim < 2:
        raise ValueError("twisted sums need dim >= 2")
    mA = generate_random_unital(dim - 1, seed, ctx)
    mB = scalar_algebra(1.0, ctx)
    e = find_unit(mA)
    return twisted_sum(mA, mB, e.reshape(-1, 1), literal=literal)


# -- perturbations -------------------------------------------------------------


def _transport_bound(norm: float, delta: float) -> float:
    # |t| <= 1 + delta, |t^-1 - id| <= delta/(1 - delta) for t = id + delta N, |N| = 1
    return norm * ((1 + delta) ** 2 * delta / (1 - delta) + (2 + delta) * delta)


def generate_perturbation(m: Multiplication, radius: float, seed: int, tight: bool = True):
    """Transport ``m`` by t = id + delta N with |diamond - m| <= radius.

    delta is first chosen so that the action-continuity bound equals the
    radius; with ``tight`` it is then enlarged by bisection on the measured
    distance.  Returns ``(diamond, degenerate)``; ``degenerate`` is True when
    no nontrivial transport fits (``diamond`` is then ``m`` itself).
    """
    from .norms import mult_distance

    if radius < 0:
        raise ValueError("radius must be non-negative")
    if radius == 0 or m.opnorm == 0:
        return m, True
    rng = np.random.default_rng(seed)
    n = m.dim
    N = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    N /= linear_opnorm(N, m.ctx)

    lo, hi = 0.0, 0.5
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _transport_bound(m.opnorm, mid) <= radius:
            lo = mid
        else:
            hi = mid
    delta = lo
    if delta < 1e-15:
        return m, True

    def transported(d):
        return act(group_element(np.eye(n) + d * N), m)

    best = transported(delta)
    while mult_distance(best, m) > radius:  # float slack only
        delta *= 0.9
        if delta < 1e-15:
            return m, True
        best = transported(delta)
    if tight:
        lo, hi = delta, min(0.5, 4.0 * delta + 1e-12)
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            cand = transported(mid)
            if mult_distance(cand, m) <= radius:
                lo, best = mid, cand
            else:
                hi = mid
    return best, False


def raw_noise(m: Multiplication, radius: float, seed: int) -> np.ndarray:
    """Tensor noise of l1 bilinear size ``radius`` added to ``m`` (not validated)."""
    rng = np.random.default_rng(seed)
    n = m.dim
    noise = rng.standard_normal((n, n, n)) + 1j * rng.standard_normal((n, n, n))
    noise *= radius / np.abs(noise).sum(axis=2).max()
    return np.asarray(m.lam) + noise
