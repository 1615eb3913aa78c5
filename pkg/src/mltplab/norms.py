"""Vector norms, induced operator norms and bilinear operator norms.

Everything is parametrized by a :class:`NormContext` choosing p in {1, 2, inf}.
Only for p = 1 is the bilinear operator norm computed exactly (the sup over
the unit ball of l1 is attained at basis pairs); for p = 2 and p = inf an
upper bound is returned together with a sampled lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionError

DEFAULT_SAMPLES = 10_000
DEFAULT_SAMPLE_SEED = 20180402

_NAMES = {"l1": 1.0, "l2": 2.0, "linf": math.inf}


@dataclass(frozen=True)
class NormContext:
    p: float = 1.0
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SAMPLE_SEED

    def __post_init__(self):
        if self.p not in (1.0, 2.0, math.inf):
            raise ValueError(f"unsupported norm exponent {self.p!r}; use 1, 2 or inf")

    @classmethod
    def from_name(cls, name: str) -> "NormContext":
        try:
            return cls(_NAMES[name])
        except KeyError:
            raise ValueError(f"unknown norm {name!r}; expected one of {sorted(_NAMES)}") from None

    @property
    def name(self) -> str:
        return {1.0: "l1", 2.0: "l2", math.inf: "linf"}[self.p]

    @property
    def linear_exact(self) -> bool:
        return True

    @property
    def bilinear_exact(self) -> bool:
        return self.p == 1.0


L1 = NormContext(1.0)
L2 = NormContext(2.0)
LINF = NormContext(math.inf)


class OpNorm(NamedTuple):
    """Bilinear operator norm: ``value`` is exact or an upper bound."""

    value: float
    exact: bool
    lower: float


def vector_norm(x, ctx: NormContext = L1) -> float:
    return float(np.linalg.norm(np.asarray(x, dtype=complex).ravel(), ord=ctx.p))


def linear_opnorm(M, ctx: NormContext = L1) -> float:
    """Exact induced norm: max column sum (p=1), top singular value (p=2),
    max row sum (p=inf)."""
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, ord=ctx.p if ctx.p != math.inf else np.inf))


def _lam(tensor) -> np.ndarray:
    lam = getattr(tensor, "lam", tensor)
    lam = np.asarray(lam, dtype=complex)
    if lam.ndim != 3 or not (lam.shape[0] == lam.shape[1] == lam.shape[2]):
        raise DimensionError(f"expected an n x n x n tensor, got shape {lam.shape}")
    return lam


def _unit_samples(rng: np.random.Generator, count: int, n: int, p: float) -> np.ndarray:
    z = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    norms = np.linalg.norm(z, ord=p, axis=1)
    return z / norms[:, None]


def sampled_lower_bound(tensor, ctx: NormContext) -> float:
    """Monte-Carlo lower bound for the bilinear norm (basis pairs included)."""
    lam = _lam(tensor)
    n = lam.shape[0]
    rng = np.random.default_rng(ctx.seed)
    x = _unit_samples(rng, ctx.samples, n, ctx.p)
    y = _unit_samples(rng, ctx.samples, n, ctx.p)
    z = np.einsum("si,sj,ijk->sk", x, y, lam)
    best = np.linalg.norm(z, ord=ctx.p, axis=1).max(initial=0.0)
    basis = np.linalg.norm(lam, ord=ctx.p, axis=2).max(initial=0.0)
    return float(max(best, basis))


def bilinear_opnorm(tensor, ctx: NormContext = L1) -> OpNorm:
    lam = _lam(tensor)
    n = lam.shape[0]
    absl = np.abs(lam)
    l1 = float(absl.sum(axis=2).max(initial=0.0))
    if ctx.p == 1.0:
        return OpNorm(l1, True, l1)
    if ctx.p == 2.0:
        # ||x||_1 <= sqrt(n) ||x||_2 on both inputs; or bound each output
        # coordinate by the spectral norm of its coefficient matrix.
        equiv = l1 * n
        slices = np.linalg.norm(np.moveaxis(lam, 2, 0), ord=2, axis=(1, 2))
        structural = float(np.sqrt(np.sum(slices**2)))
        upper = min(equiv, structural)
    else:
        equiv = l1 * n * n
        structural = float(absl.sum(axis=(0, 1)).max(initial=0.0))
        upper = min(equiv, structural)
    lower = sampled_lower_bound(lam, ctx)
    return OpNorm(float(upper), False, min(lower, float(upper)))


def mult_distance(m1, m2, ctx: NormContext | None = None) -> float:
    """|m1 - m2| in the bilinear operator norm (upper bound unless p = 1)."""
    a, b = _lam(m1), _lam(m2)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    if ctx is None:
        ctx = getattr(m1, "ctx", L1)
        other = getattr(m2, "ctx", ctx)
        if other != ctx:
            raise ValueError("multiplications carry different norm contexts")
    return bilinear_opnorm(a - b, ctx).value


def mult_norm_sandwich_check(m, x, rel_slack: float = 1e-9) -> bool:
    """Check ||x||/||e|| <= |l_x|, |r_x| <= |m| ||x|| with exact l1 norms."""
    from .core import find_unit, left_mult_matrix, right_mult_matrix

    e = find_unit(m)
    if e is None:
        raise ValueError("multiplication is not unital")
    xn = vector_norm(x, L1)
    lower = xn / vector_norm(e, L1)
    upper = bilinear_opnorm(m, L1).value * xn
    ok = True
    for op in (left_mult_matrix(m, x), right_mult_matrix(m, x)):
        val = linear_opnorm(op, L1)
        ok &= lower <= val * (1 + rel_slack) + 1e-300
        ok &= val <= upper * (1 + rel_slack) + 1e-300
    return bool(ok)
