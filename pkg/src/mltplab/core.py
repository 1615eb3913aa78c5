"""Structure tensors, validated multiplications and their constructors.

A bilinear operation on C^n is stored as a complex array ``lam`` of shape
(n, n, n) with ``alpha_i * alpha_j = sum_k lam[i, j, k] alpha_k``.  Indices
are 0-based throughout the Python API.  Elements and linear maps are plain
numpy arrays.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AssociativityError, DimensionError, HomomorphismError
from .norms import L1, NormContext, bilinear_opnorm, vector_norm


@dataclass(frozen=True, eq=False)
class StructureTensor:
    lam: np.ndarray

    def __post_init__(self):
        lam = np.array(self.lam, dtype=complex)
        if lam.ndim != 3 or not (lam.shape[0] == lam.shape[1] == lam.shape[2]) or lam.shape[0] < 1:
            raise DimensionError(f"structure tensor must have shape (n, n, n), got {lam.shape}")
        if not np.all(np.isfinite(lam)):
            raise ValueError("structure tensor has non-finite entries")
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)

    @property
    def dim(self) -> int:
        return self.lam.shape[0]

    def __repr__(self):
        return f"StructureTensor(dim={self.dim})"


@dataclass(frozen=True, eq=False)
class Multiplication:
    """An associative structure tensor together with its norm data."""

    tensor: StructureTensor
    ctx: NormContext
    opnorm: float
    opnorm_exact: bool
    assoc_defect: float

    @property
    def lam(self) -> np.ndarray:
        return self.tensor.lam

    @property
    def dim(self) -> int:
        return self.tensor.dim

    def __repr__(self):
        return f"Multiplication(dim={self.dim}, norm={self.ctx.name}, opnorm={self.opnorm:.6g})"


def as_tensor(obj) -> StructureTensor:
    if isinstance(obj, StructureTensor):
        return obj
    if isinstance(obj, Multiplication):
        return obj.tensor
    return StructureTensor(obj)


def default_assoc_tol(tensor) -> float:
    lam = as_tensor(tensor).lam
    return 1e-9 * (1.0 + float(np.abs(lam).max())) ** 2


def associativity_residuals(tensor) -> np.ndarray:
    """R[i,j,k,p] = (a_i a_j) a_k - a_i (a_j a_k), coefficient of a_p."""
    lam = as_tensor(tensor).lam
    left = np.einsum("ijl,lkp->ijkp", lam, lam)
    right = np.einsum("iqp,jkq->ijkp", lam, lam)
    return left - right


def associativity_defect(tensor) -> float:
    return float(np.abs(associativity_residuals(tensor)).max())


def worst_associativity_violation(tensor) -> tuple[tuple[int, int, int, int], float]:
    res = np.abs(associativity_residuals(tensor))
    idx = np.unravel_index(int(np.argmax(res)), res.shape)
    return tuple(int(i) for i in idx), float(res[idx])


def make_multiplication(tensor, ctx: NormContext = L1, tol: float | None = None) -> Multiplication:
    """Validate associativity and cache the operator norm.

    Raises :class:`AssociativityError` naming the worst (i, j, k, p) when the
    quadratic residual exceeds ``tol``.
    """
    tensor = as_tensor(tensor)
    if tol is None:
        tol = default_assoc_tol(tensor)
    witness, defect = worst_associativity_violation(tensor)
    if defect > tol:
        i, j, k, p = witness
        raise AssociativityError(
            f"not associative: residual {defect:.3g} > tol {tol:.3g} at (i,j,k,p)={witness} "
            f"[((a{i} a{j}) a{k} - a{i} (a{j} a{k}))_{p}]",
            witness=witness,
            defect=defect,
        )
    norm = bilinear_opnorm(tensor, ctx)
    return Multiplication(tensor, ctx, norm.value, norm.exact, defect)


def _check_vec(m, x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.shape != (m.dim,):
        raise DimensionError(f"element of shape {x.shape} does not match dimension {m.dim}")
    return x


def multiply(m, x, y) -> np.ndarray:
    x, y = _check_vec(m, x), _check_vec(m, y)
    return np.einsum("i,j,ijk->k", x, y, m.lam)


def left_mult_matrix(m, x) -> np.ndarray:
    """Matrix of y -> x*y."""
    return np.einsum("i,ijk->kj", _check_vec(m, x), m.lam)


def right_mult_matrix(m, x) -> np.ndarray:
    """Matrix of y -> y*x."""
    return np.einsum("j,ijk->ki", _check_vec(m, x), m.lam)


def basis(n: int, i: int) -> np.ndarray:
    v = np.zeros(n, dtype=complex)
    v[i] = 1.0
    return v


def unit_residual(m, e) -> float:
    """max_i max(||e*a_i - a_i||, ||a_i*e - a_i||) in the context norm."""
    lam = m.lam
    eye = np.eye(m.dim)
    right = np.einsum("a,aik->ik", e, lam) - eye  # row i: e * a_i - a_i
    left = np.einsum("b,ibk->ik", e, lam) - eye
    ctx = getattr(m, "ctx", L1)
    return float(max(np.linalg.norm(right, ord=ctx.p, axis=1).max(), np.linalg.norm(left, ord=ctx.p, axis=1).max()))


def find_unit(m, tol: float | None = None) -> np.ndarray | None:
    """Two-sided unit via one stacked least-squares system, or None.

    The default tolerance is 1e-9 * (1 + |m| * ||e||) for the candidate e.
    """
    n = m.dim
    lam = m.lam
    # e * a_i = a_i : sum_a e_a lam[a, i, k];  a_i * e = a_i : sum_b e_b lam[i, b, k]
    right_blocks = np.transpose(lam, (1, 2, 0)).reshape(n * n, n)
    left_blocks = np.transpose(lam, (0, 2, 1)).reshape(n * n, n)
    A = np.vstack([right_blocks, left_blocks])
    rhs = np.concatenate([np.eye(n).ravel(), np.eye(n).ravel()]).astype(complex)
    e, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    # one refinement step removes most of the solver's rounding
    corr, *_ = np.linalg.lstsq(A, rhs - A @ e, rcond=None)
    refined = e + corr
    if unit_residual(m, refined) <= unit_residual(m, e):
        e = refined
    res = unit_residual(m, e)
    if tol is None:
        opn = getattr(m, "opnorm", None)
        if opn is None:
            opn = bilinear_opnorm(lam, L1).value
        tol = 1e-9 * (1.0 + opn * vector_norm(e, getattr(m, "ctx", L1)))
    if res > tol:
        return None
    return e


def is_commutative(m, tol: float | None = None) -> bool:
    lam = m.lam
    if tol is None:
        tol = 1e-9 * (1.0 + float(np.abs(lam).max()))
    diff = lam - np.transpose(lam, (1, 0, 2))
    ctx = getattr(m, "ctx", L1)
    return bool(np.linalg.norm(diff, ord=ctx.p, axis=2).max() <= tol)


class SemigroupTable:
    """Cayley table of a finite semigroup on {0, ..., size-1}."""

    def __init__(self, table):
        t = np.array(table, dtype=int)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] < 1:
            raise DimensionError(f"table must be square and non-empty, got shape {t.shape}")
        size = t.shape[0]
        if t.min() < 0 or t.max() >= size:
            raise ValueError("table entries must lie in range(size)")
        lhs = t[t, :]  # lhs[i, j, k] = (i j) k
        rhs = t[:, t]  # rhs[i, j, k] = i (j k)
        bad = np.argwhere(lhs != rhs)
        if len(bad):
            i, j, k = (int(v) for v in bad[0])
            raise AssociativityError(
                f"table is not associative at ({i},{j},{k}): ({i}{j}){k}={lhs[i, j, k]} but {i}({j}{k})={rhs[i, j, k]}",
                witness=(i, j, k),
            )
        t.setflags(write=False)
        self.table = t

    @property
    def size(self) -> int:
        return self.table.shape[0]

    def identity(self) -> int | None:
        r = np.arange(self.size)
        for e in r:
            if np.array_equal(self.table[e], r) and np.array_equal(self.table[:, e], r):
                return int(e)
        return None


def semigroup_algebra(table, ctx: NormContext = L1) -> Multiplication:
    if not isinstance(table, SemigroupTable):
        table = SemigroupTable(table)
    n = table.size
    lam = np.zeros((n, n, n), dtype=complex)
    i, j = np.indices((n, n))
    lam[i, j, table.table] = 1.0
    return make_multiplication(lam, ctx)


def _block_sum(lam1: np.ndarray, lam2: np.ndarray) -> np.ndarray:
    n1, n2 = lam1.shape[0], lam2.shape[0]
    lam = np.zeros((n1 + n2,) * 3, dtype=complex)
    lam[:n1, :n1, :n1] = lam1
    lam[n1:, n1:, n1:] = lam2
    return lam


def direct_sum(m1: Multiplication, m2: Multiplication) -> Multiplication:
    if m1.ctx != m2.ctx:
        raise ValueError("direct_sum needs both summands in the same norm context")
    tol = max(default_assoc_tol(m1.tensor), default_assoc_tol(m2.tensor))
    return make_multiplication(_block_sum(m1.lam, m2.lam), m1.ctx, tol=tol)


def convolution_algebra(size: int, weights, ctx: NormContext = L1) -> Multiplication:
    """(f * g)(x, y) = sum_z f(x, z) g(z, y) w_z on functions of X x X, |X| = size.

    Coordinate of the point (x, y) is ``x * size + y``.
    """
    w = np.asarray(weights, dtype=float)
    if size < 1 or w.shape != (size,):
        raise DimensionError(f"need {size} weights, got shape {w.shape}")
    if np.any(w <= 0):
        raise ValueError("convolution weights must be strictly positive")
    n = size * size
    lam = np.zeros((n, n, n), dtype=complex)
    for x in range(size):
        for z in range(size):
            for y in range(size):
                lam[x * size + z, z * size + y, x * size + y] = w[z]
    return make_multiplication(lam, ctx)


def scalar_algebra(c: complex = 1.0, ctx: NormContext = L1) -> Multiplication:
    """C with product a*b = c ab."""
    return make_multiplication(np.full((1, 1, 1), c, dtype=complex), ctx)


def zero_algebra(n: int, ctx: NormContext = L1) -> Multiplication:
    return make_multiplication(np.zeros((n, n, n), dtype=complex), ctx)


def pointwise_algebra(n: int, ctx: NormContext = L1) -> Multiplication:
    lam = np.zeros((n, n, n), dtype=complex)
    for i in range(n):
        lam[i, i, i] = 1.0
    return make_multiplication(lam, ctx)


def check_homomorphism(mA, mB, T, tol: float = 1e-9) -> float:
    """max over basis pairs of ||T(b b') - T(b) T(b')||_1; raises if > tol."""
    T = np.asarray(T, dtype=complex)
    nA, nB = mA.dim, mB.dim
    if T.shape != (nA, nB):
        raise DimensionError(f"T must have shape ({nA}, {nB}), got {T.shape}")
    # T(beta_i beta_j) = sum_k lamB[i,j,k] T[:, k]
    lhs = np.einsum("ijk,ck->ijc", mB.lam, T)
    rhs = np.einsum("ai,bj,abc->ijc", T, T, mA.lam)
    err = float(np.abs(lhs - rhs).sum(axis=2).max(initial=0.0))
    if err > tol:
        raise HomomorphismError(f"T is not an algebra homomorphism B -> A (error {err:.3g} > {tol:.3g})")
    return err


def twisted_sum(mA, mB, T, literal: bool = False, tol: float = 1e-9) -> StructureTensor:
    """Raw tensor of (a,b)(a',b') = (aa' + a T(b') + T(b) a', bb') on A (+) B.

    With ``literal=True`` the last cross term is the verbatim ``T(b) a``.  That
    term is quadratic in the first factor and vanishes on every pair of basis
    vectors of A (+) B, so its tensor is the bilinear extension of the formula
    on basis pairs: (aa' + a T(b'), bb').  See :func:`twisted_product_literal`
    for pointwise evaluation of the verbatim (non-bilinear) formula.
    """
    T = np.asarray(T, dtype=complex)
    check_homomorphism(mA, mB, T, tol)
    nA, nB = mA.dim, mB.dim
    lam = _block_sum(mA.lam, mB.lam)
    # alpha_i * beta_j -> alpha_i T(beta_j)
    lam[:nA, nA:, :nA] = np.einsum("cj,ick->ijk", T, mA.lam)
    if not literal:
        # beta_i * alpha_j -> T(beta_i) alpha_j
        lam[nA:, :nA, :nA] = np.einsum("ci,cjk->ijk", T, mA.lam)
    return StructureTensor(lam)


def twisted_product_literal(mA, mB, T, x, y) -> np.ndarray:
    """Pointwise value of (aa' + a T(b') + T(b) a, bb') for x=(a,b), y=(a',b')."""
    T = np.asarray(T, dtype=complex)
    nA = mA.dim
    x, y = np.asarray(x, dtype=complex), np.asarray(y, dtype=complex)
    a, b = x[:nA], x[nA:]
    a2, b2 = y[:nA], y[nA:]
    first = multiply(mA, a, a2) + multiply(mA, a, T @ b2) + multiply(mA, T @ b, a)
    return np.concatenate([first, multiply(mB, b, b2)])


# -- JSON instance files -------------------------------------------------------


def tensor_to_json(tensor, norm: str = "l1") -> dict:
    lam = as_tensor(tensor).lam
    return {
        "dim": int(lam.shape[0]),
        "norm": norm,
        "lambda": [[float(z.real), float(z.imag)] for z in lam.ravel(order="C")],
    }


def tensor_from_json(data: dict) -> tuple[StructureTensor, NormContext]:
    n = data["dim"]
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"'dim' must be a positive integer, got {n!r}")
    ctx = NormContext.from_name(data.get("norm", "l1"))
    flat = data["lambda"]
    if len(flat) != n**3:
        raise ValueError(f"'lambda' must have {n**3} entries for dim {n}, got {len(flat)}")
    vals = []
    for entry in flat:
        if len(entry) != 2:
            raise ValueError(f"each lambda entry must be [re, im], got {entry!r}")
        vals.append(complex(float(entry[0]), float(entry[1])))
    lam = np.array(vals, dtype=complex).reshape((n, n, n))
    return StructureTensor(lam), ctx


def save_instance(path, tensor, norm: str = "l1") -> None:
    Path(path).write_text(json.dumps(tensor_to_json(tensor, norm)) + "\n")


def load_instance(path) -> tuple[StructureTensor, NormContext]:
    return tensor_from_json(json.loads(Path(path).read_text()))
