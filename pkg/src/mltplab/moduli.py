"""The action of invertible linear maps on multiplications and orbit invariants.

For an invertible t the transported product is ``a *_t b = t^-1(t(a) * t(b))``.
Transporting by s and then by t gives the transport by the matrix product
``s @ t``::

    act(t, act(s, m)) == act(compose(s, t), m),   compose(s, t).map == s.map @ t.map

so in terms of matrices the action is a right action.
"""

from __future__ import annotations

import string
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    Multiplication,
    default_assoc_tol,
    find_unit,
    is_commutative,
    make_multiplication,
    multiply,
)
from .errors import DimensionError
from .norms import L1, NormContext, bilinear_opnorm, linear_opnorm, mult_distance, vector_norm
from .perturbation import CertifiedBound

# Transports with cond up to 1e3 push genuine singular values of the
# coboundaries down to ~1e-11 while rounding zeros stay near 1e-15.
RANK_TOL = 1e-13
COBOUNDARY_CAP = 10**6


@dataclass(frozen=True, eq=False)
class GroupElement:
    map: np.ndarray
    inverse: np.ndarray
    cond: float

    @property
    def dim(self) -> int:
        return self.map.shape[0]


def group_element(matrix, inverse=None) -> GroupElement:
    t = np.array(matrix, dtype=complex)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise DimensionError(f"group element must be square, got shape {t.shape}")
    cond = float(np.linalg.cond(t))
    if not np.isfinite(cond):
        raise ValueError("matrix is singular")
    inv = np.linalg.inv(t) if inverse is None else np.array(inverse, dtype=complex)
    err = float(np.abs(t @ inv - np.eye(t.shape[0])).max())
    if err > 1e-10 * max(cond, 1.0):
        raise ValueError(f"t @ t^-1 deviates from the identity by {err:.3g}")
    t.setflags(write=False)
    inv.setflags(write=False)
    return GroupElement(t, inv, cond)


def identity_element(n: int) -> GroupElement:
    return group_element(np.eye(n))


def compose(s: GroupElement, t: GroupElement) -> GroupElement:
    """Element with act(compose(s, t), m) == act(t, act(s, m))."""
    return group_element(s.map @ t.map, t.inverse @ s.inverse)


def group_inverse(t: GroupElement) -> GroupElement:
    return group_element(t.inverse, t.map)


def random_group_element(rng: np.random.Generator, n: int, max_cond: float = 10.0) -> GroupElement:
    """U diag(sigma) V with Haar-ish unitaries and 2-norm condition <= max_cond."""

    def unitary():
        z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        q, r = np.linalg.qr(z)
        return q * (np.diag(r) / np.abs(np.diag(r)))

    kappa = float(np.exp(rng.uniform(0.0, np.log(max_cond))))
    sigma = np.exp(rng.uniform(0.0, np.log(kappa), size=n))
    if n > 1:
        sigma[0], sigma[-1] = 1.0, kappa
    else:
        sigma[:] = kappa
    return group_element(unitary() @ np.diag(sigma) @ unitary())


def act(t: GroupElement, m: Multiplication, tol: float | None = None) -> Multiplication:
    """Transport ``m`` by ``t``; t^-1 is then an isomorphism (E, m) -> (E, act(t, m))."""
    if t.dim != m.dim:
        raise DimensionError(f"group element of dimension {t.dim} cannot act on dimension {m.dim}")
    T, Ti = t.map, t.inverse
    lam = np.einsum("ai,bj,abc,kc->ijk", T, T, m.lam, Ti, optimize=True)
    if tol is None:
        inflation = max(t.cond, 1.0) ** 2
        growth = linear_opnorm(T, L1) ** 3 * linear_opnorm(Ti, L1)
        tol = max(default_assoc_tol(lam) * inflation, 2.0 * m.assoc_defect * growth)
    out = make_multiplication(lam, m.ctx, tol=tol)

    # t^-1(x * y) == t^-1(x) *_t t^-1(y) on basis pairs
    lhs = np.einsum("kc,ijc->ijk", Ti, m.lam)
    rhs = np.einsum("ai,bj,abk->ijk", Ti, Ti, lam, optimize=True)
    scale = 1.0 + float(np.abs(m.lam).max())
    err = float(np.abs(lhs - rhs).max())
    if err > 1e-9 * max(t.cond, 1.0) ** 3 * scale:
        raise RuntimeError(f"transported product fails the isomorphism check (error {err:.3g})")
    return out


def scaling_orbit_norm(m: Multiplication, n: int) -> float:
    """|t_n . m| for t_n = id/n; equals |m|/n."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    t = group_element(np.eye(m.dim) / n, np.eye(m.dim) * n)
    value = act(t, m).opnorm
    if m.ctx.bilinear_exact:
        expected = m.opnorm / n
        if abs(value - expected) > 1e-12 * max(expected, 1e-300):
            raise RuntimeError(f"scaling law violated: {value!r} != {expected!r}")
    return value


def action_continuity_bound(s: GroupElement, t: GroupElement, m1: Multiplication, m2: Multiplication) -> CertifiedBound:
    """Bound |act(s, m1) - act(t, m2)| by

    |m1| |s|^2 |s^-1 - t^-1| + |t^-1| (|m1| (|s| + |t|) |s - t| + |t|^2 |m1 - m2|).
    """
    if not (s.dim == t.dim == m1.dim == m2.dim):
        raise DimensionError("group elements and multiplications must share a dimension")
    ctx = m1.ctx
    ns, nt = linear_opnorm(s.map, ctx), linear_opnorm(t.map, ctx)
    nti = linear_opnorm(t.inverse, ctx)
    d_inv = linear_opnorm(s.inverse - t.inverse, ctx)
    d_map = linear_opnorm(s.map - t.map, ctx)
    d_mult = mult_distance(m1, m2, ctx)
    n1 = m1.opnorm
    bound = n1 * ns**2 * d_inv + nti * (n1 * (ns + nt) * d_map + nt**2 * d_mult)
    measured = mult_distance(act(s, m1), act(t, m2), ctx)
    return CertifiedBound(
        bound=float(bound),
        measured=float(measured),
        exact_norms=m1.opnorm_exact,
        hypothesis={
            "s_norm": ns,
            "t_norm": nt,
            "t_inv_norm": nti,
            "s_inv_minus_t_inv": d_inv,
            "s_minus_t": d_map,
            "m1_norm": n1,
            "m1_minus_m2": d_mult,
            "cond_s": s.cond,
            "cond_t": t.cond,
        },
    )


@dataclass
class JointContinuityReport:
    lhs: list
    rhs: list

    @property
    def inequality_holds(self) -> bool:
        return all(l <= r + 1e-9 * (1.0 + r) for l, r in zip(self.lhs, self.rhs))

    @property
    def converging(self) -> bool:
        """Final third of the left side stays below the first third's peak."""
        k = max(1, len(self.lhs) // 3)
        return max(self.lhs[-k:]) <= max(self.lhs[:k]) + 1e-12

    @property
    def passed(self) -> bool:
        return self.inequality_holds and self.converging

    def worst(self) -> tuple[int, float, float]:
        """(index, lhs, rhs) with the largest lhs - rhs."""
        i = int(np.argmax([l - r for l, r in zip(self.lhs, self.rhs)]))
        return i, self.lhs[i], self.rhs[i]


def joint_continuity_check(mseq, m, aseq, a, bseq, b, ctx: NormContext | None = None) -> JointContinuityReport:
    """Check ||a_n m_n b_n - a m b|| <= |m_n - m| ||a_n|| ||b_n|| + |m| ||a_n|| ||b_n - b|| + |m| ||b|| ||a_n - a||.

    The multiplications may be any bilinear tensors; associativity is not used.
    """
    if not (len(mseq) == len(aseq) == len(bseq)):
        raise ValueError("sequences must have equal length")
    if ctx is None:
        ctx = getattr(m, "ctx", L1)
    lam = getattr(m, "lam", m)
    norm_m = bilinear_opnorm(lam, ctx).value
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    ab = np.einsum("i,j,ijk->k", a, b, lam)
    nb = vector_norm(b, ctx)
    lhs, rhs = [], []
    for mn, an, bn in zip(mseq, aseq, bseq):
        lam_n = getattr(mn, "lam", mn)
        if np.shape(lam_n) != np.shape(lam):
            raise DimensionError("sequence member has the wrong dimension")
        an, bn = np.asarray(an, dtype=complex), np.asarray(bn, dtype=complex)
        value = np.einsum("i,j,ijk->k", an, bn, lam_n)
        na, nbn = vector_norm(an, ctx), vector_norm(bn, ctx)
        lhs.append(vector_norm(value - ab, ctx))
        rhs.append(
            bilinear_opnorm(np.asarray(lam_n) - lam, ctx).value * na * nbn
            + norm_m * na * vector_norm(bn - b, ctx)
            + norm_m * nb * vector_norm(an - a, ctx)
        )
    return JointContinuityReport(lhs, rhs)


# -- Hochschild cohomology -----------------------------------------------------


def _apply_coboundary(lam: np.ndarray, F: np.ndarray, d: int) -> np.ndarray:
    """delta applied to a batch of d-cochains F[z, x_0..x_{d-1}, p]."""
    n = lam.shape[0]
    args = string.ascii_lowercase[: d + 1]  # x_0 .. x_d
    z, p, q = "z", "P", "Q"
    out = z + args + p
    G = np.zeros((F.shape[0],) + (n,) * (d + 1) + (n,), dtype=complex)
    # x_0 * f(x_1, ..., x_d)
    G += np.einsum(f"{args[0]}{q}{p},{z}{args[1:]}{q}->{out}", lam, F, optimize=True)
    for i in range(1, d + 1):
        # (-1)^i f(..., x_{i-1} x_i, ...)
        inner = args[: i - 1] + q + args[i + 1 :]
        G += (-1) ** i * np.einsum(f"{args[i - 1]}{args[i]}{q},{z}{inner}{p}->{out}", lam, F, optimize=True)
    # (-1)^{d+1} f(x_0, ..., x_{d-1}) * x_d
    G += (-1) ** (d + 1) * np.einsum(f"{z}{args[:d]}{q},{q}{args[d]}{p}->{out}", F, lam, optimize=True)
    return G


def coboundary_matrix(m, deg: int) -> np.ndarray:
    """Matrix of delta^deg : C^deg(A, A) -> C^(deg+1)(A, A).

    A deg-cochain is stored as an array f[x_1, ..., x_deg, p] (coefficient of
    basis vector p in f(a_x1, ..., a_xdeg)) flattened in C order; C^0 = A.
    """
    lam = np.asarray(getattr(m, "lam", m), dtype=complex)
    n = lam.shape[0]
    if not (0 <= deg <= 4):
        raise ValueError("deg must lie in 0..4")
    if n ** (deg + 2) > COBOUNDARY_CAP:
        raise ValueError(f"coboundary of degree {deg} in dimension {n} exceeds the size cap")
    N = n ** (deg + 1)
    F = np.eye(N, dtype=complex).reshape((N,) + (n,) * (deg + 1))
    G = _apply_coboundary(lam, F, deg)
    return G.reshape(N, -1).T


class RankAmbiguityWarning(UserWarning):
    pass


@dataclass
class CohomologySignature:
    dims: list
    rank_tol: float
    rigid_certificate: bool
    ranks: list = field(default_factory=list)
    singular_values: list = field(default_factory=list, repr=False)
    ambiguous: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"h_dims": list(self.dims), "rigid_certificate": self.rigid_certificate, "rank_tol": self.rank_tol}


def _numerical_rank(M: np.ndarray, rank_tol: float, scale: float) -> tuple[int, np.ndarray, list]:
    """Rank counting singular values above rank_tol * max(sigma_max, scale).

    ``scale`` (the largest structure constant) keeps a coboundary that is
    zero up to rounding from being measured against its own noise.
    """
    if M.size == 0:
        return 0, np.zeros(0), []
    sv = np.linalg.svd(M, compute_uv=False)
    top = max(float(sv[0]), scale)
    if top == 0.0:
        return 0, sv, []
    rel = sv / top
    rank = int(np.sum(rel > rank_tol))
    near = [float(v) for v in rel if rank_tol / 10 < v < rank_tol * 10]
    return rank, sv, near


def hochschild_dims(m, K: int = 3, rank_tol: float = RANK_TOL, verbose: bool = False) -> CohomologySignature:
    """dim H^d(A, A) for d = 0..K from numerical ranks of the coboundaries.

    ``rigid_certificate`` is set when H^2 and H^3 vanish (cited criterion for
    rigidity; only meaningful for K >= 3).
    """
    lam = np.asarray(getattr(m, "lam", m), dtype=complex)
    n = lam.shape[0]
    scale = float(np.abs(lam).max())
    ranks, svs, ambiguous = [], [], []
    for d in range(K + 1):
        rank, sv, near = _numerical_rank(coboundary_matrix(lam, d), rank_tol, scale)
        ranks.append(rank)
        if verbose:
            svs.append([float(v) for v in sv])
        if near:
            ambiguous.append({"degree": d, "relative_singular_values": near})
    dims = []
    for d in range(K + 1):
        kernel = n ** (d + 1) - ranks[d]
        dims.append(kernel - (ranks[d - 1] if d > 0 else 0))
    if ambiguous:
        warnings.warn(f"numerical rank is ambiguous near rank_tol={rank_tol:g}: {ambiguous}", RankAmbiguityWarning, stacklevel=2)
    rigid = K >= 3 and dims[2] == 0 and dims[3] == 0
    return CohomologySignature(dims, rank_tol, rigid, ranks, svs, ambiguous)


@dataclass
class InvariantSignature:
    unital: bool
    commutative: bool
    cohomology: CohomologySignature

    def key(self) -> tuple:
        return (self.unital, self.commutative, tuple(self.cohomology.dims), self.cohomology.rigid_certificate)

    def __eq__(self, other):
        if not isinstance(other, InvariantSignature):
            return NotImplemented
        return self.key() == other.key()

    def to_dict(self) -> dict:
        return {
            "unital": self.unital,
            "commutative": self.commutative,
            "h_dims": list(self.cohomology.dims),
            "rigid_certificate": self.cohomology.rigid_certificate,
        }


def invariant_signature(m: Multiplication, K: int = 3, rank_tol: float = RANK_TOL) -> InvariantSignature:
    return InvariantSignature(
        unital=find_unit(m) is not None,
        commutative=is_commutative(m),
        cohomology=hochschild_dims(m, K, rank_tol),
    )


@dataclass
class BlowupReport:
    rows: list  # (eps, distance to limit, ||e_eps||)

    @property
    def monotone(self) -> bool:
        """Unit norms never decrease as eps decreases."""
        norms = [r[2] for r in self.rows]
        return all(b >= a * (1 - 1e-12) for a, b in zip(norms, norms[1:]))

    def to_dict(self) -> dict:
        return {
            "rows": [{"eps": e, "distance": d, "unit_norm": u} for e, d, u in self.rows],
            "monotone": self.monotone,
        }


def boundary_blowup_experiment(
    family: Callable[[float], Multiplication], eps_grid: Sequence[float], limit: Multiplication
) -> BlowupReport:
    rows = []
    for eps in sorted(eps_grid, reverse=True):
        m = family(eps)
        e = find_unit(m)
        if e is None:
            raise ValueError(f"family member at eps={eps} is not unital")
        rows.append((float(eps), mult_distance(m, limit), vector_norm(e, m.ctx)))
    return BlowupReport(rows)


def transported_element(t: GroupElement, x) -> np.ndarray:
    """t^-1 x, the image of x under the isomorphism (E, m) -> (E, act(t, m))."""
    return t.inverse @ np.asarray(x, dtype=complex)
