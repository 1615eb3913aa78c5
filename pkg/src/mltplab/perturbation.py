"""Constructive perturbation bounds for unital multiplications.

Each checker computes the perturbed object along the route of the
corresponding argument (Neumann series, inversion of a left multiplication
operator, ...) and returns it together with a :class:`CertifiedBound`
comparing the measured distance with the theoretical bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Multiplication, find_unit, left_mult_matrix, multiply, right_mult_matrix
from .errors import ConvergenceError, HypothesisError
from .norms import linear_opnorm, mult_distance, vector_norm
from .spectral import invert

BOUND_SLACK = 1e-9
SERIES_TOL = 1e-14
MAX_TERMS = 200_000


def s_factor(r: float) -> float:
    """1 + r/(1 - r)."""
    if not (0.0 <= r < 1.0):
        raise ValueError(f"r must lie in [0, 1), got {r!r}")
    return 1.0 + r / (1.0 - r)


def c_m(M: float) -> float:
    """Explicit constant for the inverse-perturbation bound, M^6 + 2 M^4.

    Obtained by chaining the left-multiplication inverse estimate (<= s M^5 d),
    the unit estimate (<= s M^2 d) and ||e_diamond|| <= M + s r / M.
    """
    return M**6 + 2.0 * M**4


@dataclass(frozen=True)
class CertifiedBound:
    bound: float
    measured: float
    exact_norms: bool
    hypothesis: dict = field(default_factory=dict)

    @property
    def satisfied(self) -> bool:
        return self.measured <= self.bound + BOUND_SLACK * (1.0 + self.bound)

    @property
    def ratio(self) -> float | None:
        if self.bound > 0:
            return self.measured / self.bound
        return None

    def to_dict(self) -> dict:
        return {
            "hypothesis": dict(self.hypothesis),
            "bound": self.bound,
            "measured": self.measured,
            "ratio": self.ratio,
            "satisfied": self.satisfied,
            "exact_norms": self.exact_norms,
        }


def _require_r(r):
    if not (0.0 <= r < 1.0):
        raise HypothesisError(f"r must lie in [0, 1), got {r!r}")


def _unit_or_raise(m, what="multiplication"):
    e = find_unit(m)
    if e is None:
        raise HypothesisError(f"{what} is not unital")
    return e


def neumann_invert(m: Multiplication, a, a_inv, b, r: float, inv_tol: float | None = None):
    """Invert ``b`` near an invertible ``a`` by the series sum_k c^k a^{-1}, c = e - a^{-1} b.

    Hypothesis: ||b - a|| <= r / (||a^{-1}|| |m|^2).  Returns ``(b_inv, bound)``.
    """
    _require_r(r)
    ctx = m.ctx
    norm = lambda v: vector_norm(v, ctx)  # noqa: E731
    e = _unit_or_raise(m)
    a, a_inv, b = (np.asarray(v, dtype=complex) for v in (a, a_inv, b))

    if inv_tol is None:
        inv_tol = 1e-9 * (1.0 + norm(e))
    inv_err = max(norm(multiply(m, a, a_inv) - e), norm(multiply(m, a_inv, a) - e))
    if inv_err > inv_tol:
        raise HypothesisError(f"a_inv is not a two-sided inverse of a (error {inv_err:.3g})")

    star = m.opnorm
    ainv_n = norm(a_inv)
    dist = norm(b - a)
    radius = r / (ainv_n * star**2)
    if dist > radius * (1.0 + 1e-12):
        raise HypothesisError(f"||b - a|| = {dist:.6g} exceeds the radius r/(||a^-1|| |*|^2) = {radius:.6g}")

    c = e - multiply(m, a_inv, b)
    q = star * norm(c)
    if q >= 1.0:
        raise ConvergenceError(f"|*| ||c|| = {q:.6g} >= 1; series does not converge")

    total = a_inv.copy()
    term = a_inv
    terms = 0
    # tail after term K: sum_{k>K} (|*| ||c||)^k ||a^-1|| = q^{K+1} ||a^-1|| / (1 - q)
    while q ** (terms + 1) * ainv_n / (1.0 - q) >= SERIES_TOL:
        if terms >= MAX_TERMS:
            raise ConvergenceError("Neumann series did not reach the tail target")
        term = multiply(m, c, term)
        total = total + term
        terms += 1

    e_n = norm(e)
    bound = (e_n * star + r / (1.0 - r)) * star**2 * ainv_n**2 * dist
    cert = CertifiedBound(
        bound=float(bound),
        measured=norm(total - a_inv),
        exact_norms=m.opnorm_exact,
        hypothesis={
            "r": r,
            "s": s_factor(r),
            "e_norm": e_n,
            "mult_norm": star,
            "a_inv_norm": ainv_n,
            "b_minus_a": dist,
            "radius": radius,
            "c_norm": norm(c),
            "terms": terms,
        },
    )
    return total, cert


def _matrix_neumann_apply(C: np.ndarray, v: np.ndarray, q: float, ctx) -> tuple[np.ndarray, int]:
    """(I - C)^{-1} v = sum_k C^k v, stopped by the geometric tail bound."""
    if q >= 1.0:
        raise ConvergenceError(f"|I - L| = {q:.6g} >= 1")
    vn = vector_norm(v, ctx)
    total = v.copy()
    term = v
    k = 0
    while q ** (k + 1) * vn / (1.0 - q) >= SERIES_TOL:
        if k >= MAX_TERMS:
            raise ConvergenceError("matrix Neumann series did not reach the tail target")
        term = C @ term
        total = total + term
        k += 1
    return total, k


def perturbed_unit(m_star: Multiplication, m_diamond: Multiplication, r: float, agree_tol: float = 1e-9):
    """Unit of ``m_diamond`` via e_d = l_{diamond, e_*}^{-1}(e_*).

    Hypothesis: |diamond - star| <= r / ||e_*||.  The result is cross-checked
    against :func:`find_unit`; disagreement raises ``RuntimeError``.
    """
    _require_r(r)
    ctx = m_star.ctx
    e_s = _unit_or_raise(m_star, "m_star")
    e_n = vector_norm(e_s, ctx)
    dist = mult_distance(m_diamond, m_star, ctx)
    if dist > r / e_n * (1.0 + 1e-12):
        raise HypothesisError(f"|diamond - star| = {dist:.6g} exceeds r/||e_*|| = {r / e_n:.6g}")

    n = m_star.dim
    L = left_mult_matrix(m_diamond, e_s)
    R = right_mult_matrix(m_diamond, e_s)
    qL = linear_opnorm(np.eye(n) - L, ctx)
    qR = linear_opnorm(np.eye(n) - R, ctx)
    if qR >= 1.0:
        raise ConvergenceError(f"|I - r_(diamond, e_*)| = {qR:.6g} >= 1")
    e_d, terms = _matrix_neumann_apply(np.eye(n) - L, e_s, qL, ctx)

    direct = find_unit(m_diamond)
    if direct is None:
        raise RuntimeError("proof-path unit found but find_unit reports m_diamond non-unital")
    gap = vector_norm(direct - e_d, ctx)
    if gap > agree_tol * (1.0 + vector_norm(e_d, ctx)):
        raise RuntimeError(f"proof-path unit disagrees with find_unit by {gap:.3g}")

    s = s_factor(r)
    cert = CertifiedBound(
        bound=float(s * dist * e_n**2),
        measured=vector_norm(e_d - e_s, ctx),
        exact_norms=m_star.opnorm_exact,
        hypothesis={
            "r": r,
            "s": s,
            "e_star_norm": e_n,
            "distance": dist,
            "left_gap": qL,
            "right_gap": qR,
            "terms": terms,
            "find_unit_gap": gap,
        },
    )
    return e_d, cert


def unit_distance_bound(m1: Multiplication, m2: Multiplication) -> CertifiedBound:
    """||e_2 - e_1|| <= |m2 - m1| ||e_2|| ||e_1||."""
    ctx = m1.ctx
    e1 = _unit_or_raise(m1, "m1")
    e2 = _unit_or_raise(m2, "m2")
    dist = mult_distance(m2, m1, ctx)
    n1, n2 = vector_norm(e1, ctx), vector_norm(e2, ctx)
    return CertifiedBound(
        bound=float(dist * n1 * n2),
        measured=vector_norm(e2 - e1, ctx),
        exact_norms=m1.opnorm_exact,
        hypothesis={"distance": dist, "e1_norm": n1, "e2_norm": n2},
    )


def perturbed_inverse_bound(m_star: Multiplication, m_diamond: Multiplication, a, r: float, M: float):
    """Inverse of ``a`` in ``m_diamond`` with ||a_d^-1 - a_*^-1|| <= s^2 C_M |diamond - star|.

    Hypothesis: |star|, ||e_*||, ||a||, ||a_*^-1|| <= M and |diamond - star| <= r M^-3.
    """
    _require_r(r)
    if M <= 0:
        raise HypothesisError("M must be positive")
    ctx = m_star.ctx
    a = np.asarray(a, dtype=complex)
    e_s = _unit_or_raise(m_star, "m_star")
    a_inv = invert(m_star, a, e_s)
    if a_inv is None:
        raise HypothesisError("a is not invertible in (E, star)")

    caps = {
        "|star|": m_star.opnorm,
        "||e_star||": vector_norm(e_s, ctx),
        "||a||": vector_norm(a, ctx),
        "||a_inv||": vector_norm(a_inv, ctx),
    }
    failed = [f"{k} = {v:.6g}" for k, v in caps.items() if v > M * (1.0 + 1e-12)]
    if failed:
        raise HypothesisError(f"M = {M} cap violated: " + ", ".join(failed))
    dist = mult_distance(m_diamond, m_star, ctx)
    if dist > r * M**-3 * (1.0 + 1e-12):
        raise HypothesisError(f"|diamond - star| = {dist:.6g} exceeds r M^-3 = {r * M**-3:.6g}")

    e_d, _ = perturbed_unit(m_star, m_diamond, r)
    a_inv_d = invert(m_diamond, a, e_d)
    if a_inv_d is None:
        raise RuntimeError("a failed to be invertible in (E, diamond) inside the certified radius")

    s = s_factor(r)
    cert = CertifiedBound(
        bound=float(s**2 * c_m(M) * dist),
        measured=vector_norm(a_inv_d - a_inv, ctx),
        exact_norms=m_star.opnorm_exact,
        hypothesis={"r": r, "s": s, "M": M, "C_M": c_m(M), "distance": dist, **caps},
    )
    return a_inv_d, cert
