"""Invertibility, inverses and spectra in unital multiplications."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import find_unit, left_mult_matrix, multiply, right_mult_matrix
from .norms import mult_distance, vector_norm

SIGMA_TOL = 1e-10
DEDUP_TOL = 1e-8
ILL_CONDITIONED = 1e-6


class IllConditionedWarning(UserWarning):
    pass


def _min_rel_singular(M: np.ndarray) -> float:
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[0] == 0:
        return 0.0
    return float(sv[-1] / sv[0])


def is_invertible(m, a, sigma_tol: float = SIGMA_TOL) -> bool:
    """True iff both l_a and r_a have smallest singular value > sigma_tol * largest."""
    return (
        _min_rel_singular(left_mult_matrix(m, a)) > sigma_tol
        and _min_rel_singular(right_mult_matrix(m, a)) > sigma_tol
    )


def invert(m, a, e=None, sigma_tol: float = SIGMA_TOL, tol: float | None = None) -> np.ndarray | None:
    """Two-sided inverse of ``a`` or None.

    Emits :class:`IllConditionedWarning` when a multiplication matrix is
    within a factor 1e4 of the singularity threshold.
    """
    if e is None:
        e = find_unit(m)
        if e is None:
            raise ValueError("multiplication is not unital")
    L, R = left_mult_matrix(m, a), right_mult_matrix(m, a)
    rel = min(_min_rel_singular(L), _min_rel_singular(R))
    if rel <= sigma_tol:
        return None
    if rel < ILL_CONDITIONED:
        warnings.warn(f"element is close to singular (relative sigma_min {rel:.2e})", IllConditionedWarning, stacklevel=2)
    x = np.linalg.solve(L, e)
    ctx = m.ctx
    if tol is None:
        tol = 1e-9 * (1.0 + vector_norm(e, ctx)) / max(rel, 1e-6)
    err = max(vector_norm(multiply(m, a, x) - e, ctx), vector_norm(multiply(m, x, a) - e, ctx))
    if err > tol:
        return None
    return x


@dataclass(frozen=True)
class SpectrumSet:
    points: tuple
    dedup_tol: float = DEDUP_TOL

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def distance(self, z: complex) -> float:
        if not self.points:
            return float("inf")
        return float(min(abs(z - p) for p in self.points))

    def contains(self, z: complex, tol: float | None = None) -> bool:
        return self.distance(z) <= (self.dedup_tol if tol is None else tol)

    def to_json(self) -> list:
        return sorted([float(p.real), float(p.imag)] for p in self.points)


def dedup(values, tol: float = DEDUP_TOL) -> tuple:
    kept: list[complex] = []
    for z in sorted((complex(v) for v in values), key=lambda c: (c.real, c.imag)):
        if all(abs(z - k) > tol for k in kept):
            kept.append(z)
    return tuple(kept)


def spectrum(m, a, dedup_tol: float = DEDUP_TOL) -> SpectrumSet:
    """Eigenvalues of l_a together with those of r_a.

    Since l_e is the identity, a - lambda e fails to be invertible exactly at
    these points.
    """
    if find_unit(m) is None:
        raise ValueError("spectrum is only defined for unital multiplications")
    ev = np.concatenate([np.linalg.eigvals(left_mult_matrix(m, a)), np.linalg.eigvals(right_mult_matrix(m, a))])
    return SpectrumSet(dedup(ev, dedup_tol), dedup_tol)


def spectrum_bruteforce(m, a, grid, sigma_tol: float = SIGMA_TOL) -> list:
    """Grid points lambda where a - lambda e is not invertible (test oracle)."""
    e = find_unit(m)
    if e is None:
        raise ValueError("spectrum is only defined for unital multiplications")
    a = np.asarray(a, dtype=complex)
    return [lam for lam in grid if not is_invertible(m, a - lam * e, sigma_tol)]


@dataclass
class SemicontinuityReport:
    """Finite-tail check of limsup sigma_n(a) inside sigma(a).

    A point persists when it lies within ``tol`` of every spectrum
    sigma_k(a) with k >= n0; each persisting point must lie within ``tol`` of
    the limit spectrum.
    """

    n0: int
    tol: float
    persistent: list
    worst_distance: float
    distances: list = field(default_factory=list)
    tail_gap: float = 0.0

    @property
    def passed(self) -> bool:
        return self.worst_distance <= self.tol

    def to_dict(self) -> dict:
        return {
            "n0": self.n0,
            "tol": self.tol,
            "persistent": [[p.real, p.imag] for p in self.persistent],
            "worst_distance": self.worst_distance,
            "mult_distances": self.distances,
            "tail_gap": self.tail_gap,
            "passed": self.passed,
        }


def spectral_semicontinuity(seq, limit, a, tol: float = 1e-6, n0: int | None = None) -> SemicontinuityReport:
    if not seq:
        raise ValueError("need a non-empty sequence")
    if n0 is None:
        n0 = len(seq) // 2
    limit_spec = spectrum(limit, a)
    tail = [spectrum(mk, a) for mk in seq[n0:]]
    candidates = dedup([p for s in tail for p in s], tol)
    persistent = [p for p in candidates if all(s.distance(p) <= tol for s in tail)]
    worst = max((limit_spec.distance(p) for p in persistent), default=0.0)
    gap = max((limit_spec.distance(p) for p in tail[-1]), default=0.0)
    return SemicontinuityReport(
        n0=n0,
        tol=tol,
        persistent=persistent,
        worst_distance=float(worst),
        distances=[mult_distance(mk, limit) for mk in seq],
        tail_gap=float(gap),
    )
