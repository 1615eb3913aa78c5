"""Experiment suites: seeded random trials of every certified bound.

Each suite maps ``(dim, r, seed)`` to one :class:`ReportRow`.  Trial ``i`` uses
``dims[i % len(dims)]`` and ``r_values[(i // len(dims)) % len(r_values)]``; its
seed is output ``i`` of a splitmix64 stream started at the root seed.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import core, moduli, perturbation, spectral
from .errors import ConvergenceError, HypothesisError
from .generate import generate_perturbation, generate_random_unital, raw_noise, trial_seeds
from .norms import NormContext, linear_opnorm, mult_distance, vector_norm

SUITES = (
    "thm-neumann",
    "thm-unit-perturb",
    "thm-unit-distance",
    "thm-inverse-perturb",
    "corollary-spectrum",
    "lemma-joint-continuity",
    "action-continuity",
    "boundary-blowup",
    "cohomology",
    "orbit-invariance",
)

DEFAULT_TOLERANCES = {
    "M": 4.0,
    "spectral_tol": 1e-6,
    "max_cond": 10.0,
    "orbit_max_cond": 1e3,
    "orbit_samples": 10,
    "unit_distance_radius": 0.1,
    "action_radius": 0.5,
}

CSV_COLUMNS = (
    "suite",
    "kind",
    "trial",
    "seed",
    "dim",
    "status",
    "satisfied",
    "exact_norms",
    "bound",
    "measured",
    "ratio",
    "hypothesis",
    "wall_time",
)


@dataclass
class ExperimentConfig:
    suite: str
    trials: int = 100
    dims: list = field(default_factory=lambda: [1, 2, 3, 4])
    r_values: list = field(default_factory=lambda: [0.1, 0.5, 0.9])
    seed: int = 0
    norm: str = "l1"
    tolerances: dict = field(default_factory=dict)
    raw_noise: bool = False
    workers: int = 1
    fixtures: bool = True

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.dims or any(int(d) < 1 for d in self.dims):
            raise ValueError("dims must be a non-empty list of positive integers")
        if not self.r_values or any(not (0.0 <= r < 1.0) for r in self.r_values):
            raise ValueError("r values must lie in [0, 1)")
        self.dims = [int(d) for d in self.dims]
        self.r_values = [float(r) for r in self.r_values]
        self.tolerances = {**DEFAULT_TOLERANCES, **self.tolerances}
        NormContext.from_name(self.norm)

    @property
    def ctx(self) -> NormContext:
        return NormContext.from_name(self.norm)


@dataclass
class ReportRow:
    suite: str
    kind: str  # "trial" | "fixture" | "raw-noise"
    trial: int
    seed: int
    dim: int
    status: str  # "ok" | "violated" | "hypothesis-unmet" | "report-only"
    satisfied: bool
    exact_norms: bool
    bound: float | None
    measured: float | None
    ratio: float | None
    hypothesis: dict
    wall_time: float = 0.0

    @property
    def counts_as_violation(self) -> bool:
        return self.status == "violated" and self.exact_norms

    def to_json(self) -> str:
        return json.dumps(_clean(asdict(self)), sort_keys=True)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def _row_from_cert(suite, trial, seed, dim, cert, extra=None, kind="trial") -> ReportRow:
    hyp = dict(cert.hypothesis)
    if extra:
        hyp.update(extra)
    return ReportRow(
        suite=suite,
        kind=kind,
        trial=trial,
        seed=seed,
        dim=dim,
        status="ok" if cert.satisfied else "violated",
        satisfied=cert.satisfied,
        exact_norms=cert.exact_norms,
        bound=cert.bound,
        measured=cert.measured,
        ratio=cert.ratio,
        hypothesis=hyp,
    )


def _unmet(suite, trial, seed, dim, reason, exact) -> ReportRow:
    return ReportRow(suite, "trial", trial, seed, dim, "hypothesis-unmet", True, exact, None, None, None, {"reason": reason})


def _random_vec(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def _random_invertible(rng, m, e, ctx, tries=50):
    for _ in range(tries):
        a = _random_vec(rng, m.dim)
        a_inv = spectral.invert(m, a, e)
        if a_inv is not None:
            lm = core.left_mult_matrix(m, a)
            if np.linalg.cond(lm) < 1e6:
                return a, a_inv
    return e.copy(), e.copy()


# -- suites --------------------------------------------------------------------


def _neumann_trial(cfg, trial, dim, r, seed) -> ReportRow:
    ctx = cfg.ctx
    rng = np.random.default_rng(seed)
    m = generate_random_unital(dim, seed, ctx)
    e = core.find_unit(m)
    a, a_inv = _random_invertible(rng, m, e, ctx)
    radius = r / (vector_norm(a_inv, ctx) * m.opnorm**2)
    d = _random_vec(rng, dim)
    u = 1.0 if rng.random() < 0.25 else rng.uniform(0.0, 1.0)
    b = a + u * radius * d / vector_norm(d, ctx)
    b_inv, cert = perturbation.neumann_invert(m, a, a_inv, b, r)
    direct = spectral.invert(m, b, e)
    gap = None if direct is None else vector_norm(direct - b_inv, ctx) / max(vector_norm(direct, ctx), 1e-300)
    row = _row_from_cert(cfg.suite, trial, seed, dim, cert, {"direct_rel_gap": gap})
    if direct is None or gap > 1e-10:
        row.status, row.satisfied = "violated", False
    return row


def _unit_perturb_trial(cfg, trial, dim, r, seed) -> ReportRow:
    ctx = cfg.ctx
    m = generate_random_unital(dim, seed, ctx)
    e = core.find_unit(m)
    diamond, degenerate = generate_perturbation(m, r / vector_norm(e, ctx), seed + 1)
    _, cert = perturbation.perturbed_unit(m, diamond, r)
    return _row_from_cert(cfg.suite, trial, seed, dim, cert, {"degenerate_perturbation": degenerate})


def _unit_distance_trial(cfg, trial, dim, r, seed) -> ReportRow:
    ctx = cfg.ctx
    m = generate_random_unital(dim, seed, ctx)
    diamond, degenerate = generate_perturbation(m, cfg.tolerances["unit_distance_radius"], seed + 1)
    cert = perturbation.unit_distance_bound(m, diamond)
    return _row_from_cert(cfg.suite, trial, seed, dim, cert, {"r": r, "degenerate_perturbation": degenerate})


def _inverse_perturb_trial(cfg, trial, dim, r, seed) -> ReportRow:
    ctx = cfg.ctx
    M = float(cfg.tolerances["M"])
    rng = np.random.default_rng(seed)
    for attempt in range(20):
        m = generate_random_unital(dim, seed + attempt, ctx)
        e = core.find_unit(m)
        if m.opnorm <= M and vector_norm(e, ctx) <= M:
            break
    else:
        return _unmet(cfg.suite, trial, seed, dim, "no instance with |*|, ||e|| <= M", m.opnorm_exact)
    a = None
    for _ in range(50):
        w = _random_vec(rng, dim)
        cand = e + rng.uniform(0.0, 0.5) * w / (vector_norm(w, ctx) * m.opnorm)
        inv = spectral.invert(m, cand, e)
        if inv is not None and vector_norm(cand, ctx) <= M and vector_norm(inv, ctx) <= M:
            a = cand
            break
    if a is None:
        return _unmet(cfg.suite, trial, seed, dim, "no element with ||a||, ||a^-1|| <= M", m.opnorm_exact)
    diamond, degenerate = generate_perturbation(m, r * M**-3, seed + 1)
    _, cert = perturbation.perturbed_inverse_bound(m, diamond, a, r, M)
    return _row_from_cert(cfg.suite, trial, seed, dim, cert, {"degenerate_perturbation": degenerate})


def orbit_sequence(m, rng, length=16, base=10.0):
    """Transports by t_k = id + N base^-k, k = 1..length, converging to m."""
    n = m.dim
    N = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    N *= 0.5 / linear_opnorm(N, m.ctx)
    return [moduli.act(moduli.group_element(np.eye(n) + N * base**-k), m) for k in range(1, length + 1)]


def _spectrum_trial(cfg, trial, dim, r, seed) -> ReportRow:
    ctx = cfg.ctx
    rng = np.random.default_rng(seed)
    m = generate_random_unital(dim, seed, ctx)
    a = _random_vec(rng, dim)
    seq = orbit_sequence(m, rng)
    tol = cfg.tolerances["spectral_tol"]
    rep = spectral.spectral_semicontinuity(seq, m, a, tol)
    hyp = rep.to_dict()
    hyp.pop("mult_distances")
    return ReportRow(
        cfg.suite, "trial", trial, seed, dim, "ok" if rep.passed else "violated", rep.passed, m.opnorm_exact,
        tol, rep.worst_distance, rep.worst_distance / tol, hyp,
    )


def _joint_trial(cfg, trial, dim, r, seed) -> ReportRow:
    ctx = cfg.ctx
    rng = np.random.default_rng(seed)
    m = generate_random_unital(dim, seed, ctx)
    a, b = _random_vec(rng, dim), _random_vec(rng, dim)
    v, w = _random_vec(rng, dim), _random_vec(rng, dim)
    N = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    N *= 0.5 / linear_opnorm(N, ctx)
    ks = range(1, 21)
    mseq = [moduli.act(moduli.group_element(np.eye(dim) + N / k), m) for k in ks]
    aseq = [a + v / k for k in ks]
    bseq = [b + w / k for k in ks]
    rep = moduli.joint_continuity_check(mseq, m, aseq, a, bseq, b)
    idx, lhs, rhs = rep.worst()
    ok = rep.passed
    return ReportRow(
        cfg.suite, "trial", trial, seed, dim, "ok" if ok else "violated", ok, m.opnorm_exact,
        rhs, lhs, lhs / rhs if rhs > 0 else None,
        {"worst_index": idx, "inequality_holds": rep.inequality_holds, "converging": rep.converging, "terms": len(ks)},
    )


def _action_trial(cfg, trial, dim, r, seed) -> ReportRow:
    ctx = cfg.ctx
    rng = np.random.default_rng(seed)
    m1 = generate_random_unital(dim, seed, ctx)
    m2, _ = generate_perturbation(m1, cfg.tolerances["action_radius"], seed + 1, tight=False)
    s = moduli.random_group_element(rng, dim, cfg.tolerances["max_cond"])
    if rng.random() < 0.5:
        t = moduli.random_group_element(rng, dim, cfg.tolerances["max_cond"])
    else:
        near = np.eye(dim) + 0.05 * (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / dim
        t = moduli.compose(s, moduli.group_element(near))
    cert = moduli.action_continuity_bound(s, t, m2, m1)
    return _row_from_cert(cfg.suite, trial, seed, dim, cert)


def _blowup_trial(cfg, trial, dim, r, seed) -> ReportRow:
    ctx = cfg.ctx
    m = generate_random_unital(dim, seed, ctx)
    e_norm = vector_norm(core.find_unit(m), ctx)
    limit = core.zero_algebra(dim, ctx)
    rep = moduli.boundary_blowup_experiment(lambda eps: core.make_multiplication(eps * m.lam, ctx), [1, 0.5, 0.25, 0.125], limit)
    dev = max(abs(u * eps / e_norm - 1.0) for eps, _, u in rep.rows)
    ok = rep.monotone and dev <= 1e-9
    hyp = rep.to_dict()
    hyp["unit_norm"] = e_norm
    return ReportRow(cfg.suite, "trial", trial, seed, dim, "ok" if ok else "violated", ok, m.opnorm_exact, 1e-9, dev, None, hyp)


def _dd_norm(m, K=2):
    return max(
        float(np.abs(moduli.coboundary_matrix(m, d + 1) @ moduli.coboundary_matrix(m, d)).max()) for d in range(K + 1)
    )


def _cohomology_trial(cfg, trial, dim, r, seed) -> ReportRow:
    m = generate_random_unital(dim, seed, cfg.ctx)
    sig = moduli.hochschild_dims(m)
    dd = _dd_norm(m)
    bound = 1e-10 * (1.0 + m.opnorm) ** 2
    ok = dd <= bound and min(sig.dims) >= 0
    return ReportRow(
        cfg.suite, "trial", trial, seed, dim, "ok" if ok else "violated", ok, m.opnorm_exact, bound, dd, None,
        sig.to_dict() | {"ambiguous": sig.ambiguous},
    )


def _orbit_trial(cfg, trial, dim, r, seed) -> ReportRow:
    rng = np.random.default_rng(seed)
    m = generate_random_unital(dim, seed, cfg.ctx)
    ref = moduli.invariant_signature(m)
    mismatches = 0
    conds = []
    for _ in range(int(cfg.tolerances["orbit_samples"])):
        t = moduli.random_group_element(rng, dim, cfg.tolerances["orbit_max_cond"])
        conds.append(t.cond)
        if moduli.invariant_signature(moduli.act(t, m)) != ref:
            mismatches += 1
    ok = mismatches == 0
    return ReportRow(
        cfg.suite, "trial", trial, seed, dim, "ok" if ok else "violated", ok, True, 0.0, float(mismatches), None,
        ref.to_dict() | {"max_cond": max(conds), "samples": len(conds)},
    )


def _raw_noise_trial(cfg, trial, dim, r, seed) -> ReportRow:
    m = generate_random_unital(dim, seed, cfg.ctx)
    lam = raw_noise(m, r, seed + 1)
    defect = core.associativity_defect(lam)
    return ReportRow(
        cfg.suite, "raw-noise", trial, seed, dim, "report-only", True, m.opnorm_exact, None, defect, None,
        {"noise_size": r, "assoc_defect": defect, "default_tol": core.default_assoc_tol(lam)},
    )


_TRIALS: dict[str, Callable] = {
    "thm-neumann": _neumann_trial,
    "thm-unit-perturb": _unit_perturb_trial,
    "thm-unit-distance": _unit_distance_trial,
    "thm-inverse-perturb": _inverse_perturb_trial,
    "corollary-spectrum": _spectrum_trial,
    "lemma-joint-continuity": _joint_trial,
    "action-continuity": _action_trial,
    "boundary-blowup": _blowup_trial,
    "cohomology": _cohomology_trial,
    "orbit-invariance": _orbit_trial,
}


# -- fixtures ------------------------------------------------------------------


def scalar_fixture_rows(suite: str, ctx: NormContext) -> list[ReportRow]:
    """Exact scalar cases; equality witnesses where the bound is tight."""
    one = np.ones(1, dtype=complex)
    C = core.scalar_algebra(1.0, ctx)
    rows = []
    if suite == "thm-neumann":
        _, cert = perturbation.neumann_invert(C, one, one, 0.9 * one, 0.1)
        rows.append(_row_from_cert(suite, -1, 0, 1, cert, {"fixture": "a=1, b=0.9, r=0.1"}, kind="fixture"))
    elif suite == "thm-unit-perturb":
        _, cert = perturbation.perturbed_unit(C, core.scalar_algebra(1.1, ctx), 0.1)
        rows.append(_row_from_cert(suite, -1, 0, 1, cert, {"fixture": "eps=0.1"}, kind="fixture"))
    elif suite == "thm-unit-distance":
        for name, other in (("identical", C), ("eps=0.1", core.scalar_algebra(1.1, ctx))):
            cert = perturbation.unit_distance_bound(C, other)
            rows.append(_row_from_cert(suite, -1, 0, 1, cert, {"fixture": name}, kind="fixture"))
    elif suite == "thm-inverse-perturb":
        _, cert = perturbation.perturbed_inverse_bound(C, core.scalar_algebra(1.01, ctx), one, 0.08, 2.0)
        rows.append(_row_from_cert(suite, -1, 0, 1, cert, {"fixture": "eps=0.01, M=2"}, kind="fixture"))
    elif suite == "boundary-blowup":
        rep = moduli.boundary_blowup_experiment(
            lambda eps: core.scalar_algebra(eps, ctx), [1, 0.5, 0.25, 0.125], core.zero_algebra(1, ctx)
        )
        dev = max(abs(u - 1.0 / eps) for eps, _, u in rep.rows)
        ok = rep.monotone and dev == 0.0
        rows.append(ReportRow(suite, "fixture", -1, 0, 1, "ok" if ok else "violated", ok, True, 0.0, dev, None, rep.to_dict()))
    elif suite == "cohomology":
        fixtures = (
            ("C", C, [1, 0, 0, 0]),
            ("M2", core.convolution_algebra(2, [1.0, 1.0], ctx), [1, 0, 0, 0]),
            ("zero", core.zero_algebra(1, ctx), [1, 1, 1, 1]),
        )
        for name, m, expected in fixtures:
            sig = moduli.hochschild_dims(m)
            dd = _dd_norm(m)
            ok = sig.dims == expected and dd <= 1e-10
            rows.append(
                ReportRow(
                    suite, "fixture", -1, 0, m.dim, "ok" if ok else "violated", ok, True, 1e-10, dd, None,
                    sig.to_dict() | {"fixture": name, "expected": expected},
                )
            )
    return rows


# -- driver --------------------------------------------------------------------


def _run_trial(args) -> ReportRow:
    cfg, trial, dim, r, seed = args
    fn = _raw_noise_trial if cfg.raw_noise else _TRIALS[cfg.suite]
    t0 = time.perf_counter()
    try:
        row = fn(cfg, trial, dim, r, seed)
    except HypothesisError as exc:
        row = _unmet(cfg.suite, trial, seed, dim, str(exc), cfg.ctx.bilinear_exact)
    except (ConvergenceError, RuntimeError) as exc:
        row = ReportRow(cfg.suite, "trial", trial, seed, dim, "violated", False, cfg.ctx.bilinear_exact, None, None, None, {"error": str(exc)})
    row.hypothesis.setdefault("r", r)
    row.wall_time = time.perf_counter() - t0
    return row


def trial_plan(cfg: ExperimentConfig) -> list[tuple]:
    seeds = trial_seeds(cfg.seed, cfg.trials)
    nd = len(cfg.dims)
    return [
        (cfg, i, cfg.dims[i % nd], cfg.r_values[(i // nd) % len(cfg.r_values)], seeds[i])
        for i in range(cfg.trials)
    ]


@dataclass
class SuiteResult:
    rows: list
    summary: dict

    @property
    def exit_status(self) -> int:
        return 1 if self.summary["violations"] else 0


def summarize(rows: list[ReportRow]) -> dict:
    ratios = [r.ratio for r in rows if r.ratio is not None and r.status in ("ok", "violated")]
    return {
        "rows": len(rows),
        "ok": sum(r.status == "ok" for r in rows),
        "violated": sum(r.status == "violated" for r in rows),
        "violations": sum(r.counts_as_violation for r in rows),
        "hypothesis_unmet": sum(r.status == "hypothesis-unmet" for r in rows),
        "ratio_min": min(ratios) if ratios else None,
        "ratio_mean": float(np.mean(ratios)) if ratios else None,
        "ratio_max": max(ratios) if ratios else None,
    }


def run_suite(cfg: ExperimentConfig) -> SuiteResult:
    t0 = time.perf_counter()
    rows = scalar_fixture_rows(cfg.suite, cfg.ctx) if cfg.fixtures and not cfg.raw_noise else []
    for row in rows:
        row.wall_time = time.perf_counter() - t0
    plan = trial_plan(cfg)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows.extend(pool.map(_run_trial, plan, chunksize=max(1, len(plan) // (4 * cfg.workers))))
    else:
        rows.extend(_run_trial(p) for p in plan)
    return SuiteResult(rows, summarize(rows))


def write_jsonl(rows, path) -> None:
    with open(path, "w") as fh:
        for row in rows:
            fh.write(row.to_json() + "\n")


def write_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for row in rows:
            d = _clean(asdict(row))
            d["hypothesis"] = json.dumps(d["hypothesis"], sort_keys=True)
            w.writerow([d[c] for c in CSV_COLUMNS])
