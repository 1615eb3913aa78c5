"""Command-line interface.

Every subcommand prints one JSON document to stdout.  Exit codes: 0 success,
1 a check failed (non-associative input, bound violation, ...), 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from . import core, harness, moduli, spectral
from .errors import AssociativityError
from .generate import generate_random_unital, generate_twisted, random_monoid
from .norms import NormContext


def parse_element(text: str) -> np.ndarray:
    """``"1+2i,0.5,-i"`` -> complex vector."""
    out = []
    for part in text.split(","):
        part = part.strip().replace(" ", "")
        if not part:
            raise ValueError(f"empty component in element {text!r}")
        try:
            out.append(complex(part.replace("i", "j")))
        except ValueError:
            raise ValueError(f"cannot parse {part!r} as a complex number (expected re+imi)") from None
    return np.array(out, dtype=complex)


def _parse_list(text: str, kind):
    try:
        return [kind(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad list {text!r}") from None


def _complex_json(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v).ravel()]


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True, default=harness._clean))


def _ctx(args, file_ctx: NormContext | None = None) -> NormContext:
    if args.norm is not None:
        return NormContext.from_name(args.norm)
    return file_ctx or NormContext.from_name("l1")


def _load(args):
    tensor, file_ctx = core.load_instance(args.file)
    return core.make_multiplication(tensor, _ctx(args, file_ctx), tol=args.tol)


def _element(args, m):
    a = parse_element(args.element)
    if a.shape != (m.dim,):
        raise ValueError(f"element has {a.size} components but the instance has dimension {m.dim}")
    return a


# -- subcommands ---------------------------------------------------------------


def cmd_validate(args) -> int:
    tensor, file_ctx = core.load_instance(args.file)
    try:
        m = core.make_multiplication(tensor, _ctx(args, file_ctx), tol=args.tol)
    except AssociativityError as exc:
        _emit({"valid": False, "assoc_defect": exc.defect, "witness": list(exc.witness), "message": str(exc)})
        return 1
    _emit(
        {
            "valid": True,
            "dim": m.dim,
            "norm": m.ctx.name,
            "opnorm": m.opnorm,
            "opnorm_exact": m.opnorm_exact,
            "assoc_defect": m.assoc_defect,
            "unital": core.find_unit(m) is not None,
            "commutative": core.is_commutative(m),
        }
    )
    return 0


def cmd_unit(args) -> int:
    m = _load(args)
    e = core.find_unit(m, tol=args.tol)
    if e is None:
        _emit({"unital": False})
        return 1
    _emit({"unital": True, "unit": _complex_json(e), "residual": core.unit_residual(m, e)})
    return 0


def cmd_invert(args) -> int:
    m = _load(args)
    a = _element(args, m)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", spectral.IllConditionedWarning)
        inv = spectral.invert(m, a)
    ill = any(issubclass(w.category, spectral.IllConditionedWarning) for w in caught)
    if inv is None:
        _emit({"invertible": False})
        return 1
    _emit({"invertible": True, "inverse": _complex_json(inv), "ill_conditioned": ill})
    return 0


def cmd_spectrum(args) -> int:
    m = _load(args)
    a = _element(args, m)
    _emit({"spectrum": spectral.spectrum(m, a).to_json()})
    return 0


def cmd_cohomology(args) -> int:
    m = _load(args)
    sig = moduli.hochschild_dims(m, K=args.max_deg, rank_tol=args.rank_tol)
    _emit(sig.to_dict() | {"ranks": list(sig.ranks), "ambiguous": sig.ambiguous})
    return 0


def cmd_orbit(args) -> int:
    m = _load(args)
    rng = np.random.default_rng(args.seed)
    ref = moduli.invariant_signature(m, rank_tol=args.rank_tol)
    mismatches, conds = 0, []
    for _ in range(args.samples):
        t = moduli.random_group_element(rng, m.dim, args.max_cond)
        conds.append(t.cond)
        if moduli.invariant_signature(moduli.act(t, m), rank_tol=args.rank_tol) != ref:
            mismatches += 1
    _emit({"signature": ref.to_dict(), "samples": args.samples, "mismatches": mismatches, "max_cond": max(conds, default=1.0)})
    return 1 if mismatches else 0


def cmd_check_bounds(args) -> int:
    tolerances = {}
    if args.tol is not None:
        tolerances["spectral_tol"] = args.tol
    cfg = harness.ExperimentConfig(
        suite=args.suite,
        trials=args.trials,
        dims=args.dims,
        r_values=args.r,
        seed=args.seed,
        norm=args.norm or "l1",
        tolerances=tolerances,
        raw_noise=args.raw_noise,
        workers=args.workers,
    )
    result = harness.run_suite(cfg)
    if args.report:
        if args.report.endswith(".csv"):
            harness.write_csv(result.rows, args.report)
        else:
            harness.write_jsonl(result.rows, args.report)
    else:
        for row in result.rows:
            print(row.to_json())
    print(json.dumps({"summary": result.summary}, sort_keys=True), file=sys.stderr if not args.report else sys.stdout)
    return result.exit_status


def cmd_generate(args) -> int:
    ctx = _ctx(args)
    rng = np.random.default_rng(args.seed)
    if args.kind == "semigroup":
        tensor = core.semigroup_algebra(random_monoid(rng, args.dim), ctx).tensor
    elif args.kind == "convolution":
        size = int(round(args.dim**0.5))
        if size * size != args.dim:
            raise ValueError(f"convolution algebras have square dimension, got {args.dim}")
        tensor = core.convolution_algebra(size, rng.uniform(0.5, 2.0, size=size), ctx).tensor
    elif args.kind == "twisted":
        tensor = generate_twisted(args.dim, args.seed, literal=args.literal_twist, ctx=ctx)
    else:
        tensor = generate_random_unital(args.dim, args.seed, ctx).tensor
    core.save_instance(args.output, tensor, ctx.name)
    _emit({"written": args.output, "kind": args.kind, "dim": args.dim, "assoc_defect": core.associativity_defect(tensor)})
    return 0


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--norm", choices=["l1", "l2", "linf"], default=None, help="norm on C^n (default l1)")
    common.add_argument("--tol", type=float, default=None, help="override the default tolerance")
    common.add_argument("--workers", type=int, default=1, help="worker processes for check-bounds")
    common.add_argument("--literal-twist", action="store_true", help="use the verbatim twisted-sum formula")
    common.add_argument("--raw-noise", action="store_true", help="check-bounds: add tensor noise, report defects only")
    common.add_argument("--rank-tol", type=float, default=moduli.RANK_TOL, help="relative rank tolerance for cohomology")

    parser = argparse.ArgumentParser(prog="mltplab", description="Perturbation experiments for associative multiplications on C^n.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, file_arg=True):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if file_arg:
            p.add_argument("file", help="instance JSON file")
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "check associativity and report norm data")
    add("unit", cmd_unit, "find the two-sided unit")
    add("invert", cmd_invert, "invert an element").add_argument("--element", required=True, help="comma-separated re+imi")
    add("spectrum", cmd_spectrum, "spectrum of an element").add_argument("--element", required=True, help="comma-separated re+imi")
    add("cohomology", cmd_cohomology, "Hochschild cohomology dimensions").add_argument("--max-deg", type=int, default=3)
    p = add("orbit", cmd_orbit, "invariant signature across random transports")
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-cond", type=float, default=1e3)

    p = add("check-bounds", cmd_check_bounds, "run a seeded experiment suite", file_arg=False)
    p.add_argument("--suite", required=True, choices=harness.SUITES)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--dims", type=lambda s: _parse_list(s, int), default=[1, 2, 3, 4])
    p.add_argument("--r", type=lambda s: _parse_list(s, float), default=[0.1, 0.5, 0.9])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", help="output path ending in .csv or .jsonl")

    p = add("generate", cmd_generate, "write a random instance", file_arg=False)
    p.add_argument("--kind", required=True, choices=["semigroup", "convolution", "twisted", "random-unital"])
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
