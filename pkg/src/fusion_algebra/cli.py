"""Command-line interface: one subcommand per computation, JSON or text output.

Exit status is 0 on success, 1 when a checked identity fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from importlib import resources
from typing import Callable

import numpy as np

from . import fixed_points as fp
from . import fusion, galois, generators
from .characters import CharacterTable, chi, symmetry_residual, unitarity_residual
from .weight_lattice import AlgebraSpec, CapacityError, format_weight, parse_weight

GOLDEN_TABLE = "table_r8_k5.json"


class UsageError(ValueError):
    pass


class CheckFailed(RuntimeError):
    """A mathematical identity or reproduction target did not hold."""

    def __init__(self, payload: dict):
        super().__init__(payload.get("error", "check failed"))
        self.payload = payload


def _spec(args) -> AlgebraSpec:
    if args.rank is None or args.level is None:
        raise UsageError("--rank and --level are required")
    try:
        return AlgebraSpec(args.rank, args.level, capacity=args.capacity)
    except ValueError as exc:
        raise UsageError(f"--rank/--level: {exc}") from exc


def _weight(text: str | None, flag: str, spec: AlgebraSpec, args) -> tuple[int, ...]:
    if text is None:
        raise UsageError(f"{flag} is required")
    try:
        return parse_weight(text, spec, with_zeroth=not args.no_zeroth)
    except ValueError as exc:
        raise UsageError(f"{flag}: {exc}") from exc


def _int_list(text: str | None, flag: str) -> list[int]:
    if not text:
        raise UsageError(f"{flag} is required")
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"{flag}: cannot parse {text!r}") from exc


def _table(spec: AlgebraSpec, args) -> CharacterTable:
    return CharacterTable(spec, cache_dir=args.cache_dir, use_cache=args.cache_dir is not None)


def _complex(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


# ---------------------------------------------------------------------------
# subcommands


def cmd_enumerate(args) -> dict:
    spec = _spec(args)
    return {"r": spec.r, "k": spec.k, "size": spec.size, "enumeration_hash": spec.enumeration_hash,
            "weights": [format_weight(w) for w in spec.weights]}


def cmd_chi(args) -> dict:
    spec = _spec(args)
    lam = _weight(args.lam, "--lambda", spec, args)
    mu = _weight(args.mu, "--mu", spec, args)
    val = chi(lam, mu, spec)
    return {"lambda": format_weight(lam), "mu": format_weight(mu), "exact": val.to_record(),
            "value": _complex(val.to_complex()), "zero": val.is_zero(), "certified": "exact"}


def cmd_smatrix(args) -> dict:
    spec = _spec(args)
    table = _table(spec, args)
    S = table.S
    out = {"r": spec.r, "k": spec.k, "size": spec.size,
           "unitarity_residual": unitarity_residual(S), "symmetry_residual": symmetry_residual(S)}
    if args.cache_dir is not None:
        out["cache"] = str(table.save())
    if not args.summary:
        out["S"] = [[_complex(z) for z in row] for row in S]
    return out


def cmd_fuse(args) -> dict:
    spec = _spec(args)
    lam = _weight(args.lam, "--lambda", spec, args)
    mu = _weight(args.mu, "--mu", spec, args)
    prod = fusion.fusion_product(lam, mu, _table(spec, args))
    return {format_weight(nu): c for nu, c in sorted(prod.items())}


def cmd_rank(args) -> dict:
    spec = _spec(args)
    res = generators.fusion_rank(spec, max_size=args.max_size, fundamental_only=args.fundamental_only,
                                 table=_table(spec, args))
    rec = res.to_record()
    rec["lower_bound"] = generators.rank_lower_bound(spec).to_record()
    return rec


def cmd_generators(args) -> dict:
    spec = _spec(args)
    table = _table(spec, args)
    div, tau = generators.divisor_generators(spec)
    out = {"r": spec.r, "k": spec.k,
           "divisor": generators.is_generator(div, table).to_record(),
           "divisor_tau": generators.is_generator(tau, table).to_record() if tau else None,
           "corollary1_predicate": generators.corollary1_predicate(spec)}
    if args.gamma:
        members = [_weight(g, "--gamma", spec, args) for g in args.gamma]
        out["gamma"] = generators.is_generator(members, table).to_record()
    return out


def cmd_invertible(args) -> dict:
    spec = _spec(args)
    zeros = fusion.chi_w1_zero_set(spec, prefilter=not args.no_prefilter, validate=args.validate)
    return {"r": spec.r, "k": spec.k, "invertible": not zeros, "zero_count": len(zeros),
            "zeros": [format_weight(w) for w in zeros[:args.limit]],
            "predicate": fusion.conjecture2_predicate(spec),
            "primes": fusion.prime_set(spec), "certified": "exact"}


def cmd_scan_invertible(args) -> dict:
    cells = [(r, k) for r in range(1, args.max_rank + 1) for k in range(1, args.max_level + 1)]
    report = fusion.conjecture2_scan(cells, journal=args.journal, jobs=args.jobs)
    out = {"cells": len(report.records), "mismatches": [rec.to_record() for rec in report.mismatches],
           "records": [rec.to_record() for rec in report.records], "certified": "exact"}
    if report.mismatches:
        raise CheckFailed({**out, "error": f"{len(report.mismatches)} cells disagree with the predicate"})
    return out


def cmd_factorize(args) -> dict:
    spec = _spec(args)
    if args.d is None:
        raise UsageError("-d is required")
    try:
        fp.check_fixed_divisor(spec, args.d)
    except ValueError as exc:
        raise UsageError(f"-d: {exc}") from exc
    if args.lam is not None:
        lam = _weight(args.lam, "--lambda", spec, args)
        recs = [fp.factorization_verify(lam, phi, args.d, spec) for phi in fp.fixed_points(spec, args.d)]
        out = {"lambda": format_weight(lam), "d": args.d, "results": [
            {"phi": format_weight(rec.phi), "member": rec.member, "zero": rec.lhs_zero,
             "exact_ok": rec.exact_ok, "certified": "exact",
             "phase": rec.phase.to_record() if rec.phase is not None else None} for rec in recs]}
        if not all(rec.exact_ok for rec in recs):
            raise CheckFailed({**out, "error": "factorization failed"})
        return out
    rep = fp.verify_dichotomy(spec, args.d, check_float=not args.no_float)
    out = {"r": spec.r, "k": spec.k, "d": args.d, "checked": rep.checked, "ok": rep.ok,
           "failures": len(rep.failures), "non_constant_phase": len(rep.non_constant_phase),
           "literal_phase_failures": rep.literal_phase_failures,
           "max_float_residual": rep.max_float_residual, "certified": "exact"}
    if not rep.ok:
        raise CheckFailed({**out, "error": "factorization identity failed"})
    return out


def cmd_nz_census(args) -> dict:
    spec = _spec(args)
    if args.d is None:
        raise UsageError("-d is required")
    try:
        census = fp.nz_census(spec, args.d, per_fixed_point=not args.counts_only)
    except ValueError as exc:
        raise UsageError(f"-d: {exc}") from exc
    rec = census.to_record()
    rec["certified"] = "exact"
    return rec


def cmd_zero_construct(args) -> dict:
    if args.rbar is None or args.kbar is None:
        raise UsageError("--rbar and --kbar are required")
    if (args.primes is None) != (args.mults is None):
        raise UsageError("--primes and --mults go together")
    try:
        if args.primes is None:
            res = fusion.find_zero_construction(args.rbar, args.kbar)
        else:
            res = fusion.construct_zero_weight(args.rbar, args.kbar, _int_list(args.primes, "--primes"),
                                               _int_list(args.mults, "--mults"))
    except fusion.ZeroConstructionError as exc:
        raise CheckFailed({"error": str(exc)}) from exc
    return {"weight": format_weight(res.weight), "labels": list(res.labels), "recipe": res.recipe,
            "progressions": [list(p) for p in res.progressions], "zero": res.certified,
            "certified": "exact"}


def cmd_galois(args) -> dict:
    spec = _spec(args)
    ctx = galois.GaloisContext(spec, _table(spec, args))
    if args.ell is not None:
        try:
            return galois.galois_permutation(args.ell, spec, ctx).to_record()
        except ValueError as exc:
            raise UsageError(f"--ell: {exc}") from exc
    rep = galois.verify_sigma_formula(spec, ctx)
    out = {"r": spec.r, "k": spec.k, "sigma_formula_ok": rep.ok, "checked": [list(c) for c in rep.checked],
           "failures": [[ell, format_weight(mu)] for ell, mu in rep.failures],
           "literal_reading_failures": len(rep.literal_failures), "certified": "exact"}
    if not rep.ok:
        raise CheckFailed({**out, "error": "sigma formula failed"})
    return out


def cmd_fields(args) -> dict:
    spec = _spec(args)
    try:
        rep = galois.field_identification(spec, galois.GaloisContext(spec, _table(spec, args)))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = rep.to_record()
    if not rep.ok:
        raise CheckFailed({**out, "error": "field identification disagrees with the prediction"})
    return out


def cmd_table_repro(args) -> dict:
    if args.golden:
        golden = generators.load_table(args.golden)
    else:
        with resources.files("fusion_algebra").joinpath("fixtures", GOLDEN_TABLE).open() as fh:
            golden = json.load(fh)["cells"]
    cells = [c for c in golden if c["r"] <= args.max_rank and c["k"] <= args.max_level]
    rows, problems = [], {}
    for cell in cells:
        spec = AlgebraSpec(cell["r"], cell["k"])
        got = generators.reproduce_cell(spec, generators.golden_basis(cell, spec))
        rec = got.to_record()
        issues = generators.compare_cell(cell, got)
        rec["matches_golden"] = not issues
        rows.append(rec)
        if issues:
            problems[f"{cell['r']},{cell['k']}"] = issues
    out = {"cells": rows, "mismatches": problems}
    if problems:
        raise CheckFailed({**out, "error": f"{len(problems)} cells differ from the golden table"})
    return out


COMMANDS: dict[str, Callable] = {
    "enumerate": cmd_enumerate,
    "chi": cmd_chi,
    "smatrix": cmd_smatrix,
    "fuse": cmd_fuse,
    "rank": cmd_rank,
    "generators": cmd_generators,
    "invertible": cmd_invertible,
    "scan-invertible": cmd_scan_invertible,
    "factorize": cmd_factorize,
    "nz-census": cmd_nz_census,
    "zero-construct": cmd_zero_construct,
    "galois": cmd_galois,
    "fields": cmd_fields,
    "table-repro": cmd_table_repro,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rank", type=int, help="r in A_r")
    common.add_argument("--level", type=int, help="level k")
    common.add_argument("--no-zeroth", action="store_true",
                        help="weights omit lambda_0, which is inferred from the level")
    common.add_argument("--format", choices=["json", "text"], default="json")
    common.add_argument("--cache-dir", default=None, help="S-table cache directory (enables caching)")
    common.add_argument("--capacity", type=int, default=500_000, help="largest weight set allowed")

    parser = argparse.ArgumentParser(prog="fusion-algebra", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    add("enumerate", "list the level-k weights in table order")
    p = add("chi", "exact fusion eigenvalue chi_lambda(mu)")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--mu")
    p = add("smatrix", "modular S matrix (floats)")
    p.add_argument("--summary", action="store_true", help="residuals only, no matrix")
    p = add("fuse", "decompose lambda x mu")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--mu")
    p = add("rank", "fusion-rank search")
    p.add_argument("--max-size", type=int, default=3)
    p.add_argument("--fundamental-only", action="store_true")
    p = add("generators", "divisor generators and generator tests")
    p.add_argument("--gamma", action="append", help="weight to include in a tested set (repeatable)")
    p = add("invertible", "exact zeros of chi_{w^1}")
    p.add_argument("--no-prefilter", action="store_true")
    p.add_argument("--validate", action="store_true", help="recheck cells the prefilter skips")
    p.add_argument("--limit", type=int, default=20, help="number of zeros to list")
    p = add("scan-invertible", "compare the prime predicate with exact invertibility on a grid")
    p.add_argument("--max-rank", type=int, default=5)
    p.add_argument("--max-level", type=int, default=8)
    p.add_argument("--journal", default=None, help="JSON-lines journal for resuming")
    p.add_argument("--jobs", type=int, default=1)
    p = add("factorize", "fixed-point factorization check")
    p.add_argument("-d", type=int)
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--no-float", action="store_true")
    p = add("nz-census", "counts of NZ(d) and ality-compatible weights")
    p.add_argument("-d", type=int)
    p.add_argument("--counts-only", action="store_true")
    p = add("zero-construct", "build a weight with chi_{w^1} = 0 from prime progressions")
    p.add_argument("--rbar", type=int)
    p.add_argument("--kbar", type=int)
    p.add_argument("--primes", help="comma-separated primes; omitted means search all decompositions")
    p.add_argument("--mults", help="comma-separated multiplicities matching --primes")
    p = add("galois", "Galois permutation for one ell, or the sigma formula check")
    p.add_argument("--ell", type=int)
    add("fields", "identify the fields generated by chi and S")
    p = add("table-repro", "reproduce the fusion-basis table")
    p.add_argument("--max-rank", type=int, default=8)
    p.add_argument("--max-level", type=int, default=5)
    p.add_argument("--golden", default=None, help="golden table JSON (defaults to the bundled one)")
    return parser


def _emit(payload: dict, fmt: str, stream) -> None:
    if fmt == "json":
        stream.write(json.dumps(payload, default=_json_default) + "\n")
        return
    for key, val in payload.items():
        if isinstance(val, (dict, list)):
            val = json.dumps(val, default=_json_default)
        stream.write(f"{key}: {val}\n")


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        payload = COMMANDS[args.command](args)
    except UsageError as exc:
        stderr.write(f"usage error: {exc}\n")
        return 2
    except CapacityError as exc:
        stderr.write(f"usage error: {exc} (raise --capacity to allow it)\n")
        return 2
    except CheckFailed as exc:
        _emit(exc.payload, args.format, stdout)
        stderr.write(f"check failed: {exc}\n")
        return 1
    except (fusion.IntegralityError, galois.GaloisMatchError) as exc:
        stderr.write(f"check failed: {exc}\n")
        return 1
    if isinstance(payload, dict) and args.format == "text":
        payload.setdefault("elapsed_s", round(time.perf_counter() - start, 3))
    _emit(payload, args.format, stdout)
    return 0


def main() -> None:
    sys.exit(run())
