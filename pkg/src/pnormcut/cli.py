"""``pnormcut`` command-line front end.

Subcommands: ``build``, ``solve``, ``maxcut``, ``verify``, ``epsilons``.
Exit status: 0 on success, 1 when a verification or decode certificate fails,
2 on usage, parse or precondition errors.

Every command produces a run report: the command echo, a digest of the
inputs, a results record, per-property outcomes and timings.  With identical
inputs and seed the results record is byte-identical; only ``timings`` vary.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .graph import (DEFAULT_ENUM_LIMIT, EnumerationLimitError, GraphError, incidence_matrix,
                    maxcut_bruteforce, parse_graph)
from .matrix import MatrixFormatError, parse_matrix, write_matrix
from .norms import (AscentConfig, NormEstimate, infinity_p_norm_exact, norm_1, p_norm_ascent,
                    p_norm_sign_search)
from .numerics import PExponent, conjugate, format_hp, to_rational
from .reduction import (CONSTRUCTIONS, DEFAULT_ROW_LIMIT, ConstructionError,
                        InsufficientPrecisionError, build_z, build_zdoublestar, build_zstar,
                        build_ztilde, pad_square, pipeline_record, required_epsilon_inftyp,
                        required_epsilon_pnorm, solve_maxcut_via_pnorm)
from .verify import SUITES, run_suites

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

SOLVE_MODES = ("inftyp-exact", "pnorm-ascent", "pnorm-signsearch")

_DIGITS = 30


class UsageError(Exception):
    """Bad input detected after argument parsing; maps to exit status 2."""


# -- report plumbing ----------------------------------------------------------

def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes() if path != "-" else sys.stdin.buffer.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _inputs_digest(args: argparse.Namespace, files: dict[str, bytes]) -> str:
    params = {k: v for k, v in sorted(vars(args).items())
              if k not in ("json", "out", "handler") and not isinstance(v, bytes)}
    payload = {
        "params": {k: str(v) for k, v in params.items()},
        "files": {name: _sha256(data) for name, data in sorted(files.items())},
    }
    return _sha256(json.dumps(payload, sort_keys=True).encode())


def _report(argv: list[str], args, files, results: dict, properties: list,
            timings: dict) -> dict:
    return {
        "command": ["pnormcut", *argv],
        "inputs_digest": _inputs_digest(args, files),
        "results": results,
        "properties": properties,
        "timings": {k: round(v, 6) for k, v in timings.items()},
    }


def _emit(report: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(report, indent=2, sort_keys=True))
        return
    _print_human(report["results"])
    for prop in report["properties"]:
        status = "PASS" if prop["passed"] else "FAIL"
        print(f"[{status}] {prop['property']}  worst slack {prop['worst_slack']:.3e}"
              f"  ({prop['cases']} cases)")


def _print_human(results: dict, indent: str = "") -> None:
    for key, value in results.items():
        if isinstance(value, dict):
            print(f"{indent}{key}:")
            _print_human(value, indent + "  ")
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            print(f"{indent}{key}:")
            for item in value:
                _print_human(item, indent + "  ")
                print()
        else:
            print(f"{indent}{key}: {value}")


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, str)) or value is None:
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return format_hp(value, _DIGITS)


def _estimate_record(est: NormEstimate, p: PExponent) -> dict:
    meta = {k: v for k, v in est.meta.items() if k != "backend"}
    return {
        "p": str(p),
        "value": format_hp(est.value, _DIGITS),
        "witness": [float(v) for v in est.witness],
        "method": est.method,
        "certified": est.certified,
        "meta": _jsonable(meta),
    }


# -- argument helpers ---------------------------------------------------------

def _p(text: str) -> PExponent:
    try:
        return PExponent.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _rational(text: str):
    try:
        return to_rational(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _cfg(args) -> AscentConfig:
    return AscentConfig(restarts=args.restarts, tol=args.tol, seed=args.seed)


def _load_graph(path: str, files: dict):
    data = _read(path)
    files["graph"] = data
    return parse_graph(data)


# -- subcommands --------------------------------------------------------------

def cmd_build(args, files) -> tuple[dict, list, dict, int]:
    t0 = time.perf_counter()
    g = _load_graph(args.graph, files)
    c = args.construction
    if c == "ztilde":
        inst = build_ztilde(g, args.p)
    elif c == "zstar":
        inst = build_zstar(g, args.p)
    elif c == "zdoublestar":
        inst = build_zdoublestar(g, args.p, args.k, row_limit=args.row_limit)
    else:
        inst = build_z(g, args.p, args.alpha)
    matrix = inst.dense
    meta = inst.metadata()
    if c == "padded":
        matrix = pad_square(matrix)
        meta.update(provenance="padded", rows=matrix.rows, cols=matrix.cols)
    meta["ternary"] = matrix.is_ternary()
    out = Path(args.out)
    sidecar = out.with_name(out.name + ".json")
    try:
        with out.open("w") as fh:
            write_matrix(matrix, fh, rational=args.rational)
        sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc.strerror}") from None
    results = {"construction": c, "matrix_file": str(out), "metadata_file": str(sidecar),
               "instance": meta}
    return results, [], {"build": time.perf_counter() - t0}, EXIT_OK


def cmd_solve(args, files) -> tuple[dict, list, dict, int]:
    t0 = time.perf_counter()
    if args.graph:
        matrix = incidence_matrix(_load_graph(args.graph, files))
        source = "incidence"
    else:
        data = _read(args.matrix)
        files["matrix"] = data
        matrix = parse_matrix(data)
        source = "matrix"
    t_load = time.perf_counter() - t0
    p = args.p
    t0 = time.perf_counter()
    if args.mode == "inftyp-exact":
        est = infinity_p_norm_exact(matrix, p, limit=args.limit_enum, bits=args.bits)
    elif args.mode == "pnorm-signsearch":
        est = p_norm_sign_search(matrix, p, limit=args.limit_enum, bits=args.bits)
    elif p == 1:
        est = norm_1(matrix)
    else:
        est = p_norm_ascent(matrix, p, _cfg(args), bits=args.bits)
    results = {"mode": args.mode, "source": source, "shape": list(matrix.shape),
               "estimate": _estimate_record(est, p)}
    return results, [], {"load": t_load, "solve": time.perf_counter() - t0}, EXIT_OK


def cmd_maxcut(args, files) -> tuple[dict, list, dict, int]:
    t0 = time.perf_counter()
    g = _load_graph(args.graph, files)
    timings = {"load": time.perf_counter() - t0}
    if args.method == "oracle":
        t0 = time.perf_counter()
        cut = maxcut_bruteforce(g, limit=args.limit_enum)
        timings["oracle"] = time.perf_counter() - t0
        results = {"method": "oracle", "n": g.n, "edges": g.m, "maxcut": cut.value,
                   "witness": list(cut.witness)}
        return results, [], timings, EXIT_OK

    p = args.p
    if p <= 1 or p == 2:
        raise ConstructionError("p must exceed 2 for this construction")
    dual = p < 2
    # For 1 < p < 2 the reduction runs on the conjugate exponent, whose norm of
    # Z equals the p-norm of Z transposed.
    gadget_p = conjugate(p) if dual else p
    t0 = time.perf_counter()
    res = solve_maxcut_via_pnorm(g, gadget_p, args.alpha, _cfg(args), bits=args.bits,
                                 limit=args.limit_enum)
    timings["pipeline"] = time.perf_counter() - t0
    record = pipeline_record(g, res)
    timings.update({f"pipeline.{k}": v for k, v in record.pop("timings").items()})
    results = {"method": "pnorm", "requested_p": str(p), "dualized": dual,
               "maxcut": res.maxcut_rounded, "certified": res.rounding_valid,
               "decode": record}
    if dual:
        t0 = time.perf_counter()
        zt = res.details["instance"].matrix.T
        est = p_norm_ascent(zt, p, _cfg(args))
        timings["transpose_check"] = time.perf_counter() - t0
        results["transpose_norm"] = format_hp(est.value, 17)
    status = EXIT_OK if res.rounding_valid else EXIT_FAILED
    return results, [], timings, status


def cmd_verify(args, files) -> tuple[dict, list, dict, int]:
    suites = run_suites(args.suite, seed=args.seed, n_max=args.n)
    results = {"suite": args.suite, "seed": args.seed, "passed": all(s.passed for s in suites)}
    if args.json:
        results["suites"] = [s.to_record() for s in suites]
    props = [dict(c.to_record(), property=f"{s.suite}: {c.name}")
             for s in suites for c in s.checks]
    for prop in props:
        prop.pop("detail", None)
    timings = {s.suite: s.seconds for s in suites}
    return results, props, timings, EXIT_OK if results["passed"] else EXIT_FAILED


def cmd_epsilons(args, files) -> tuple[dict, list, dict, int]:
    bits = args.bits
    digits = max(17, math.ceil(bits * math.log10(2)))
    t0 = time.perf_counter()
    results = {"p": str(args.p), "bits": bits}
    eps = required_epsilon_inftyp(args.p, args.delta, bits)
    results["inftyp"] = {"delta": str(args.delta), "epsilon": format_hp(eps, digits)}
    if args.n is not None:
        eps = required_epsilon_pnorm(args.n, args.p, bits)
        results["pnorm"] = {"n": args.n, "epsilon": format_hp(eps, digits)}
    return results, [], {"epsilons": time.perf_counter() - t0}, EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=_p, default=PExponent(3),
                        help="exponent as an integer, decimal or a/b (default 3)")
    common.add_argument("--alpha", type=_rational, default=None,
                        help="gadget weight (default 64pn^8/(p-2))")
    common.add_argument("--bits", type=int, default=None,
                        help="working precision in bits")
    common.add_argument("--restarts", type=int, default=AscentConfig.restarts)
    common.add_argument("--tol", type=float, default=AscentConfig.tol)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--limit-enum", type=int, default=DEFAULT_ENUM_LIMIT,
                        help="largest column count for exhaustive enumeration")
    common.add_argument("--json", action="store_true", help="print the full JSON report")

    parser = argparse.ArgumentParser(
        prog="pnormcut",
        description="Encode MAX-CUT instances as matrix p-norm problems and decode them back.")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", parents=[common], help="write a reduction matrix")
    b.add_argument("graph", help="graph file ('n m' header, then 'u v' lines)")
    b.add_argument("--construction", choices=CONSTRUCTIONS, default="z")
    b.add_argument("--k", type=int, default=None, help="gadget repetitions for zdoublestar")
    b.add_argument("--row-limit", type=int, default=DEFAULT_ROW_LIMIT)
    b.add_argument("--rational", action="store_true", help="write exact num/den entries")
    b.add_argument("--out", required=True, help="matrix output path (+ .json sidecar)")
    b.set_defaults(handler=cmd_build)

    s = sub.add_parser("solve", parents=[common], help="estimate a matrix norm")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", help="matrix file")
    src.add_argument("--graph", help="graph file (solves its incidence matrix)")
    s.add_argument("--mode", choices=SOLVE_MODES, default="pnorm-ascent")
    s.set_defaults(handler=cmd_solve)

    m = sub.add_parser("maxcut", parents=[common], help="maximum cut of a graph")
    m.add_argument("graph", help="graph file")
    m.add_argument("--method", choices=("oracle", "pnorm"), default="oracle")
    m.set_defaults(handler=cmd_maxcut)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", choices=(*SUITES, "all"))
    v.add_argument("--n", type=int, default=None, help="largest graph/gadget size")
    v.set_defaults(handler=cmd_verify)

    e = sub.add_parser("epsilons", parents=[common], help="print the accuracy schedules")
    e.add_argument("--n", type=int, default=None,
                   help="vertex count (enables the p-norm schedule)")
    e.add_argument("--delta", type=_rational, default=_rational("1"))
    e.set_defaults(handler=cmd_epsilons)
    return parser


_INPUT_ERRORS = (GraphError, MatrixFormatError, ConstructionError, EnumerationLimitError,
                 InsufficientPrecisionError, UsageError, ValueError)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    if args.bits is None and args.command in ("solve", "epsilons"):
        args.bits = 128
    files: dict[str, bytes] = {}
    try:
        results, props, timings, status = args.handler(args, files)
    except _INPUT_ERRORS as exc:
        print(f"pnormcut {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(_report(argv, args, files, results, props, timings), args.json)
    return status


if __name__ == "__main__":
    sys.exit(main())
