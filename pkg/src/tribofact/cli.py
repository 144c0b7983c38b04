"""Command-line entry point: ``tribofact <command> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from . import bounds
from .factorials import decompose, smooth_index_scan_neg, smooth_index_scan_pos
from .intervals import DEFAULT_PRECISION, Undecided
from .search import (
    NEGATIVE,
    OVERRIDABLE,
    POSITIVE,
    SolutionRecord,
    claimed,
    run_pipeline,
    search_negative,
    search_positive,
    verify_claimed,
    window_product,
)
from .sequence import term
from .valuations import UndefinedValuation, nu, nu2_tribo_closed

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2
COMMANDS = ("term", "valuation", "decompose", "smooth-scan", "bounds", "refine", "search", "verify", "reproduce")


class UsageError(ValueError):
    pass


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _parts(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.replace(" ", "").split(",") if p)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parts must be comma-separated integers, got {text!r}") from None


def _override(text: str) -> tuple[str, int]:
    key, sep, val = text.partition("=")
    if not sep or key not in OVERRIDABLE:
        raise argparse.ArgumentTypeError(f"override must be one of {', '.join(OVERRIDABLE)} as key=value")
    try:
        return key, int(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"override value must be an integer, got {val!r}") from None


def _theorem(text: str) -> str:
    if text not in ("1", "2", "3"):
        raise argparse.ArgumentTypeError("theorem must be 1, 2 or 3")
    return "T" + text


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--precision-bits", type=_positive_int, default=DEFAULT_PRECISION)
    common.add_argument("--parallelism", type=_positive_int, default=os.cpu_count() or 1)

    parser = argparse.ArgumentParser(prog="tribofact", description="Tribonacci factorial-product toolkit")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("term", parents=[common], help="exact T_n (negative n allowed)")
    p.add_argument("index", type=int)
    p.add_argument("--method", choices=("iterate", "matrix"), default="iterate")

    p = sub.add_parser("valuation", parents=[common], help="nu_p(T_n), with the residue branch for p = 2")
    p.add_argument("index", type=int)
    p.add_argument("--p", type=int, default=2)

    p = sub.add_parser("decompose", parents=[common], help="write N as a product of factorials")
    p.add_argument("value", type=_positive_int)
    p.add_argument("--max-solutions", type=_positive_int, default=16)

    p = sub.add_parser("smooth-scan", parents=[common], help="indices whose term is B-smooth")
    p.add_argument("--side", choices=(POSITIVE, NEGATIVE), default=POSITIVE)
    p.add_argument("--n-min", type=int, default=None)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--smooth-bound", type=_positive_int, required=True)

    p = sub.add_parser("bounds", parents=[common], help="certified x, r, n (and rd) bounds")
    p.add_argument("--theorem", type=_theorem, required=True)
    p.add_argument("--d", type=int, default=2, help="smallest gap (theorem 3)")
    p.add_argument("--claim", type=int, default=None, help="x bound to certify (default: the stated one)")

    p = sub.add_parser("refine", parents=[common], help="refinement loop for the large-n case")
    p.add_argument("--theorem", type=_theorem, required=True)
    p.add_argument("--threshold", type=int, required=True)

    p = sub.add_parser("search", parents=[common], help="exhaustive window search")
    p.add_argument("--side", choices=(POSITIVE, NEGATIVE), default=POSITIVE)
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--r-min", type=int, default=1)
    p.add_argument("--r-max", type=int, required=True)
    p.add_argument("--smooth-bound", type=_positive_int, default=None)
    p.add_argument("--no-prefilter", action="store_true", help="decompose every product (positive side)")
    p.add_argument("--max-solutions", type=_positive_int, default=16)

    p = sub.add_parser("verify", parents=[common], help="check a claimed solution by exact multiplication")
    p.add_argument("--side", choices=(POSITIVE, NEGATIVE), default=POSITIVE)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--parts", type=_parts, required=True, help="factorial parts, e.g. 3,6,7")

    p = sub.add_parser("reproduce", parents=[common], help="run a theorem's full pipeline")
    p.add_argument("--theorem", type=_theorem, required=True)
    p.add_argument("--output", default=None, help="also write the JSON report here")
    p.add_argument("--override", type=_override, action="append", default=[],
                   help=argparse.SUPPRESS)  # fault-injection hook
    return parser


# ---------------------------------------------------------------- rendering


def _emit(fmt: str, payload: dict, text: str, rows: list[list[str]] | None = None) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2))
    elif fmt == "csv":
        if rows is None:
            raise UsageError("csv output is only available for smooth-scan and search")
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(rows)
        sys.stdout.write(buf.getvalue())
    else:
        print(text)


def _records_rows(records: list[SolutionRecord]) -> list[list[str]]:
    rows = [["side", "n", "r", "product_abs", "representations"]]
    for rec in records:
        rows.append([rec.side, str(rec.n), str(rec.r), str(rec.product_abs),
                     " | ".join(str(rep) for rep in rec.representations)])
    return rows


def _cmd_term(a):
    t = term(a.index, a.method)
    _emit(a.format, {"index": str(t.index), "value": str(t.value)}, str(t.value))
    return EXIT_OK


def _cmd_valuation(a):
    t = term(a.index).value
    try:
        v = nu(a.p, t)
    except UndefinedValuation:
        raise UsageError(f"T_{a.index} = 0 has no finite valuation") from None
    payload = {"index": str(a.index), "p": str(a.p), "valuation": str(v), "branch": None}
    text = str(v)
    if a.p == 2 and a.index >= 1:
        case = nu2_tribo_closed(a.index)
        payload["branch"] = case.residue_branch
        text = f"{v}  ({case.residue_branch})"
    _emit(a.format, payload, text)
    return EXIT_OK


def _cmd_decompose(a):
    reps = decompose(a.value, a.max_solutions)
    payload = {"value": str(a.value), "representations": [[str(m) for m in r.parts] for r in reps]}
    text = "\n".join(str(r) for r in reps) if reps else "not a factorial product"
    _emit(a.format, payload, text)
    return EXIT_OK


def _cmd_smooth_scan(a):
    if a.side == POSITIVE:
        found = smooth_index_scan_pos(a.n_max, a.smooth_bound)
        if a.n_min is not None:
            found = [m for m in found if m >= a.n_min]
    else:
        found = smooth_index_scan_neg(18 if a.n_min is None else a.n_min, a.n_max, a.smooth_bound)
    payload = {"side": a.side, "smooth_bound": str(a.smooth_bound), "indices": [str(m) for m in found]}
    rows = [["side", "index"]] + [[a.side, str(m)] for m in found]
    _emit(a.format, payload, " ".join(map(str, found)), rows)
    return EXIT_OK


def _cmd_bounds(a):
    if a.theorem == "T1":
        cert = bounds.cascade_theorem1(a.claim if a.claim is not None else bounds.STATED_X["T1"], a.precision_bits)
    elif a.theorem == "T2":
        cert = bounds.cascade_theorem2(a.claim if a.claim is not None else bounds.STATED_X["T2"], a.precision_bits)
    else:
        cert = bounds.cascade_theorem3(a.d, a.claim if a.claim is not None else bounds.STATED_X["T3"],
                                       a.precision_bits)
    lines = [f"{cert.theorem} (d={cert.d}): x <= {cert.x_max}, r <= {cert.r_max}, n <= {cert.n_max}"
             + (f", rd <= {cert.rd_max}" if cert.rd_max is not None else ""),
             f"certified: {cert.certified}"]
    lines += [f"  {s.id}: {s.bound}" for s in cert.trace]
    _emit(a.format, cert.to_json(), "\n".join(lines))
    return EXIT_OK if cert.certified else EXIT_CHECK


def _cmd_refine(a):
    fn = bounds.refine_case_theorem1 if a.theorem == "T1" else bounds.refine_case_theorem2
    ref = fn(a.threshold, precision_bits=a.precision_bits)
    lines = [f"step {s.step}: r <= {s.r_bound}, x <= {s.x_bound}, n <= {s.n_bound}" for s in ref.states]
    lines.append(f"eliminated: {ref.eliminated} ({ref.reason})")
    _emit(a.format, ref.to_json(), "\n".join(lines))
    return EXIT_OK


def _cmd_search(a):
    if a.side == POSITIVE:
        if a.smooth_bound is None and not a.no_prefilter:
            raise UsageError("positive search needs --smooth-bound unless --no-prefilter is given")
        hits = search_positive(a.n_min, a.n_max, a.r_min, a.r_max, a.smooth_bound or 2,
                               prefilter=not a.no_prefilter, parallelism=a.parallelism,
                               max_solutions=a.max_solutions)
    else:
        hits = search_negative(a.n_min, a.n_max, a.r_min, a.r_max, a.smooth_bound,
                               parallelism=a.parallelism, max_solutions=a.max_solutions)
    text = "\n".join(f"({h.n}, {h.r}) {h.product_abs} = " + " | ".join(map(str, h.representations))
                     for h in hits) or "no solutions"
    _emit(a.format, {"solutions": [h.to_json() for h in hits]}, text, _records_rows(hits))
    return EXIT_OK


def _cmd_verify(a):
    rec = claimed(a.side, a.n, a.r, a.parts)
    ok = verify_claimed(rec)
    actual = window_product(a.side, a.n, a.r)
    payload = {"side": a.side, "n": str(a.n), "r": str(a.r), "parts": [str(m) for m in rec.representations[0].parts],
               "claimed_product": str(rec.product_abs), "window_product": str(actual), "verified": ok}
    _emit(a.format, payload, f"{'verified' if ok else 'mismatch'}: window {actual}, claimed {rec.product_abs}")
    return EXIT_OK if ok else EXIT_CHECK


def _cmd_reproduce(a):
    report = run_pipeline(a.theorem, dict(a.override), a.precision_bits, progress=True)
    payload = report.to_json()
    if a.output:
        with open(a.output, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    lines = [f"[{'PASS' if c.passed else 'FAIL'}] {c.id}: {c.description}" for c in report.checks]
    for s in report.solutions:
        lines.append(f"solution ({s.n}, {s.r}) {s.side}: {s.product_abs} = "
                     + " | ".join(map(str, s.representations)))
    lines.append(f"overall: {'PASS' if report.passed else 'FAIL'}"
                 + (f" (first failure: {report.first_failure})" if report.first_failure else ""))
    _emit(a.format, payload, "\n".join(lines), _records_rows(report.solutions))
    return EXIT_OK if report.passed else EXIT_CHECK


_HANDLERS = {
    "term": _cmd_term,
    "valuation": _cmd_valuation,
    "decompose": _cmd_decompose,
    "smooth-scan": _cmd_smooth_scan,
    "bounds": _cmd_bounds,
    "refine": _cmd_refine,
    "search": _cmd_search,
    "verify": _cmd_verify,
    "reproduce": _cmd_reproduce,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return _HANDLERS[args.command](args)
    except (UsageError, ValueError) as exc:
        print(f"tribofact {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Undecided as exc:
        print(f"tribofact {args.command}: undecided: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
