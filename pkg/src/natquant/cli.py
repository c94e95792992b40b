"""Command-line front end.

Distributions are given with ``--dist``: a built-in name (``distA``, ``distB``,
``distC``, ``geometric``), ``defn:<permutation>`` such as ``defn:3,2,1``, an
inline JSON object, or a path to a JSON file of the form::

    {"head": ["1/4", "1/2"], "tail": {"start": 3, "coeff": "1", "ratio": "1/2"}}

``tail`` may be omitted or ``null`` for a finite distribution.  Results go to
stdout, diagnostics to stderr.  Exit codes: 0 success, 1 verification
mismatch, 2 usage or parse error, 3 solver error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import re
import sys
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional, Sequence

from . import analysis
from .measure import (
    DiscreteDistribution,
    GeometricTail,
    make_definition_distribution,
    make_distribution,
)
from .solver import (
    SolveResult,
    SolverConfig,
    SolverError,
    verify_centroid_condition,
    verify_voronoi_consistency,
    solve_n_means,
)

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3

_RATIONAL = re.compile(r"^-?\d+(/\d+)?$")


class DistributionParseError(ValueError):
    pass


def format_rational(x: Fraction) -> str:
    return str(x)


def format_decimal(x: Fraction, digits: int) -> str:
    """``x`` to ``digits`` significant digits; display only."""
    with localcontext() as ctx:
        ctx.prec = max(digits, 1)
        return str(Decimal(x.numerator) / Decimal(x.denominator))


def _parse_rational(text: Any, where: str) -> Fraction:
    if not isinstance(text, str) or not _RATIONAL.match(text.strip()):
        raise DistributionParseError(f"{where}: expected a rational string 'num/den', got {text!r}")
    value = Fraction(text.strip())
    if format_rational(value) != text.strip():
        raise DistributionParseError(f"{where}: {text!r} is not in reduced form (use {value})")
    return value


def distribution_from_document(doc: Any) -> DiscreteDistribution:
    if not isinstance(doc, dict):
        raise DistributionParseError("top level: expected an object with 'head' and optional 'tail'")
    unknown = set(doc) - {"head", "tail"}
    if unknown:
        raise DistributionParseError(f"top level: unknown field(s) {sorted(unknown)}")
    head = doc.get("head")
    if not isinstance(head, list):
        raise DistributionParseError("head: expected a list of rational strings")
    probs = [_parse_rational(p, f"head[{i}]") for i, p in enumerate(head)]
    tail_doc = doc.get("tail")
    tail = None
    if tail_doc is not None:
        if not isinstance(tail_doc, dict):
            raise DistributionParseError("tail: expected an object or null")
        missing = {"start", "coeff", "ratio"} - set(tail_doc)
        if missing:
            raise DistributionParseError(f"tail: missing field(s) {sorted(missing)}")
        start = tail_doc["start"]
        if not isinstance(start, int) or isinstance(start, bool):
            raise DistributionParseError(f"tail.start: expected an integer, got {start!r}")
        tail = GeometricTail(
            start,
            _parse_rational(tail_doc["coeff"], "tail.coeff"),
            _parse_rational(tail_doc["ratio"], "tail.ratio"),
        )
    return make_distribution(probs, tail)


def parse_distribution(source: str) -> DiscreteDistribution:
    """Resolve a built-in name, ``defn:`` spec, inline JSON text or file path."""
    if source in analysis.BUILTINS:
        return analysis.BUILTINS[source]()
    if source.startswith("defn:"):
        try:
            perm = [int(x) for x in source[5:].split(",")]
        except ValueError:
            raise DistributionParseError(f"bad permutation in {source!r}") from None
        return make_definition_distribution(perm)
    text = source
    if not source.lstrip().startswith("{"):
        path = Path(source)
        if not path.is_file():
            raise DistributionParseError(f"{source!r} is neither a built-in name nor a readable file")
        text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DistributionParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return distribution_from_document(doc)


def distribution_document(d: DiscreteDistribution) -> dict:
    tail = None
    if d.tail is not None:
        tail = {
            "start": d.tail.start,
            "coeff": format_rational(d.tail.coeff),
            "ratio": format_rational(d.tail.ratio),
        }
    return {"head": [format_rational(p) for p in d.head], "tail": tail}


def render_distribution(d: DiscreteDistribution) -> str:
    return json.dumps(distribution_document(d))


def _block_label(s: int, e: Optional[int]) -> str:
    return f"[{s},∞)" if e is None else f"[{s},{e}]"


def result_record(d: DiscreteDistribution, r: SolveResult, digits: int) -> dict:
    centroid = verify_centroid_condition(d, r)
    voronoi = verify_voronoi_consistency(d, r)
    return {
        "n": r.n,
        "vn": format_rational(r.vn),
        "vn_decimal": format_decimal(r.vn, digits),
        "truncation_used": r.truncation_used,
        "optima": [
            {
                "boundaries": list(o.partition.boundaries),
                "blocks": [_block_label(s, e) for s, e in o.partition.blocks()],
                "centroids": [format_rational(a) for a in o.quantizer.points],
            }
            for o in r.optima
        ],
        "verification": {
            "centroid_condition": centroid.passed,
            "voronoi_consistency": voronoi.passed,
            "midpoint_boundary_hits": len(voronoi.boundary_hits),
        },
    }


def _record_table(rec: dict) -> list[str]:
    lines = [f"n={rec['n']}  V_n={rec['vn']}  (~{rec['vn_decimal']})  optima={len(rec['optima'])}"]
    for o in rec["optima"]:
        blocks = " ".join(o["blocks"])
        lines.append(f"    blocks: {blocks}")
        lines.append(f"    points: {', '.join(o['centroids'])}")
    v = rec["verification"]
    lines.append(f"    centroid={'ok' if v['centroid_condition'] else 'FAIL'}"
                 f"  voronoi={'ok' if v['voronoi_consistency'] else 'FAIL'}")
    return lines


def _cmd_solve(args, d, cfg) -> tuple[int, dict, list[str]]:
    if args.n is None:
        raise _Usage("solve requires --n")
    rec = result_record(d, solve_n_means(d, args.n, cfg), args.digits)
    ok = rec["verification"]["centroid_condition"] and rec["verification"]["voronoi_consistency"]
    return (EXIT_OK if ok else EXIT_MISMATCH), {"results": [rec]}, _record_table(rec)


def _range(args, default_from: int, default_to: int) -> range:
    lo = args.n_from if args.n_from is not None else default_from
    hi = args.n_to if args.n_to is not None else default_to
    if lo < 1 or hi < lo:
        raise _Usage(f"bad n range {lo}..{hi}")
    return range(lo, hi + 1)


def _cmd_sweep(args, d, cfg):
    hi = 10 if d.tail is not None else min(10, len(d.head))
    records = [result_record(d, solve_n_means(d, n, cfg), args.digits) for n in _range(args, 1, hi)]
    lines = [f"{'n':>4}  {'V_n':<24} {'decimal':<14} optima"]
    for rec in records:
        lines.append(f"{rec['n']:>4}  {rec['vn']:<24} {rec['vn_decimal']:<14} "
                     + " | ".join(" ".join(o["blocks"]) for o in rec["optima"]))
    ok = all(r["verification"]["centroid_condition"] and r["verification"]["voronoi_consistency"]
             for r in records)
    return (EXIT_OK if ok else EXIT_MISMATCH), {"results": records}, lines


def _cmd_conjecture(args, d, cfg):
    ns = _range(args, 2, 12)
    reports = analysis.check_conjecture(d, ns.start, ns.stop - 1, cfg)
    docs, lines = [], []
    for rep in reports:
        docs.append({
            "n": rep.n,
            "holds": rep.holds,
            "missing_points": rep.missing_points,
            "per_optimum": [
                {"boundaries": list(o.partition.boundaries), "missing_points": gaps}
                for o, gaps in zip(rep.witness.optima, rep.per_optimum)
            ],
            "vn": format_rational(rep.witness.vn),
        })
        tail = "" if rep.holds else f"  missing {rep.missing_points}"
        lines.append(f"n={rep.n:<3} {'holds' if rep.holds else 'FAILS'}  V_n={rep.witness.vn}"
                     f"  optima={len(rep.witness.optima)}{tail}")
    return EXIT_OK, {"conjecture": docs}, lines


def _cmd_dimension(args, d, cfg):
    n_max = args.n_to if args.n_to is not None else 32
    if not 0 <= args.digits <= 50:
        raise _Usage("--digits must be in [0, 50]")
    samples = analysis.dimension_sequence(d, n_max, args.digits, cfg)
    docs = [{"n": s.n, "vn": format_rational(s.vn), "dn": str(s.dn)} for s in samples]
    lines = [f"n={s.n:<4} V_n={str(s.vn):<28} d_n={s.dn}" for s in samples]
    return EXIT_OK, {"dimension": docs}, lines


def _verify_paper(n_max: int, cfg: SolverConfig) -> tuple[bool, list[dict]]:
    checks: list[dict] = []
    for fx in analysis.paper_fixtures():
        for row in fx.rows:
            res = solve_n_means(fx.dist, row.n, cfg)
            got = tuple(res.boundary_sets)
            ok = res.vn == row.vn and (row.optima is None or got == row.optima)
            ok = ok and verify_centroid_condition(fx.dist, res).passed
            ok = ok and verify_voronoi_consistency(fx.dist, res).passed
            checks.append({
                "check": f"{fx.name} n={row.n}",
                "expected": format_rational(row.vn),
                "got": format_rational(res.vn),
                "optima": [list(b) for b in got],
                "passed": ok,
            })
        if fx.closed_form_from is not None:
            rep = analysis.verify_theorem1(fx.dist, n_max, cfg)
            bad = [c.n for c in rep.failures]
            checks.append({
                "check": f"{fx.name} closed form 2^(3-n)/3, n={rep.k + 2}..{n_max}",
                "expected": "both candidate partitions optimal",
                "got": "all n" if not bad else f"failed at n={bad}",
                "optima": [],
                "passed": rep.passed,
            })
    conj = analysis.check_conjecture(analysis.dist_c(), 5, 5, cfg)[0]
    checks.append({
        "check": "distC n=5 singleton prefix fails",
        "expected": "missing [2]",
        "got": f"missing {conj.missing_points}",
        "optima": [],
        "passed": (not conj.holds) and conj.missing_points == [2],
    })
    return all(c["passed"] for c in checks), checks


def _cmd_verify_paper(args, d, cfg):
    n_max = args.n_to if args.n_to is not None else 40
    ok, checks = _verify_paper(n_max, cfg)
    lines = [f"{'PASS' if c['passed'] else 'FAIL'}  {c['check']}: expected {c['expected']}, got {c['got']}"
             for c in checks]
    return (EXIT_OK if ok else EXIT_MISMATCH), {"checks": checks, "passed": ok}, lines


class _Usage(Exception):
    pass


COMMANDS = {
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "check-conjecture": _cmd_conjecture,
    "verify-paper": _cmd_verify_paper,
    "dimension": _cmd_dimension,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="natquant", description="Exact optimal n-means on the natural numbers.")
    parser.add_argument("command", choices=list(COMMANDS))
    parser.add_argument("--dist", default=None, help="built-in name, defn:<perm>, JSON text or file path")
    parser.add_argument("--n", type=int, default=None)
    parser.add_argument("--n-from", type=int, default=None)
    parser.add_argument("--n-to", type=int, default=None)
    parser.add_argument("--digits", type=int, default=6)
    parser.add_argument("--format", choices=["json", "table"], default="table")
    parser.add_argument("--max-trunc", type=int, default=4096)
    return parser


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    cfg = SolverConfig(max_truncation=args.max_trunc)
    d = None
    try:
        if args.command != "verify-paper":
            if args.dist is None:
                raise _Usage(f"{args.command} requires --dist")
            d = parse_distribution(args.dist)
        code, body, lines = COMMANDS[args.command](args, d, cfg)
    except (SolverError, analysis.AnalysisError) as exc:
        print(f"solver error: {exc}", file=stderr)
        return EXIT_SOLVER
    except (_Usage, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE

    if args.format == "json":
        doc = {
            "command": {"name": args.command, "dist": args.dist, "n": args.n,
                        "n_from": args.n_from, "n_to": args.n_to, "digits": args.digits,
                        "max_trunc": args.max_trunc},
            "distribution": distribution_document(d) if d is not None else None,
        }
        doc.update(body)
        print(json.dumps(doc, indent=2, ensure_ascii=False), file=stdout)
    else:
        print("\n".join(lines), file=stdout)
    return code


def main() -> None:
    sys.exit(run())
