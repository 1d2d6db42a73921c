"""Command line entry point: ``foliation-moduli reduce|moduli|jetlab|corpus``.

Exit codes:
  0  success (reduce: COMPLETE; jetlab: every row MATCH)
  1  bad input: parse error, malformed divisor/annotation/scenario file
  2  reduction UNDETERMINED
  3  reduction hit the depth limit
  4  the two routes to tau disagree
  5  input is not a generalized curve (or its reduction is incomplete)
  6  jetlab: at least one FAIL row
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .corpus import corpus_forms
from .divisor import (
    DivisorFormatError,
    MarkedDivisor,
    component_name,
    edge_name,
    from_json,
    intersection_matrix,
    is_negative_definite,
    to_dot,
    to_json,
    verify_camacho_sad,
)
from .field import DEFAULT_TOWER_CAP, format_elem
from .jetlab import OrderTooLowError, ScenarioError, kodaira_spencer_check, scenario_from_json
from .moduli import AnnotationError, ConsistencyError, HypothesisError, moduli_skeleton
from .parser import ParseError, parse_one_form
from .reduction import COMPLETE, DEPTH_LIMIT, NonIsolatedError, ReductionOutcome, reduce

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_UNDETERMINED = 2
EXIT_DEPTH = 3
EXIT_TAU = 4
EXIT_HYPOTHESIS = 5
EXIT_FAIL = 6

ALL_FORMATS = ("json", "dot", "text")


def _dump(data) -> bytes:
    return (json.dumps(data, indent=2, sort_keys=True) + "\n").encode()


def _fmt(x) -> str:
    return "?" if x is None else format_elem(x)


def _status_exit(status: str) -> int:
    if status == COMPLETE:
        return EXIT_OK
    if status == DEPTH_LIMIT:
        return EXIT_DEPTH
    return EXIT_UNDETERMINED


# -- reports -------------------------------------------------------------------

def divisor_report(d: MarkedDivisor, outcome: ReductionOutcome | None = None) -> str:
    lines = []
    if d.source:
        lines.append(f"form: {d.source}")
    lines.append(f"status: {d.status}")
    lines.append(f"blow-ups: {d.blowups}")
    lines.append(f"generalized curve: {'yes' if d.generalized_curve else 'no'}")
    if outcome is not None and outcome.regular_point:
        lines.append("the origin is a regular point: nothing to reduce")
    if outcome is not None and outcome.already_reduced:
        lines.append("the origin is already a reduced singularity")
    if d.origin is not None:
        o = d.origin
        lines.append(f"origin: {o.classification} (trace {_fmt(o.trace)}, det {_fmt(o.det)})")
    if d.components:
        lines.append("")
        lines.append("components:")
        for c in d.components:
            tag = "  dicritical" if c.dicritical else ""
            lines.append(f"  {c.name}: self-intersection {c.self_intersection}, "
                         f"{len(d.points_on(c.id))} singular point(s){tag}")
    if d.edges:
        lines.append("edges: " + ", ".join(edge_name(e) for e in d.edges))
    if d.points:
        lines.append("")
        lines.append("singular points (Camacho-Sad indices):")
        for p in d.points:
            where = " x ".join(component_name(c) for c in p.components)
            cs = ", ".join(f"{component_name(c)}: {_fmt(v)}" for c, v in p.cs)
            extra = "  nodal" if p.nodal else ""
            lines.append(f"  [{where}] {p.classification}  {cs}{extra}")
    if outcome is not None and outcome.messages:
        lines.append("")
        lines.append("notes:")
        lines.extend(f"  {m}" for m in outcome.messages)
    res = verify_camacho_sad(d)
    if res and d.status == COMPLETE:
        lines.append("")
        lines.append("index theorem residuals (sum of indices - self-intersection):")
        for r in res:
            val = "undetermined" if r.undetermined else _fmt(r.residual)
            lines.append(f"  {component_name(r.component)}: {val}")
    if d.components and d.status == COMPLETE:
        nd = is_negative_definite(intersection_matrix(d))
        lines.append(f"intersection matrix negative definite: {'yes' if nd else 'no'}")
    return "\n".join(lines) + "\n"


def skeleton_report(sk) -> str:
    data = sk.to_dict()
    lines = [
        f"tau: {sk.tau} (cohomology {sk.tau_cohomology}, active edges {sk.tau_active})",
        "active edges: " + (", ".join(
            f"({a['vertex']}, {a['edge']}) -> z{a['kappa']}" for a in data["active_edges"]) or "none"),
        f"NC: {'holds' if sk.nc.holds else 'fails'}"
        + ("" if sk.nc.holds else " (chain " + " - ".join(component_name(v) for v in sk.nc.witness) + ")"),
        f"TR: {sk.tr}",
        "braid factors: " + (", ".join(f"{k}: {v}" for k, v in data["braid_factors"].items()) or "none"),
        "dimensions:",
    ]
    for name, v in data["dimensions"]["vertices"].items():
        lines.append(f"  {name}: {v['dim']} ({v['provenance']})")
    for name, v in data["dimensions"]["edges"].items():
        lines.append(f"  {name}: {v['dim']} ({v['provenance']})")
    lines.append(f"group D: {data['group_D']}, lattice rank p: {data['lattice_rank_p']}")
    lines.append("assumptions:")
    lines.extend(f"  - {a}" for a in data["assumptions"])
    return "\n".join(lines) + "\n"


# -- helpers ---------------------------------------------------------------------

def _formats(text: str) -> tuple[str, ...]:
    out = tuple(f.strip() for f in text.split(",") if f.strip())
    bad = [f for f in out if f not in ALL_FORMATS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown format(s): {', '.join(bad)}")
    return out


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _read_form(args) -> tuple[str, str]:
    if args.form is not None:
        return args.form, args.name or "form"
    path = Path(args.input)
    return path.read_text().strip(), args.name or path.stem


def _write(out_dir: Path, name: str, payload: bytes | str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    data = payload.encode() if isinstance(payload, str) else payload
    (out_dir / name).write_bytes(data)


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _run_reduce(text: str, args) -> ReductionOutcome:
    omega = parse_one_form(text)
    return reduce(omega, max_depth=args.max_depth, tower_cap=args.tower_cap, source=text)


# -- subcommands -----------------------------------------------------------------

def cmd_reduce(args) -> int:
    try:
        text, name = _read_form(args)
        outcome = _run_reduce(text, args)
    except ParseError as exc:
        _err(f"cannot parse the form: {exc}")
        return EXIT_INPUT
    except (OSError, NonIsolatedError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    d = outcome.divisor
    report = divisor_report(d, outcome)
    out = Path(args.out_dir)
    if "json" in args.formats:
        _write(out, f"{name}.divisor.json", to_json(d))
    if "dot" in args.formats:
        _write(out, f"{name}.dot", to_dot(d))
    if "text" in args.formats:
        _write(out, f"{name}.report.txt", report)
    sys.stdout.write(report)
    return _status_exit(d.status)


def _load_annotations(path: str | None) -> dict:
    if not path:
        return {}
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise AnnotationError("annotation file must hold a JSON object")
    return data


def cmd_moduli(args) -> int:
    try:
        annotations = _load_annotations(args.annotations)
        if args.divisor:
            d = from_json(Path(args.divisor).read_bytes())
            name = args.name or Path(args.divisor).name.split(".")[0]
        else:
            text, name = _read_form(args)
            d = _run_reduce(text, args).divisor
    except (ParseError, DivisorFormatError, AnnotationError, NonIsolatedError, OSError,
            json.JSONDecodeError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    if d.status != COMPLETE:
        _err(f"reduction is {d.status}; the moduli computation needs a complete reduction")
        return EXIT_HYPOTHESIS
    try:
        sk = moduli_skeleton(d, annotations)
    except HypothesisError as exc:
        _err(f"hypothesis violated: {exc}")
        return EXIT_HYPOTHESIS
    except ConsistencyError as exc:
        _err(f"tau routes disagree: {exc}")
        return EXIT_TAU
    except AnnotationError as exc:
        _err(str(exc))
        return EXIT_INPUT
    report = skeleton_report(sk)
    out = Path(args.out_dir)
    if "json" in args.formats:
        _write(out, f"{name}.moduli.json", _dump(sk.to_dict()))
    if "text" in args.formats:
        _write(out, f"{name}.moduli.txt", report)
    sys.stdout.write(report)
    return EXIT_OK


def cmd_jetlab(args) -> int:
    try:
        sc = scenario_from_json(Path(args.scenario).read_bytes())
        if args.order is not None:
            sc = replace(sc, order=args.order)
        rep = kodaira_spencer_check(sc)
    except (ScenarioError, OrderTooLowError, OSError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    table = rep.format_table()
    name = args.name or Path(args.scenario).name.split(".")[0]
    out = Path(args.out_dir)
    if "json" in args.formats:
        _write(out, f"{name}.jetlab.json", _dump(rep.to_dict()))
    if "text" in args.formats:
        _write(out, f"{name}.jetlab.txt", table)
    sys.stdout.write(table)
    return EXIT_OK if rep.all_match else EXIT_FAIL


def cmd_corpus(args) -> int:
    out = Path(args.out_dir)
    summary = []
    mismatches = 0
    for name, form, gc_expected in corpus_forms(include_saddle_node=True):
        outcome = _run_reduce(form, args)
        d = outcome.divisor
        _write(out, f"{name}.divisor.json", to_json(d))
        _write(out, f"{name}.dot", to_dot(d))
        entry = {
            "name": name,
            "form": form,
            "status": d.status,
            "blowups": d.blowups,
            "generalized_curve": d.generalized_curve,
            "components": len(d.components),
        }
        if d.generalized_curve and d.status == COMPLETE:
            sk = moduli_skeleton(d)
            _write(out, f"{name}.moduli.json", _dump(sk.to_dict()))
            entry["tau"] = sk.tau
            entry["nc"] = sk.nc.holds
        ok = d.status == COMPLETE and d.generalized_curve == gc_expected
        mismatches += not ok
        summary.append(entry)
        print(f"{name:<22} {d.status:<10} blow-ups {d.blowups:>2}  "
              f"gc {'yes' if d.generalized_curve else 'no ':<3}  tau {entry.get('tau', '-')}"
              + ("" if ok else "  UNEXPECTED"))
    _write(out, "corpus.json", _dump(summary))
    return EXIT_OK if not mismatches else EXIT_INPUT


# -- parser ----------------------------------------------------------------------

def _add_form_source(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--form", help="1-form such as '2*y*dy - 3*x^2*dx'")
    g.add_argument("--input", help="file holding the 1-form")


def _add_limits(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-depth", type=_positive, default=64, help="blow-up depth limit (default 64)")
    p.add_argument("--tower-cap", type=_positive, default=DEFAULT_TOWER_CAP,
                   help=f"largest algebraic extension degree (default {DEFAULT_TOWER_CAP})")


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out-dir", default="out", help="directory for artifacts (default ./out)")
    p.add_argument("--name", help="artifact base name")
    p.add_argument("--formats", type=_formats, default=ALL_FORMATS,
                   help="comma separated subset of json,dot,text (default all)")


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the bad-input code instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="foliation-moduli",
        description="Exact reduction of plane foliation singularities and moduli invariants.",
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("reduce", help="reduce a singular 1-form at the origin", allow_abbrev=False)
    _add_form_source(p)
    _add_limits(p)
    _add_output(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("moduli", help="tau, active edges and tameness of a reduced divisor", allow_abbrev=False)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--divisor", help="divisor JSON written by 'reduce'")
    g.add_argument("--form", help="1-form, reduced inline")
    g.add_argument("--input", help="file holding the 1-form")
    p.add_argument("--annotations", help="JSON file with dimension / active / tr annotations")
    _add_limits(p)
    _add_output(p)
    p.set_defaults(func=cmd_moduli)

    p = sub.add_parser("jetlab", help="check transition derivatives on a scenario", allow_abbrev=False)
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--order", type=_positive, help="override the truncation order")
    _add_output(p)
    p.set_defaults(func=cmd_jetlab)

    p = sub.add_parser("corpus", help="reduce every shipped test form", allow_abbrev=False)
    _add_limits(p)
    p.add_argument("--out-dir", default="out/corpus", help="directory for artifacts (default ./out/corpus)")
    p.set_defaults(func=cmd_corpus)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # --help exits 0, usage errors exit 1
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
