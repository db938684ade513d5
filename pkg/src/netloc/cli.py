"""Command-line entry point: ``netloc {align,nl2nl,inspect,generate}``.

Exit codes: 0 success, 2 input/ingestion error, 3 some annotated net unresolved.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .align import AlignConfig, run_alignment
from .errors import NetlistError
from .evalkit import DEFAULT_LEVELS, generators, sweep
from .graph import CellClass, DesignGraph, Side
from .ingest import load_design, read_annotations, write_fixture
from .normalize import HierarchyVocab, SepPolicy, make_canonicalizer
from .report import format_json, format_text, format_timing, format_tsv, report_rows

EXIT_OK, EXIT_INGEST, EXIT_UNRESOLVED = 0, 2, 3


class InputError(Exception):
    pass


def _int_list(values):
    out = []
    for v in values:
        for part in str(v).split(","):
            if part.strip():
                out.append(int(part))
    return out


def _load(path, side, canon=None) -> DesignGraph:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"cannot read {path}: no such file")
    try:
        return load_design(p, side, canon=canon)
    except NetlistError as e:
        raise InputError(f"{path}: {e}") from None


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cfg(args, **kw) -> AlignConfig:
    return AlignConfig(tie_policy="lex" if args.tie == "lex" else "all", **kw)


def cmd_align(args) -> int:
    g_ref = _load(args.ref, Side.REF)
    policy = SepPolicy(args.sep_policy)
    canon = None
    if policy is not SepPolicy.DOT:
        vocab = HierarchyVocab(g_ref.module_paths(), g_ref.name_index)
        canon = make_canonicalizer(policy, vocab)
    g_synth = _load(args.synth, Side.SYNTH, canon)
    apath = Path(args.annot)
    if not apath.is_file():
        raise InputError(f"cannot read {args.annot}: no such file")
    try:
        ann = read_annotations(apath.read_bytes(), g_synth, canon)
    except NetlistError as e:
        raise InputError(f"{args.annot}: {e}") from None
    for module, net in ann.unbound:
        print(f"warning: annotation {module + '.' if module else ''}{net} not found in synth netlist",
              file=sys.stderr)
    try:
        result = run_alignment(g_ref, g_synth, ann, _cfg(args, full_report=args.full_report))
    except NetlistError as e:
        raise InputError(str(e)) from None
    if args.format == "json":
        text = format_json(result, g_ref, g_synth, timing=args.timing)
    else:
        rows = report_rows(result, g_ref, g_synth)
        text = format_tsv(rows) if args.format == "tsv" else format_text(rows)
    _write(text, args.out)
    if args.timing and args.format != "json":
        sys.stderr.write(format_timing(result))
    return EXIT_UNRESOLVED if result.unresolved or ann.unbound else EXIT_OK


def cmd_nl2nl(args) -> int:
    g_ref = _load(args.ref, Side.REF)
    table = sweep(g_ref, args.levels, args.seeds, _cfg(args), args.preserve_seq, jobs=args.jobs)
    _write(table.to_csv(timing=args.timing), args.out)
    return EXIT_OK


def inspect_summary(g: DesignGraph, top: int = 5) -> str:
    st = g.stats
    const = g.const_mask
    eligible = sum(1 for n in g.nets if not const[n.id] and not n.collided
                   and not n.raw_name.startswith("$"))
    cells = [n for n in g.nodes if n.cls in (CellClass.COMBINATIONAL, CellClass.SEQUENTIAL)]
    located = sum(1 for n in cells if n.locs)
    cover = located / len(cells) if cells else 0.0
    lines = [
        f"nets            : {st.m}",
        f"sequential nets : {st.m_seq} ({st.m_seq / st.m:.1%})" if st.m else "sequential nets : 0",
        f"combinational   : {st.m_comb}",
        f"port nets       : {st.m_port}",
        f"nodes           : {len(g.nodes)}",
        f"anchor-eligible : {eligible}",
        f"k_avg           : {st.k_avg:.3f}",
        f"LoC coverage    : {cover:.1%}",
    ]
    fan = sorted(g.nets, key=lambda n: (-len(n.sinks), n.raw_name))[:top]
    if fan:
        lines.append("top fan-out     :")
        lines += [f"  {n.raw_name} {len(n.sinks)}" for n in fan]
    if g.warnings:
        lines.append("warnings        : " + ", ".join(f"{k}={v}" for k, v in sorted(g.warnings.items())))
    return "\n".join(lines) + "\n"


def cmd_inspect(args) -> int:
    g = _load(args.path, Side.REF)
    _write(inspect_summary(g, args.top), args.out)
    return EXIT_OK


def cmd_generate(args) -> int:
    kind = args.kind
    if kind == "f1":
        g = generators.f1()
    elif kind == "p2":
        g = generators.p2()
    elif kind == "pipeline":
        g = generators.pipeline(slices=args.slices, width=args.width, seed=args.seed,
                                twin_frac=args.twin_frac)
    else:
        g = generators.random_design(args.nets, seed=args.seed, cyclic=args.cyclic)
    _write(write_fixture(g), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="netloc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--tie", choices=("all", "lex"), default="all",
                        help="report every tied ref net, or only the lexicographically first")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes (nl2nl sweeps)")
        sp.add_argument("--timing", action="store_true", help="report per-stage wall time")
        sp.add_argument("--out", help="write to this file instead of stdout")

    a = sub.add_parser("align", help="align annotated synth nets to the reference design")
    a.add_argument("--ref", required=True, help="reference design (.json Yosys netlist or GNL)")
    a.add_argument("--synth", required=True, help="synthesized design (.json or GNL)")
    a.add_argument("--annot", required=True, help="annotation JSON: [{\"module\":..., \"net\":...}]")
    a.add_argument("--format", choices=("text", "tsv", "json"), default="text")
    a.add_argument("--sep-policy", choices=[s.value for s in SepPolicy], default="dot")
    a.add_argument("--full-report", action="store_true",
                   help="report every synth net, not only annotated ones")
    common(a)
    a.set_defaults(func=cmd_align)

    n = sub.add_parser("nl2nl", help="noise sweep of a design against renamed copies of itself")
    n.add_argument("--ref", required=True)
    n.add_argument("--levels", nargs="+", default=list(DEFAULT_LEVELS),
                   help="noise percentages (space or comma separated)")
    n.add_argument("--seeds", nargs="+", default=[0])
    n.add_argument("--preserve-seq", action="store_true", help="never rename flop outputs")
    common(n)
    n.set_defaults(func=cmd_nl2nl)

    i = sub.add_parser("inspect", help="print design statistics")
    i.add_argument("path")
    i.add_argument("--top", type=int, default=5, help="number of fan-out nets to list")
    i.add_argument("--out")
    i.set_defaults(func=cmd_inspect)

    g = sub.add_parser("generate", help="write a synthetic design in GNL form")
    g.add_argument("kind", choices=("f1", "p2", "pipeline", "random"))
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--slices", type=int, default=13)
    g.add_argument("--width", type=int, default=16)
    g.add_argument("--twin-frac", type=float, default=0.0)
    g.add_argument("--nets", type=int, default=1000)
    g.add_argument("--cyclic", action="store_true")
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "nl2nl":
        try:
            args.levels = _int_list(args.levels)
            args.seeds = _int_list(args.seeds)
        except ValueError as e:
            parser.error(f"bad integer list: {e}")
        bad = [lv for lv in args.levels if not 0 <= lv <= 100]
        if bad:
            parser.error(f"noise levels must be in [0, 100]: {bad}")
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INGEST
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INGEST


if __name__ == "__main__":
    sys.exit(main())
