"""Alignment report emitters (text, TSV, JSON) and the JSON reader."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .align import AlignmentResult, MatchRecord, Stage, Weight
from .graph import DesignGraph, SourceLoc
from .ingest import parse_src_attribute

UNNAMED = "<unnamed edge>"
UNRESOLVED = "<unresolved>"


@dataclass
class ReportRow:
    annotated: str
    ref_name: str
    module: str
    locs: list
    stage: str
    confidence: str


def display_name(raw: str) -> str:
    """Tool-generated (``$``-prefixed) names are shown as ``<unnamed edge>``."""
    return UNNAMED if raw.startswith("$") or ".$" in raw else raw


def _module(g_ref: DesignGraph, r: int) -> str:
    return g_ref.nodes[g_ref.nets[r].driver].annotated_module or "TOP"


def report_rows(result: AlignmentResult, g_ref: DesignGraph, g_synth: DesignGraph) -> list[ReportRow]:
    """One row per (annotated net, ref net); unresolved nets get one placeholder row.

    Rows are ordered by synth net name, then by ref net name.
    """
    rows = []
    items = [(g_synth.nets[rec.synth_net].raw_name, rec) for rec in result.records]
    items += [(g_synth.nets[s].raw_name, None) for s in result.unresolved]
    for name, rec in sorted(items, key=lambda x: x[0]):
        if rec is None:
            rows.append(ReportRow(name, UNRESOLVED, "-", [], "-", "-"))
            continue
        for r in sorted(rec.ref_nets, key=lambda r: g_ref.nets[r].raw_name):
            if rec.stage is Stage.SURROUNDING:
                locs = list(rec.locs)
            else:
                locs = list(g_ref.nodes[g_ref.nets[r].driver].locs)
            rows.append(ReportRow(name, display_name(g_ref.nets[r].raw_name), _module(g_ref, r),
                                  [str(loc) for loc in locs], rec.stage.value,
                                  rec.confidence.value))
    return rows


def format_text(rows: list[ReportRow]) -> str:
    """``annotated : ref (module M) : [loc] ... : STAGE : CONF`` with the first two columns padded."""
    cells = [(r.annotated, f"{r.ref_name} (module {r.module})" if r.module != "-" else r.ref_name,
              " ".join(f"[{loc}]" for loc in r.locs) or "[]", r.stage, r.confidence) for r in rows]
    if not cells:
        return ""
    w0 = max(len(c[0]) for c in cells)
    w1 = max(len(c[1]) for c in cells)
    lines = [f"{a:<{w0}} : {b:<{w1}} : {c} : {d} : {e}".rstrip() for a, b, c, d, e in cells]
    return "\n".join(lines) + "\n"


def format_tsv(rows: list[ReportRow]) -> str:
    out = ["annotated\tref_name\tmodule\tlocs\tstage\tconfidence"]
    for r in rows:
        out.append("\t".join([r.annotated, r.ref_name, r.module, ",".join(r.locs), r.stage,
                              r.confidence]))
    return "\n".join(out) + "\n"


def _weight_json(w: Weight) -> dict:
    return {"sentinels": w.sentinels, "value": str(w.value)}


def format_json(result: AlignmentResult, g_ref: DesignGraph, g_synth: DesignGraph,
                timing: bool = False) -> str:
    recs = []
    for rec in sorted(result.records, key=lambda r: g_synth.nets[r.synth_net].raw_name):
        recs.append({
            "synth_net": rec.synth_net,
            "annotated": g_synth.nets[rec.synth_net].raw_name,
            "ref_nets": [{"id": r, "name": g_ref.nets[r].raw_name, "module": _module(g_ref, r)}
                         for r in rec.ref_nets],
            "stage": rec.stage.value,
            "confidence": rec.confidence.value,
            "weight": _weight_json(rec.weight),
            "locs": [str(loc) for loc in rec.locs],
            "n_ties": rec.n_ties,
        })
    doc = {
        "records": recs,
        "unresolved": [{"synth_net": s, "annotated": g_synth.nets[s].raw_name}
                       for s in sorted(result.unresolved)],
        "stage_counts": {k: list(v) for k, v in sorted(result.stage_counts.items())},
        "stats": {k: result.stats[k] for k in sorted(result.stats)},
    }
    if timing:
        doc["stage_timing"] = {k: round(v, 6) for k, v in sorted(result.stage_timing.items())}
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _parse_loc(s: str) -> SourceLoc:
    locs = parse_src_attribute(s)
    if len(locs) != 1:
        raise ValueError(f"bad loc {s!r}")
    return locs[0]


def parse_json_report(text: str) -> tuple[list[MatchRecord], set]:
    """Records and unresolved synth ids back from :func:`format_json` output."""
    doc = json.loads(text)
    recs = []
    for d in doc["records"]:
        w = d["weight"]
        recs.append(MatchRecord(d["synth_net"], [r["id"] for r in d["ref_nets"]], Stage(d["stage"]),
                                Weight(w["sentinels"], Fraction(w["value"])),
                                [_parse_loc(x) for x in d["locs"]], d["n_ties"]))
    return recs, {u["synth_net"] for u in doc["unresolved"]}


def format_timing(result: AlignmentResult) -> str:
    total = sum(result.stage_timing.values()) or 1.0
    lines = ["stage\tseconds\tshare"]
    for k, v in sorted(result.stage_timing.items(), key=lambda kv: -kv[1]):
        lines.append(f"{k}\t{v:.4f}\t{v / total:.1%}")
    return "\n".join(lines) + "\n"
