"""Netlist-to-netlist (NL2NL) evaluation: align a design against a renamed copy of itself."""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from ..align import AlignConfig, AlignmentResult, Stage, run_alignment
from ..graph import CAT_PORT, CellClass, CellNode, DesignGraph, Net, Side
from ..normalize import canonicalize_name

DEFAULT_LEVELS = (0, 20, 40, 60, 80, 90, 95, 100)
RNG_ID = "numpy.random.default_rng/PCG64"
CSV_COLUMNS = ("noise_pct", "seed", "total", "matched", "accuracy", "anchor", "full", "half",
               "surrounding", "partial", "unresolved", "wall_ms")


@dataclass(frozen=True)
class NoiseSpec:
    noise_pct: int = 0
    seed: int = 0
    preserve_sequential: bool = False
    suffix: str = "_changed"

    def __post_init__(self):
        if not 0 <= self.noise_pct <= 100:
            raise ValueError(f"noise_pct must be in [0, 100], got {self.noise_pct}")
        if not self.suffix:
            raise ValueError("suffix must be non-empty")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class NoisyDesign:
    graph: DesignGraph
    renamed: list
    spec: NoiseSpec


def rename(raw: str, suffix: str) -> str:
    """Suffix every hierarchy segment of a flattened name."""
    return ".".join(seg + suffix for seg in raw.split("."))


def strip_suffix(raw: str, suffix: str) -> str:
    return raw.replace(suffix, "")


def eligible_nets(g: DesignGraph, preserve_sequential: bool = False) -> list[int]:
    """Nets the harness may rename: no ports, no constants, optionally no flop outputs."""
    cat, const = g.net_category, g.const_mask
    nodes = g.nodes
    out = []
    for net in g.nets:
        if cat[net.id] == CAT_PORT or const[net.id]:
            continue
        if preserve_sequential and nodes[net.driver].cls is CellClass.SEQUENTIAL:
            continue
        out.append(net.id)
    return out


def inject_noise(g: DesignGraph, spec: NoiseSpec) -> NoisyDesign:
    """SYNTH-side copy of ``g`` with a seeded sample of nets renamed and all locs dropped.

    The sample size is ``floor(noise_pct * eligible / 100)``; net and node ids
    are unchanged, so the identity map is the ground truth.
    """
    elig = eligible_nets(g, spec.preserve_sequential)
    k = spec.noise_pct * len(elig) // 100
    rng = np.random.default_rng(spec.seed)
    picked = sorted(elig[i] for i in rng.choice(len(elig), size=k, replace=False)) if k else []
    chosen = set(picked)
    nets = []
    for net in g.nets:
        raw = rename(net.raw_name, spec.suffix) if net.id in chosen else net.raw_name
        nets.append(Net(id=net.id, raw_name=raw, canon_name=canonicalize_name(raw), bit=net.bit,
                        driver=net.driver, sinks=list(net.sinks), is_annotated=net.id in chosen))
    nodes = [CellNode(n.id, n.name, n.cell_type, n.cls, [], list(n.in_nets), list(n.out_nets),
                      n.annotated_module) for n in g.nodes]
    return NoisyDesign(DesignGraph(nodes, nets, Side.SYNTH), picked, spec)


@dataclass
class SweepRow:
    noise_pct: int
    seed: int
    total: int = 0
    matched: int = 0
    accuracy: float = 1.0
    anchor: int = 0
    full: int = 0
    half: int = 0
    surrounding: int = 0
    partial: int = 0
    unresolved: int = 0
    wall_ms: float = 0.0
    # whole-design view: every eligible net, anchored ones included
    entry_total: int = 0
    entry_matched: int = 0

    @property
    def entry_accuracy(self) -> float:
        return self.entry_matched / self.entry_total if self.entry_total else 1.0


_STAGE_COLUMN = {Stage.ANCHOR: "anchor", Stage.FULL: "full", Stage.HALF_SRP: "half",
                 Stage.HALF_ERP: "half", Stage.SURROUNDING: "surrounding", Stage.PARTIAL: "partial"}


def score_nl2nl(result: AlignmentResult, g_ref: DesignGraph, noisy: NoisyDesign,
                row: SweepRow | None = None) -> SweepRow:
    """Count renamed nets whose record names the original net.

    A record matches when the synth name with the suffix removed equals the
    raw name of any of its ref nets. Renamed nets without a record count as
    unresolved. With no renamed nets the accuracy is 1.0.
    """
    suffix = noisy.spec.suffix
    spec = noisy.spec
    row = row or SweepRow(spec.noise_pct, spec.seed)
    recs = result.by_synth()
    g_synth = noisy.graph
    rnets = g_ref.nets
    for s in noisy.renamed:
        row.total += 1
        rec = recs.get(s)
        if rec is None:
            row.unresolved += 1
            continue
        col = _STAGE_COLUMN[rec.stage]
        setattr(row, col, getattr(row, col) + 1)
        want = strip_suffix(g_synth.nets[s].raw_name, suffix)
        if any(rnets[r].raw_name == want for r in rec.ref_nets):
            row.matched += 1
    row.accuracy = row.matched / row.total if row.total else 1.0

    renamed = set(noisy.renamed)
    elig = eligible_nets(g_synth)
    for s in elig:
        if s in renamed:
            continue
        r = result.aligned.get(s)
        if r is not None and rnets[r].raw_name == g_synth.nets[s].raw_name:
            row.entry_matched += 1
    row.entry_total = len(elig)
    row.entry_matched += row.matched
    return row


def run_nl2nl(g_ref: DesignGraph, spec: NoiseSpec, cfg: AlignConfig | None = None,
              backend: str | None = None) -> tuple[SweepRow, AlignmentResult, NoisyDesign]:
    """One NL2NL run: inject noise, align the renamed nets, score."""
    noisy = inject_noise(g_ref, spec)
    t0 = time.perf_counter()
    result = run_alignment(g_ref, noisy.graph, noisy.renamed, cfg, no_anchor=noisy.renamed,
                           backend=backend)
    wall = (time.perf_counter() - t0) * 1000.0
    row = score_nl2nl(result, g_ref, noisy)
    row.wall_ms = wall
    return row, result, noisy


@dataclass
class SweepTable:
    rows: list = field(default_factory=list)
    rng: str = RNG_ID

    def to_csv(self, timing: bool = False) -> str:
        """CSV text with a ``# rng=...`` comment line; ``wall_ms`` is blank unless ``timing``."""
        buf = io.StringIO()
        buf.write(f"# rng={self.rng}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r.noise_pct, r.seed, r.total, r.matched, f"{r.accuracy:.6f}", r.anchor,
                        r.full, r.half, r.surrounding, r.partial, r.unresolved,
                        f"{r.wall_ms:.1f}" if timing else ""])
        return buf.getvalue()

    def mean_accuracy(self, level: int) -> float:
        accs = [r.accuracy for r in self.rows if r.noise_pct == level]
        return sum(accs) / len(accs) if accs else float("nan")


def read_sweep_csv(text: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _sweep_job(args):
    g_ref, level, seed, preserve, cfg, backend = args
    row, _, _ = run_nl2nl(g_ref, NoiseSpec(level, seed, preserve), cfg, backend)
    return row


def sweep(g_ref: DesignGraph, levels=DEFAULT_LEVELS, seeds=(0,), cfg: AlignConfig | None = None,
          preserve_sequential: bool = False, jobs: int = 1, backend: str | None = None) -> SweepTable:
    """One row per (level, seed), rows ordered by level then seed."""
    cfg = cfg or AlignConfig()
    jobs_args = [(g_ref, lv, sd, preserve_sequential, cfg, backend) for lv in levels for sd in seeds]
    if jobs > 1 and len(jobs_args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_sweep_job, jobs_args))
    else:
        rows = [_sweep_job(a) for a in jobs_args]
    return SweepTable(rows)


def stage_stats(result: AlignmentResult) -> dict:
    """Per-stage matched count, share of records, and share of wall time."""
    counts = {st.value: 0 for st in Stage}
    for rec in result.records:
        counts[rec.stage.value] += 1
    total = sum(counts.values())
    t_total = sum(result.stage_timing.values())
    out = {}
    for st, n in counts.items():
        out[st] = {"matched": n, "share": n / total if total else 0.0}
    out["timing"] = {k: (v / t_total if t_total else 0.0) for k, v in result.stage_timing.items()}
    out["unresolved"] = len(result.unresolved)
    return out


def row_dict(row: SweepRow) -> dict:
    d = {f.name: getattr(row, f.name) for f in fields(row)}
    d["entry_accuracy"] = row.entry_accuracy
    return d
