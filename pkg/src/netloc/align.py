"""Staged matching engine.

Pipeline: anchors, then repeated rounds of full/half matching (first on the
reduced sequential graphs, then on the full graphs), surrounding matching once
those stall, and finally partial matching for whatever annotated nets are
still open. Matched nets become Resolved Points (RPs) for later rounds.

Only unambiguous matches are installed as RPs: a FULL/HALF/SURROUNDING result
with a single ref net that no other synth net claims in the same round. Tied
or contested results are reported but never propagated.
"""

from __future__ import annotations

import enum
import time
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import NoAnchorsError
from .graph import CellClass, DesignGraph, neighbors
from .normalize import AnchorMap, find_anchor_points
from .resolve import Direction, RPMaps, frontier_map, reduced_view, rp_mask


class Stage(enum.Enum):
    ANCHOR = "ANCHOR"
    FULL = "FULL"
    HALF_SRP = "HALF_SRP"
    HALF_ERP = "HALF_ERP"
    SURROUNDING = "SURROUNDING"
    PARTIAL = "PARTIAL"


class Confidence(enum.Enum):
    HIGH = "HIGH"
    MEDIUM = "MEDIUM"
    LOW = "LOW"


_CONFIDENCE = {Stage.ANCHOR: Confidence.HIGH, Stage.FULL: Confidence.HIGH,
               Stage.SURROUNDING: Confidence.HIGH, Stage.HALF_SRP: Confidence.MEDIUM,
               Stage.HALF_ERP: Confidence.MEDIUM, Stage.PARTIAL: Confidence.LOW}


class TiePolicy(enum.Enum):
    ALL_TIES = "all"
    LEX_FIRST = "lex"


class Weight(NamedTuple):
    """Match weight ordered as (sentinel count, finite part).

    A sentinel stands for a subset match (no mismatches), which outranks any
    finite weight; sums add both components.
    """
    sentinels: int = 0
    value: Fraction = Fraction(0)

    def __add__(self, other):
        return Weight(self.sentinels + other.sentinels, self.value + other.value)

    @property
    def is_max(self) -> bool:
        return self.sentinels > 0

    def __str__(self):
        fin = str(self.value)
        if not self.sentinels:
            return fin
        inf = "MAX" if self.sentinels == 1 else f"{self.sentinels}*MAX"
        return inf if self.value == 0 else f"{inf}+{fin}"


ZERO = Weight()
SENTINEL_MAX = Weight(1, Fraction(0))


def calc_wt(synth_set, ref_set, cfg: "AlignConfig | None" = None) -> Weight:
    """Overlap weight, asymmetric in favour of the synth side.

    ``matches = |s & r|``, ``mismatches = |s| - matches``; weight is
    ``coeff * matches / mismatches``, SENTINEL_MAX when there are matches but
    no mismatches, and zero when nothing matches.
    """
    s = getattr(synth_set, "points", synth_set)
    r = getattr(ref_set, "points", ref_set)
    matches = len(s & r) if len(s) <= len(r) else len(r & s)
    if matches == 0:
        return ZERO
    mismatches = len(s) - matches
    if mismatches == 0:
        return SENTINEL_MAX
    coeff = cfg.wt_match_coeff if cfg is not None else 5
    return Weight(0, Fraction(coeff) * matches / mismatches)


@dataclass
class AlignConfig:
    wt_match_coeff: int | Fraction = 5
    seq_first: bool = True
    max_fixpoint_iters: int = 16
    collapse_depth: int = 2
    tie_policy: TiePolicy = TiePolicy.ALL_TIES
    # emit records for every non-constant synth net, not just annotated ones
    full_report: bool = False

    def __post_init__(self):
        self.tie_policy = TiePolicy(self.tie_policy)
        if not self.wt_match_coeff > 0:
            raise ValueError("wt_match_coeff must be > 0")
        if self.collapse_depth < 1:
            raise ValueError("collapse_depth must be >= 1")
        if self.max_fixpoint_iters < 1:
            raise ValueError("max_fixpoint_iters must be >= 1")


@dataclass
class MatchRecord:
    synth_net: int
    ref_nets: list
    stage: Stage
    weight: Weight = SENTINEL_MAX
    locs: list = field(default_factory=list)
    # number of equally good ref candidates before the tie policy was applied
    n_ties: int = 1

    def __post_init__(self):
        if not self.ref_nets:
            raise ValueError("MatchRecord needs at least one ref net")

    @property
    def confidence(self) -> Confidence:
        return _CONFIDENCE[self.stage]


@dataclass
class AlignmentResult:
    records: list = field(default_factory=list)
    stage_timing: dict = field(default_factory=dict)
    stage_counts: dict = field(default_factory=dict)
    unresolved: set = field(default_factory=set)
    stats: dict = field(default_factory=dict)
    # installed synth -> ref pairs (anchors and unambiguous matches)
    aligned: dict = field(default_factory=dict)

    def record_for(self, synth_net: int) -> MatchRecord | None:
        for rec in self.records:
            if rec.synth_net == synth_net:
                return rec
        return None

    def by_synth(self) -> dict:
        return {rec.synth_net: rec for rec in self.records}


# --- matching primitives ---------------------------------------------------

def build_indexes(candidates: Iterable[int], srp_ref: Sequence, erp_ref: Sequence):
    """Hash ref nets by exact SRP and by exact ERP signature."""
    by_srp: dict = defaultdict(list)
    by_erp: dict = defaultdict(list)
    for r in candidates:
        by_srp[srp_ref[r]].append(r)
        by_erp[erp_ref[r]].append(r)
    return by_srp, by_erp


def build_any_srp_index(candidates: Iterable[int], srp_ref: Sequence) -> dict:
    """Map each RP to the ref nets whose SRP contains it."""
    index: dict = defaultdict(list)
    for r in candidates:
        for p in srp_ref[r]:
            index[p].append(r)
    return index


def _best(scored):
    best, out = None, []
    for r, w in scored:
        if best is None or w > best:
            best, out = w, [r]
        elif w == best:
            out.append(r)
    return best, out


def full_half_match(pending: Iterable[int], rp_ref: RPMaps, rp_synth: RPMaps, index_by_srp,
                    index_by_erp, cfg: AlignConfig, counter: list | None = None) -> list[MatchRecord]:
    """FULL records where both signatures agree, otherwise the best HALF record.

    ``rp_*.srp`` / ``rp_*.erp`` are indexable by net id and hold frozensets
    of ref-side RP labels. Records keep every tied ref net; the caller
    applies the tie policy. ``counter`` accumulates [attempted, matched].
    """
    srp_s, erp_s = rp_synth.srp, rp_synth.erp
    srp_r, erp_r = rp_ref.srp, rp_ref.erp
    out = []
    attempted = 0
    for s in pending:
        S, E = srp_s[s], erp_s[s]
        if not S and not E:
            continue
        attempted += 1
        by_s = index_by_srp.get(S, ()) if S else ()
        by_e = index_by_erp.get(E, ()) if E else ()
        if S:
            full = [r for r in by_s if erp_r[r] == E]
        else:
            full = [r for r in by_e if not srp_r[r]]
        if full:
            w = calc_wt(S, S, cfg) + calc_wt(E, E, cfg)
            out.append(MatchRecord(s, sorted(full), Stage.FULL, w, n_ties=len(full)))
            continue
        w_erp, c_erp = _best((r, calc_wt(E, erp_r[r], cfg)) for r in by_s) if by_s else (None, [])
        w_srp, c_srp = _best((r, calc_wt(S, srp_r[r], cfg)) for r in by_e) if by_e else (None, [])
        if w_erp is not None and w_erp <= ZERO:
            w_erp, c_erp = None, []
        if w_srp is not None and w_srp <= ZERO:
            w_srp, c_srp = None, []
        if w_erp is None and w_srp is None:
            continue
        if w_srp is None or (w_erp is not None and w_erp > w_srp):
            stage, w, refs = Stage.HALF_ERP, w_erp, c_erp
        elif w_erp is None or w_srp > w_erp:
            stage, w, refs = Stage.HALF_SRP, w_srp, c_srp
        else:
            # both directions equally good: one record carrying both candidate sets
            stage, w, refs = Stage.HALF_ERP, w_erp, sorted(set(c_erp) | set(c_srp))
        refs = sorted(refs)
        out.append(MatchRecord(s, refs, stage, w + SENTINEL_MAX, n_ties=len(refs)))
    if counter is not None:
        counter[0] += attempted
        counter[1] += len(out)
    return out


def partial_match(pending: Iterable[int], rp_ref: RPMaps, rp_synth: RPMaps, index_by_any_srp,
                  cfg: AlignConfig, counter: list | None = None) -> list[MatchRecord]:
    """Best overlap-scored ref nets among those sharing at least one SRP member."""
    srp_s, erp_s = rp_synth.srp, rp_synth.erp
    srp_r, erp_r = rp_ref.srp, rp_ref.erp
    out = []
    attempted = 0
    for s in pending:
        S, E = srp_s[s], erp_s[s]
        cands = set()
        for p in S:
            cands.update(index_by_any_srp.get(p, ()))
        if not cands:
            continue
        attempted += 1
        w, refs = _best((r, calc_wt(S, srp_r[r], cfg) + calc_wt(E, erp_r[r], cfg))
                        for r in sorted(cands))
        out.append(MatchRecord(s, refs, Stage.PARTIAL, w, n_ties=len(refs)))
    if counter is not None:
        counter[0] += attempted
        counter[1] += len(out)
    return out


def node_signature(g: DesignGraph, node: int, rp: RPMaps, labels) -> tuple:
    """(in, out) RP frontier of a node: RP in-nets as themselves, others through their SRP/ERP."""
    n = g.nodes[node]
    ins, outs = set(), set()
    for i in n.in_nets:
        s = rp.srp[i]
        if s is None:
            ins.add(labels[i])
        else:
            ins |= s
    for o in n.out_nets:
        e = rp.erp[o]
        if e is None:
            outs.add(labels[o])
        else:
            outs |= e
    return frozenset(ins), frozenset(outs)


def surrounding_match(g_synth: DesignGraph, known_locs: dict, rp_synth: RPMaps, cfg: AlignConfig,
                      labels=None, candidates: Iterable[int] | None = None):
    """Assign a LoC to nodes whose located neighbours all agree.

    A node gets LoC L when at least one neighbour is located and every located
    neighbour is at L. Otherwise unlocated neighbours with the same RP
    signature are merged into the node (up to ``collapse_depth`` merges) and
    the test is retried on the merged group. Sweeps repeat until nothing
    changes. Returns the list of ``(node, loc)`` assignments in order;
    ``known_locs`` is not modified.
    """
    known = dict(known_locs)
    if labels is None:
        labels = range(g_synth.m)
    if candidates is None:
        candidates = [n.id for n in g_synth.nodes
                      if n.cls in (CellClass.COMBINATIONAL, CellClass.SEQUENTIAL)]
    cand = set(candidates) - set(known)
    sig_cache: dict = {}
    nbr_cache: dict = {}

    def sig(n):
        if n not in sig_cache:
            sig_cache[n] = node_signature(g_synth, n, rp_synth, labels)
        return sig_cache[n]

    def nbrs(n):
        if n not in nbr_cache:
            nbr_cache[n] = neighbors(g_synth, n)
        return nbr_cache[n]

    def attempt(n):
        group = {n}
        merges = 0
        while True:
            around = set().union(*(nbrs(x) for x in group)) - group
            locs = {known[b] for b in around if b in known}
            if len(locs) == 1:
                return next(iter(locs)), group
            if locs or merges >= cfg.collapse_depth:
                return None
            target = sig(n)
            merge = sorted(b for b in around if b in cand and b not in known and sig(b) == target)
            if not merge:
                return None
            group.add(merge[0])
            merges += 1

    assigned = []
    dirty = set(cand)
    while dirty:
        progressed = set()
        for n in sorted(dirty):
            if n in known:
                continue
            hit = attempt(n)
            if hit is None:
                continue
            loc, group = hit
            for x in sorted(group):
                if x not in known:
                    known[x] = loc
                    assigned.append((x, loc))
                    progressed.add(x)
        dirty = set()
        for x in progressed:
            frontier = {x}
            for _ in range(cfg.collapse_depth + 1):
                frontier = set().union(*(nbrs(y) for y in frontier))
                dirty |= frontier
        dirty = (dirty & cand) - set(known)
    return assigned


# --- orchestration ----------------------------------------------------------

class _Timer:
    def __init__(self, sink: dict):
        self.sink = sink

    def __call__(self, key):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timer.sink[key] = timer.sink.get(key, 0.0) + time.perf_counter() - self.t0
        return _Ctx()


class _Aligner:
    def __init__(self, g_ref: DesignGraph, g_synth: DesignGraph, annotated, cfg: AlignConfig,
                 backend=None):
        self.g_ref, self.g_synth, self.cfg, self.backend = g_ref, g_synth, cfg, backend
        self.annotated = sorted(set(annotated))
        self.s2r: dict = {}
        self.r2s: dict = {}
        self.stage_of: dict = {}
        self.surround_locs: dict = {}
        self.installed: dict = {}
        self.result = AlignmentResult()
        self.timer = _Timer(self.result.stage_timing)
        self.counts = self.result.stage_counts
        self.rounds = 0
        self._reduced = None

    def count(self, key):
        return self.counts.setdefault(key, [0, 0])

    # RP state ---------------------------------------------------------------

    def install(self, pairs, stage: Stage) -> int:
        n = 0
        for s, r in pairs:
            if s in self.s2r or r in self.r2s:
                continue
            self.s2r[s] = r
            self.r2s[r] = s
            self.stage_of[s] = stage
            n += 1
        return n

    def _masks(self):
        ms = np.zeros(self.g_synth.m, dtype=np.uint8)
        mr = np.zeros(self.g_ref.m, dtype=np.uint8)
        if self.s2r:
            ms[np.fromiter(self.s2r, dtype=np.int64)] = 1
            mr[np.fromiter(self.r2s, dtype=np.int64)] = 1
        return rp_mask(self.g_synth, ms), rp_mask(self.g_ref, mr)

    def _synth_labels(self):
        lab = np.arange(self.g_synth.m, dtype=np.int64) + self.g_ref.m
        if self.s2r:
            lab[np.fromiter(self.s2r, dtype=np.int64)] = np.fromiter(self.s2r.values(), dtype=np.int64)
        return lab

    def _full_maps(self):
        ms, mr = self._masks()
        lab = self._synth_labels()
        with self.timer("rp_compute"):
            rs = RPMaps(frontier_map(self.g_synth, ms, Direction.BACKWARD, lab, self.backend),
                        frontier_map(self.g_synth, ms, Direction.FORWARD, lab, self.backend))
            rr = RPMaps(frontier_map(self.g_ref, mr, Direction.BACKWARD, None, self.backend),
                        frontier_map(self.g_ref, mr, Direction.FORWARD, None, self.backend))
        return rs, rr, lab

    def _seq_maps(self):
        """RP maps of the reduced graphs, re-expressed in full-graph net ids."""
        ms, mr = self._masks()
        lab = self._synth_labels()
        with self.timer("reduce"):
            vs = reduced_view(self.g_synth, ms, self.backend)
            vr = reduced_view(self.g_ref, mr, self.backend)
        out = []
        with self.timer("rp_compute"):
            for view, mask, labels, m in ((vs, ms, lab[vs.origin], self.g_synth.m),
                                          (vr, mr, vr.origin, self.g_ref.m)):
                stop = mask[view.origin]
                srp_l = view.frontier(stop, Direction.BACKWARD, labels, self.backend)
                erp_l = view.frontier(stop, Direction.FORWARD, labels, self.backend)
                srp, erp = [None] * m, [None] * m
                for i, o in enumerate(view.origin.tolist()):
                    srp[o] = srp_l[i]
                    erp[o] = erp_l[i]
                out.append(RPMaps(srp, erp))
        return out[0], out[1], set(vs.origin.tolist()), set(vr.origin.tolist())

    # stages -----------------------------------------------------------------

    def _pending(self, maps: RPMaps, restrict=None):
        srp = maps.srp
        ids = range(len(srp)) if restrict is None else sorted(restrict)
        return [i for i in ids if srp[i] is not None and i not in self.s2r]

    def _candidates(self, maps: RPMaps, restrict=None):
        srp = maps.srp
        ids = range(len(srp)) if restrict is None else sorted(restrict)
        return [i for i in ids if srp[i] is not None and i not in self.r2s]

    def _install_round(self, recs: list[MatchRecord], key: str) -> int:
        full = [r for r in recs if r.stage is Stage.FULL and len(r.ref_nets) == 1]
        n = self._install_unique(full, key)
        if n == 0:
            half = [r for r in recs if r.stage is not Stage.FULL and len(r.ref_nets) == 1]
            n = self._install_unique(half, key)
        return n

    def _install_unique(self, recs, key) -> int:
        claims = defaultdict(list)
        for rec in recs:
            claims[rec.ref_nets[0]].append(rec)
        n = 0
        for r, rs in sorted(claims.items()):
            if len(rs) == 1 and self.install([(rs[0].synth_net, r)], rs[0].stage):
                self.installed[rs[0].synth_net] = rs[0]
                n += 1
        self.count(key)[1] += n
        return n

    def _full_half_round(self, seq: bool) -> int:
        key = "seq_full_half" if seq else "comb_full_half"
        if seq:
            rs, rr, keep_s, keep_r = self._seq_maps()
        else:
            rs, rr, _ = self._full_maps()
            keep_s = keep_r = None
        with self.timer(key):
            pend = self._pending(rs, keep_s)
            cands = self._candidates(rr, keep_r)
            by_srp, by_erp = build_indexes(cands, rr.srp, rr.erp)
            counter = self.count(key)
            recs = full_half_match(pend, rr, rs, by_srp, by_erp, self.cfg, [0, 0])
            counter[0] += len(pend)
            n = self._install_round(recs, key)
        return n

    def _known_locs(self):
        ref_nodes, ref_nets = self.g_ref.nodes, self.g_ref.nets
        known = {}
        for node in self.g_synth.nodes:
            if node.locs:
                known[node.id] = node.locs[0]
        for s, r in sorted(self.s2r.items()):
            if self.stage_of[s] is Stage.SURROUNDING:
                continue
            d = self.g_synth.nets[s].driver
            rlocs = ref_nodes[ref_nets[r].driver].locs
            if d not in known and rlocs:
                known[d] = rlocs[0]
        return known

    def _surrounding(self) -> int:
        rs, rr, lab = self._full_maps()
        with self.timer("surrounding"):
            known = self._known_locs()
            sn = self.g_synth.nodes
            pend_nodes = sorted({self.g_synth.nets[s].driver for s in self._pending(rs)})
            pend_nodes = [n for n in pend_nodes
                          if sn[n].cls in (CellClass.COMBINATIONAL, CellClass.SEQUENTIAL)]
            assigned = surrounding_match(self.g_synth, known, rs, self.cfg, lab, pend_nodes)
            counter = self.count("surrounding")
            counter[0] += len(pend_nodes)
            by_loc = defaultdict(list)
            for node in self.g_ref.nodes:
                for loc in node.locs:
                    by_loc[loc].extend(node.out_nets)
            installs = []
            for node, loc in assigned:
                for s in sn[node].out_nets:
                    if rs.srp[s] is None or s in self.s2r:
                        continue
                    cands = [r for r in by_loc.get(loc, ()) if rr.srp[r] is not None
                             and r not in self.r2s]
                    if not cands:
                        continue
                    w, refs = _best((r, calc_wt(rs.srp[s], rr.srp[r], self.cfg)
                                     + calc_wt(rs.erp[s], rr.erp[r], self.cfg)) for r in cands)
                    rec = MatchRecord(s, refs, Stage.SURROUNDING, w, [loc], n_ties=len(refs))
                    self.surround_locs[s] = rec
                    if len(refs) == 1:
                        installs.append(rec)
            claims = defaultdict(list)
            for rec in installs:
                claims[rec.ref_nets[0]].append(rec)
            n = 0
            for r, recs in sorted(claims.items()):
                if len(recs) == 1:
                    n += self.install([(recs[0].synth_net, r)], Stage.SURROUNDING)
            counter[1] += len(assigned)
        return n

    def _ref_locs(self, refs) -> list:
        out = []
        for r in refs:
            for loc in self.g_ref.nodes[self.g_ref.nets[r].driver].locs:
                if loc not in out:
                    out.append(loc)
        return out

    def _apply_ties(self, rec: MatchRecord) -> MatchRecord:
        if self.cfg.tie_policy is TiePolicy.LEX_FIRST and len(rec.ref_nets) > 1:
            nets = self.g_ref.nets
            rec.ref_nets = [min(rec.ref_nets, key=lambda r: (nets[r].canon_name, r))]
        if rec.stage is not Stage.SURROUNDING:
            rec.locs = self._ref_locs(rec.ref_nets)
        return rec

    def run(self, no_anchor=()) -> AlignmentResult:
        cfg = self.cfg
        with self.timer("anchor"):
            amap: AnchorMap = find_anchor_points(self.g_ref, self.g_synth, no_anchor)
        if amap.count == 0:
            raise NoAnchorsError("no anchor points between the two graphs")
        self.install(sorted(amap.synth_to_ref.items()), Stage.ANCHOR)
        self.count("anchor")[:] = [self.g_synth.m, amap.count]

        iters = 0
        open_total = int(self.g_synth.m - self.g_synth.const_mask.sum())
        while iters < cfg.max_fixpoint_iters and len(self.s2r) < open_total:
            iters += 1
            n = 0
            if cfg.seq_first:
                n += self._full_half_round(seq=True)
            n += self._full_half_round(seq=False)
            if n == 0:
                n += self._surrounding()
            if n == 0:
                break
        self.rounds = iters

        # final pass: report what could not be installed
        targets = self._targets()
        open_ = [s for s in targets if s not in self.s2r]
        final: dict = {}
        if open_:
            final.update(self._final_full_half(open_))
            for s, rec in self.surround_locs.items():
                if s not in self.s2r and s not in final:
                    final[s] = rec
            rest = [s for s in open_ if s not in final]
            if rest:
                final.update(self._final_partial(rest))
        return self._finish(amap, targets, final, iters)

    def _targets(self):
        if self.cfg.full_report:
            const = self.g_synth.const_mask
            return [i for i in range(self.g_synth.m) if not const[i]]
        return self.annotated

    def _final_full_half(self, open_):
        out = {}
        rs, rr, keep_s, keep_r = self._seq_maps()
        cands = self._candidates(rr, keep_r)
        by_srp, by_erp = build_indexes(cands, rr.srp, rr.erp)
        seq_open = [s for s in open_ if s in keep_s and rs.srp[s] is not None]
        for rec in full_half_match(seq_open, rr, rs, by_srp, by_erp, self.cfg):
            out[rec.synth_net] = rec
        rs, rr, _ = self._full_maps()
        cands = self._candidates(rr)
        by_srp, by_erp = build_indexes(cands, rr.srp, rr.erp)
        rest = [s for s in open_ if s not in out and rs.srp[s] is not None]
        for rec in full_half_match(rest, rr, rs, by_srp, by_erp, self.cfg):
            out[rec.synth_net] = rec
        return out

    def _final_partial(self, open_):
        out = {}
        rs, rr, keep_s, keep_r = self._seq_maps()
        with self.timer("seq_partial"):
            seq_open = [s for s in open_ if s in keep_s and rs.srp[s] is not None]
            index = build_any_srp_index(self._candidates(rr, keep_r), rr.srp)
            for rec in partial_match(seq_open, rr, rs, index, self.cfg, self.count("seq_partial")):
                out[rec.synth_net] = rec
        rs, rr, _ = self._full_maps()
        with self.timer("comb_partial"):
            rest = [s for s in open_ if s not in out and rs.srp[s] is not None]
            index = build_any_srp_index(self._candidates(rr), rr.srp)
            for rec in partial_match(rest, rr, rs, index, self.cfg, self.count("comb_partial")):
                out[rec.synth_net] = rec
        return out

    def _finish(self, amap, targets, final, iters) -> AlignmentResult:
        res = self.result
        for s in targets:
            if s in self.s2r:
                stage = self.stage_of[s]
                if stage is Stage.SURROUNDING:
                    rec = self.surround_locs[s]
                else:
                    rec = self.installed.get(s) or MatchRecord(s, [self.s2r[s]], stage)
            elif s in final:
                rec = final[s]
            else:
                res.unresolved.add(s)
                continue
            res.records.append(self._apply_ties(rec))
        res.aligned = dict(self.s2r)
        st = self.g_synth.stats
        res.stats = {
            "m": self.g_synth.m, "m_ref": self.g_ref.m, "m_d": len(targets),
            "a": len(self.s2r), "anchors": amap.count, "anchor_fraction": amap.anchor_fraction,
            "class_conflicts": amap.class_conflicts, "anchor_visits": amap.visits,
            "k_avg": st.k_avg, "m_seq": st.m_seq, "m_comb": st.m_comb, "iterations": iters,
        }
        return res


def run_alignment(g_ref: DesignGraph, g_synth: DesignGraph, annotations: Iterable[int] = (),
                  cfg: AlignConfig | None = None, no_anchor: Iterable[int] = (),
                  backend: str | None = None) -> AlignmentResult:
    """Align annotated synth nets to ref nets and source locations.

    ``annotations`` is any iterable of synth net ids (an ``AnnotationSet``
    works). ``no_anchor`` lists synth nets barred from anchor matching.
    """
    cfg = cfg or AlignConfig()
    ann = list(annotations)
    return _Aligner(g_ref, g_synth, ann, cfg, backend).run(no_anchor)


def install_matches(records: Iterable[MatchRecord], s2r: dict, r2s: dict, pending: set | None = None,
                    maps: RPMaps | None = None) -> bool:
    """Add single-ref records to the RP correspondence. Returns whether anything changed.

    Already-aligned synth nets and already-claimed ref nets are skipped, so
    re-installing is a no-op. When ``maps`` is given its epoch is bumped on change.
    """
    changed = False
    for rec in records:
        if len(rec.ref_nets) != 1:
            continue
        s, r = rec.synth_net, rec.ref_nets[0]
        if s in s2r or r in r2s:
            continue
        s2r[s] = r
        r2s[r] = s
        if pending is not None:
            pending.discard(s)
        changed = True
    if changed and maps is not None:
        maps.epoch += 1
    return changed
