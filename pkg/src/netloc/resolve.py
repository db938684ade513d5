"""Start/End Resolved Points (SRP/ERP) of pending nets, and the sequential reduction.

A Resolved Point (RP) is a net already aligned between the two graphs. The
SRP set of a net is the set of RPs reached first when walking backward
(driver -> its input nets); the ERP set is the same walking forward (sinks ->
their output nets). Each path stops at the first RP it meets.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from . import _kernels
from .graph import (CAT_COMB, CellClass, CellNode, DesignGraph, Net, csr_from_pairs,
                    transpose_csr)

DEFAULT_VISIT_BUDGET = 100_000


class Direction(enum.Enum):
    BACKWARD = "backward"
    FORWARD = "forward"


@dataclass(frozen=True)
class RPSet:
    points: frozenset
    truncated: bool = False
    visits: int = 0


@dataclass
class RPMaps:
    """Per-net SRP/ERP point sets (frozensets of RP labels) for one epoch."""
    srp: dict = field(default_factory=dict)
    erp: dict = field(default_factory=dict)
    epoch: int = 0


@dataclass
class PendingMap:
    pending: set = field(default_factory=set)

    def __len__(self):
        return len(self.pending)

    def __iter__(self):
        return iter(sorted(self.pending))

    def __contains__(self, n):
        return n in self.pending


def _adjacency(g: DesignGraph, direction: Direction, kern):
    cache = g.__dict__.setdefault("_kernel_adj", {})
    key = (kern.BACKEND, direction)
    if key not in cache:
        ptr, idx = g.pred if direction is Direction.BACKWARD else g.succ
        cache[key] = (kern.prepare(ptr), kern.prepare(idx))
    return cache[key]


def rp_mask(g: DesignGraph, rps) -> np.ndarray:
    """uint8 mask of RP nets; constant-driven nets are never RPs."""
    if isinstance(rps, np.ndarray):
        mask = rps.astype(np.uint8, copy=True)
    else:
        mask = np.zeros(g.m, dtype=np.uint8)
        ids = np.fromiter(rps, dtype=np.int64)
        if ids.size:
            mask[ids] = 1
    mask[g.const_mask.astype(bool)] = 0
    return mask


def _labels_array(g: DesignGraph, labels) -> np.ndarray:
    out = np.arange(g.m, dtype=np.int64)
    if labels is None:
        return out
    if isinstance(labels, np.ndarray):
        return labels.astype(np.int64)
    for k, v in labels.items():
        out[k] = v
    return out


def compute_rps(g: DesignGraph, rps, n: int, direction: Direction,
                budget: int = DEFAULT_VISIT_BUDGET, labels: Mapping[int, int] | None = None,
                backend: str | None = None) -> RPSet:
    """Nearest RPs of net ``n`` by breadth-first search (visited set over nets)."""
    kern = _kernels.get_backend(backend)
    stop = rp_mask(g, rps)
    if stop[n]:
        raise ValueError(f"net {n} is itself a resolved point")
    ptr, idx = _adjacency(g, direction, kern)
    found, truncated, visits = kern.bfs_frontier(ptr, idx, kern.prepare(stop),
                                                 kern.prepare(g.const_mask), n, budget)
    if labels is not None:
        found = [labels[p] for p in found]
    return RPSet(frozenset(found), bool(truncated), int(visits))


def frontier_map(g: DesignGraph, stop: np.ndarray, direction: Direction, labels=None,
                 backend: str | None = None) -> list:
    """Frontier set for every non-stop, non-constant net (``None`` elsewhere)."""
    kern = _kernels.get_backend(backend)
    ptr, idx = _adjacency(g, direction, kern)
    return _frontier(kern, ptr, idx, stop, g.const_mask, _labels_array(g, labels))


def _frontier(kern, ptr, idx, stop, const, labels):
    skip = const & (stop == 0)
    return kern.frontier_sets(ptr, idx, kern.prepare(stop.astype(np.uint8)),
                              kern.prepare(skip.astype(np.uint8)), kern.prepare(labels))


@dataclass
class ReducedView:
    """Adjacency of the sequential reduction without materialized nodes.

    ``pred``/``succ`` are CSR arrays over reduced ids; ``origin`` maps
    reduced ids to original net ids and ``local`` the other way (-1 if dropped).
    """
    origin: np.ndarray
    local: np.ndarray
    pred: tuple
    succ: tuple
    const_mask: np.ndarray

    @property
    def m(self) -> int:
        return int(self.origin.size)

    def frontier(self, stop: np.ndarray, direction: Direction, labels=None,
                 backend: str | None = None) -> list:
        """Like :func:`frontier_map`, over reduced ids (``stop`` is a reduced-id mask)."""
        kern = _kernels.get_backend(backend)
        cache = self.__dict__.setdefault("_kern_adj", {})
        key = (kern.BACKEND, direction)
        if key not in cache:
            ptr, idx = self.pred if direction is Direction.BACKWARD else self.succ
            cache[key] = (kern.prepare(ptr), kern.prepare(idx))
        lab = np.arange(self.m, dtype=np.int64) if labels is None else np.asarray(labels, np.int64)
        return _frontier(kern, *cache[key], stop, self.const_mask, lab)


def retained_mask(g: DesignGraph, rps) -> np.ndarray:
    """Nets kept by the sequential reduction: non-combinational nets and RPs."""
    return ((g.net_category != CAT_COMB) | (rp_mask(g, rps) == 1)).astype(np.uint8)


def reduced_view(g: DesignGraph, rps, backend: str | None = None) -> ReducedView:
    """Reduced-graph adjacency; see :func:`reduce_to_sequential` for the semantics."""
    retained = retained_mask(g, rps)
    origin = np.flatnonzero(retained)
    local = np.full(g.m, -1, dtype=np.int64)
    local[origin] = np.arange(origin.size)
    pptr, pidx = g.pred
    drv_comb = np.fromiter((g.nodes[n.driver].cls is CellClass.COMBINATIONAL for n in g.nets),
                           dtype=bool, count=g.m)
    rows_all = np.repeat(np.arange(g.m, dtype=np.int64), np.diff(pptr))
    direct = retained[rows_all].astype(bool) & ~drv_comb[rows_all]
    rows = [local[rows_all[direct]]]
    cols = [local[pidx[direct]]]
    comb_kept = np.flatnonzero(retained.astype(bool) & drv_comb)
    if comb_kept.size:
        behind = frontier_map(g, retained, Direction.BACKWARD, local, backend)
        const = g.const_mask
        cr, cc = [], []
        for t in comb_kept.tolist():
            lt = int(local[t])
            front = set()
            for j in range(pptr[t], pptr[t + 1]):
                p = int(pidx[j])
                if retained[p]:
                    front.add(int(local[p]))
                elif not const[p]:
                    front |= behind[p]
            cr.extend([lt] * len(front))
            cc.extend(front)
        rows.append(np.asarray(cr, dtype=np.int64))
        cols.append(np.asarray(cc, dtype=np.int64))
    pred = csr_from_pairs(np.concatenate(rows), np.concatenate(cols), origin.size)
    return ReducedView(origin, local, pred, transpose_csr(*pred), g.const_mask[origin])


def compute_all_rps(g: DesignGraph, rps, pending: PendingMap | Iterable[int] | None = None,
                    labels=None, epoch: int = 0, backend: str | None = None) -> RPMaps:
    """SRP and ERP sets of every pending net via two dependency-ordered sweeps.

    Equivalent to :func:`compute_rps` in both directions for each pending net
    (without a visit budget). ``pending=None`` covers every non-RP,
    non-constant net. ``labels`` renames RP ids in the output sets.
    """
    stop = rp_mask(g, rps)
    back = frontier_map(g, stop, Direction.BACKWARD, labels, backend)
    fwd = frontier_map(g, stop, Direction.FORWARD, labels, backend)
    if pending is None:
        keys = [i for i, s in enumerate(back) if s is not None]
    else:
        keys = sorted(pending.pending if isinstance(pending, PendingMap) else pending)
    return RPMaps({n: back[n] for n in keys}, {n: fwd[n] for n in keys}, epoch)


def pending_nets(g: DesignGraph, aligned: Iterable[int]) -> PendingMap:
    """All non-constant nets that are neither anchored nor aligned."""
    done = set(aligned)
    const = g.const_mask
    return PendingMap({i for i in range(g.m) if not const[i] and i not in done})


def reduce_to_sequential(g: DesignGraph, anchors, backend: str | None = None) -> DesignGraph:
    """Graph over sequential, port and anchor nets only.

    Every retained net driven by combinational logic gets a synthetic
    ``$pass`` driver whose inputs are the nearest retained nets behind it, so
    nearest-RP relations among retained nets are unchanged. The returned
    graph carries ``origin`` (reduced id -> original id) and ``local``
    (original id -> reduced id, -1 if dropped).
    """
    retained = retained_mask(g, anchors)
    const = g.const_mask
    origin = np.flatnonzero(retained)
    local = np.full(g.m, -1, dtype=np.int64)
    local[origin] = np.arange(origin.size)
    behind = frontier_map(g, retained, Direction.BACKWARD, backend=backend)
    pptr, pidx = g.pred

    nets = [Net(id=i, raw_name=g.nets[o].raw_name, canon_name=g.nets[o].canon_name,
                bit=g.nets[o].bit, is_annotated=g.nets[o].is_annotated)
            for i, o in enumerate(origin.tolist())]
    nodes: list[CellNode] = []

    def add(name, cell_type, cls, ins, outs, locs, module):
        nid = len(nodes)
        nodes.append(CellNode(nid, name, cell_type, cls, list(locs), ins, outs, module))
        for x in ins:
            nets[x].sinks.append(nid)
        for x in outs:
            nets[x].driver = nid

    for node in g.nodes:
        if node.cls is CellClass.COMBINATIONAL:
            for t in node.out_nets:
                if not retained[t]:
                    continue
                front = set()
                for j in range(pptr[t], pptr[t + 1]):
                    p = int(pidx[j])
                    if retained[p]:
                        front.add(p)
                    elif not const[p]:
                        front |= behind[p]
                add(f"$pass${node.name}${t}", "$pass", CellClass.COMBINATIONAL,
                    sorted(int(local[p]) for p in front), [int(local[t])], node.locs,
                    node.annotated_module)
        else:
            outs = [int(local[o]) for o in node.out_nets if retained[o]]
            if node.cls is CellClass.CONSTANT and not outs:
                continue
            add(node.name, node.cell_type, node.cls, [int(local[i]) for i in node.in_nets],
                outs, node.locs, node.annotated_module)

    red = DesignGraph(nodes, nets, g.side)
    red.origin = origin
    red.local = local
    return red
