"""Flattened gate-level design graph shared by the reference and synthesized sides.

A design is a directed hypergraph: cell nodes connected by single-bit nets.
Every net has exactly one driver node and any number of sink nodes. Top-level
ports are nodes too (``PORT_IN`` drives its net, ``PORT_OUT`` sinks it), so
traversals treat design I/O the same way as any other cell.
"""

from __future__ import annotations

import enum
import fnmatch
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import chain
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DanglingRefError, DuplicateNameError, InvalidNodeError, MultiDriverError


class CellClass(enum.Enum):
    SEQUENTIAL = "seq"
    COMBINATIONAL = "comb"
    PORT_IN = "in"
    PORT_OUT = "out"
    CONSTANT = "const"


class Side(enum.Enum):
    REF = "ref"
    SYNTH = "synth"


# Net categories, stored as small ints in DesignGraph.net_category.
CAT_PORT, CAT_SEQ, CAT_COMB = 0, 1, 2

# Glob patterns. Yosys internal cells first, then liberty naming conventions
# (sky130 ``__df*``/``__dl[xr]*``, SAED ``DFF*``/``LATCH*``, generic ``*dff*``).
DEFAULT_SEQ_TYPES = frozenset({
    "$dff", "$dffe", "$adff", "$adffe", "$sdff", "$sdffe", "$sdffce",
    "$dffsr", "$dffsre", "$aldff", "$aldffe", "$dlatch", "$adlatch",
    "$dlatchsr", "$sr", "$ff", "$_DFF_*", "$_DFFE_*", "$_SDFF*", "$_ALDFF*",
    "$_DFFSR*", "$_DLATCH*", "$_SR_*", "$_FF_", "$mem", "$mem_v2", "$memrd*",
    "$memwr*", "$meminit*",
    "*__df*", "*__edf*", "*__sdf*", "*__dl[xr]*", "*__dlclkp*", "*__sdlclkp*",
    "*DFF*", "*dff*", "*LATCH*", "*latch*", "*SRAM*", "*sram*",
    "DFF", "DLATCH",
})


@dataclass(frozen=True, order=True)
class SourceLoc:
    file: str
    line: int
    col: int = 0

    def __post_init__(self):
        if not self.file:
            raise ValueError("SourceLoc.file must be non-empty")
        if self.line < 1:
            raise ValueError(f"SourceLoc.line must be >= 1, got {self.line}")
        if self.col < 0:
            raise ValueError(f"SourceLoc.col must be >= 0, got {self.col}")

    def __str__(self):
        if self.col:
            return f"{self.file}:{self.line}.{self.col}"
        return f"{self.file}:{self.line}"


@dataclass(slots=True, eq=False)
class CellNode:
    id: int
    name: str
    cell_type: str
    cls: CellClass
    locs: list = field(default_factory=list)
    in_nets: list = field(default_factory=list)
    out_nets: list = field(default_factory=list)
    annotated_module: str = ""


@dataclass(slots=True, eq=False)
class Net:
    id: int
    raw_name: str
    canon_name: str
    bit: int = 0
    driver: int = -1
    sinks: list = field(default_factory=list)
    is_annotated: bool = False
    # set when canonicalization produced a name clash; such nets never anchor
    collided: bool = False


@dataclass
class GraphStats:
    m: int = 0
    m_seq: int = 0
    m_comb: int = 0
    m_port: int = 0
    a: int = 0
    k_avg: float = 0.0


@dataclass
class NodeDesc:
    """Input record for :func:`build_graph`. Nets are referenced by name."""
    name: str
    cell_type: str
    cls: CellClass | None = None
    ins: Sequence[str] = ()
    outs: Sequence[str] = ()
    locs: Sequence[SourceLoc] = ()
    module: str = ""


@dataclass
class NetDesc:
    name: str
    bit: int = 0
    annotated: bool = False


@lru_cache(maxsize=32)
def _seq_regex(seq_types: frozenset):
    return re.compile("|".join(f"(?:{fnmatch.translate(p)})" for p in sorted(seq_types)))


def classify_cell(cell_type: str, seq_types: Iterable[str] | None = None) -> CellClass:
    """SEQUENTIAL iff ``cell_type`` matches one of the glob patterns in ``seq_types``."""
    if not cell_type:
        raise ValueError("cell_type must be non-empty")
    pats = DEFAULT_SEQ_TYPES if seq_types is None else frozenset(seq_types)
    if pats and _seq_regex(pats).match(cell_type):
        return CellClass.SEQUENTIAL
    return CellClass.COMBINATIONAL


_CLASS_CODE = {c: i for i, c in enumerate(CellClass)}


def csr_from_pairs(rows: np.ndarray, cols: np.ndarray, m: int):
    """int32 CSR over ``m`` rows from (row, col) pairs; duplicates dropped, columns sorted."""
    key = np.unique(rows.astype(np.int64) * max(m, 1) + cols)
    r, c = np.divmod(key, max(m, 1))
    ptr = np.zeros(m + 1, dtype=np.int32)
    np.cumsum(np.bincount(r, minlength=m), out=ptr[1:])
    return ptr, c.astype(np.int32)


def transpose_csr(ptr: np.ndarray, idx: np.ndarray):
    m = ptr.size - 1
    rows = np.repeat(np.arange(m, dtype=np.int64), np.diff(ptr))
    return csr_from_pairs(idx.astype(np.int64), rows, m)


class DesignGraph:
    """Immutable-after-construction design graph.

    ``nodes`` and ``nets`` are lists indexed by dense ids. ``name_index`` maps
    canonical net names to net ids. Connectivity arrays for traversal kernels
    are built lazily.
    """

    def __init__(self, nodes: list[CellNode], nets: list[Net], side: Side = Side.REF,
                 warnings: Counter | None = None):
        self.nodes = nodes
        self.nets = nets
        self.side = side
        self.warnings = warnings if warnings is not None else Counter()
        self.name_index: dict[str, int] = {}
        self._index_names()

    @cached_property
    def stats(self) -> GraphStats:
        return compute_stats(self)

    def _index_names(self):
        index: dict[str, int] = {}
        clashes: dict[str, int] = {}
        for net in self.nets:
            name = net.canon_name
            if name in index:
                first = self.nets[index[name]]
                first.collided = True
                n = clashes.get(name, 0) + 1
                while f"{name}#{n}" in index:
                    n += 1
                clashes[name] = n
                net.canon_name = f"{name}#{n}"
                net.collided = True
            index[net.canon_name] = net.id
        self.name_index = index

    @property
    def m(self) -> int:
        return len(self.nets)

    def net(self, name: str) -> Net:
        return self.nets[self.name_index[name]]

    def node(self, name: str) -> CellNode:
        return self.nodes[self._node_names[name]]

    @cached_property
    def _node_names(self) -> dict[str, int]:
        return {n.name: n.id for n in self.nodes}

    @cached_property
    def _codes(self):
        """(driver per net, class code per node, node in-net CSR) as arrays."""
        drv = np.fromiter((n.driver for n in self.nets), dtype=np.int64, count=len(self.nets))
        cls = np.fromiter((_CLASS_CODE[n.cls] for n in self.nodes), dtype=np.int8,
                          count=len(self.nodes))
        lens = np.fromiter((len(n.in_nets) for n in self.nodes), dtype=np.int64,
                           count=len(self.nodes))
        ptr = np.zeros(len(self.nodes) + 1, dtype=np.int64)
        np.cumsum(lens, out=ptr[1:])
        idx = np.fromiter(chain.from_iterable(n.in_nets for n in self.nodes), dtype=np.int64,
                          count=int(ptr[-1]))
        return drv, cls, ptr, idx

    @cached_property
    def const_mask(self) -> np.ndarray:
        drv, cls, _, _ = self._codes
        return (cls[drv] == _CLASS_CODE[CellClass.CONSTANT]).astype(np.uint8) if drv.size \
            else np.zeros(0, dtype=np.uint8)

    @cached_property
    def net_category(self) -> np.ndarray:
        drv, cls, ptr, idx = self._codes
        m = len(self.nets)
        out = np.full(m, CAT_COMB, dtype=np.int8)
        if not m:
            return out
        sink_cls = np.repeat(cls, np.diff(ptr))
        seq_sink = np.zeros(m, dtype=bool)
        seq_sink[idx[sink_cls == _CLASS_CODE[CellClass.SEQUENTIAL]]] = True
        pout_sink = np.zeros(m, dtype=bool)
        pout_sink[idx[sink_cls == _CLASS_CODE[CellClass.PORT_OUT]]] = True
        dcls = cls[drv]
        out[(dcls == _CLASS_CODE[CellClass.SEQUENTIAL]) | seq_sink] = CAT_SEQ
        out[(dcls == _CLASS_CODE[CellClass.PORT_IN]) | pout_sink] = CAT_PORT
        return out

    @cached_property
    def port_mask(self) -> np.ndarray:
        return (self.net_category == CAT_PORT).astype(np.uint8)

    @cached_property
    def pred(self):
        """CSR (ptr, idx): for each net, the distinct in-nets of its driver node (sorted)."""
        drv, _, ptr, idx = self._codes
        m = len(self.nets)
        lens = ptr[drv + 1] - ptr[drv]
        rows = np.repeat(np.arange(m, dtype=np.int64), lens)
        offs = np.repeat(ptr[drv] - np.concatenate(([0], np.cumsum(lens)[:-1])), lens) \
            if m else np.zeros(0, dtype=np.int64)
        cols = idx[offs + np.arange(rows.size)] if rows.size else rows
        return csr_from_pairs(rows, cols, m)

    @cached_property
    def succ(self):
        """CSR (ptr, idx): for each net, the distinct out-nets of its sink nodes (sorted).

        At net level this is the transpose of :attr:`pred`.
        """
        return transpose_csr(*self.pred)

    def module_paths(self) -> set[str]:
        """Every instance path seen on a node, plus all of its dotted prefixes."""
        paths = set()
        for node in self.nodes:
            p = node.annotated_module
            while p and p not in paths:
                paths.add(p)
                p = p.rpartition(".")[0]
        return paths

    def __repr__(self):
        return f"DesignGraph(side={self.side.value}, nodes={len(self.nodes)}, nets={len(self.nets)})"


def compute_stats(g: DesignGraph, aligned: int = 0) -> GraphStats:
    cats = np.bincount(g.net_category, minlength=3) if g.nets else np.zeros(3, dtype=int)
    degree = sum(len(neighbors(g, n.id)) for n in g.nodes)
    return GraphStats(
        m=len(g.nets),
        m_seq=int(cats[CAT_SEQ]),
        m_comb=int(cats[CAT_COMB]),
        m_port=int(cats[CAT_PORT]),
        a=aligned,
        k_avg=degree / len(g.nodes) if g.nodes else 0.0,
    )


def neighbors(g: DesignGraph, n: int) -> set[int]:
    """Nodes sharing a net with node ``n``: drivers of its inputs, sinks of its outputs."""
    node = g.nodes[n]
    nets = g.nets
    out = {nets[i].driver for i in node.in_nets}
    for o in node.out_nets:
        out.update(nets[o].sinks)
    out.discard(n)
    return out


def build_graph(nodes: Sequence[NodeDesc], nets: Sequence[NetDesc], side: Side = Side.REF,
                seq_types: Iterable[str] | None = None,
                canon: Callable[[str], str] | None = None) -> DesignGraph:
    """Validate descriptors and assemble a :class:`DesignGraph`.

    Ids are assigned in descriptor order, so identical inputs always produce
    identical graphs. ``canon`` maps raw net names to canonical names; it
    defaults to dot-separator canonicalization.
    """
    if canon is None:
        from .normalize import canonicalize_name
        canon = canonicalize_name
    seq_pats = None if seq_types is None else frozenset(seq_types)

    net_ids: dict[str, int] = {}
    out_nets: list[Net] = []
    for i, d in enumerate(nets):
        if d.name in net_ids:
            raise DuplicateNameError(d.name)
        net_ids[d.name] = i
        out_nets.append(Net(id=i, raw_name=d.name, canon_name=canon(d.name), bit=d.bit,
                            is_annotated=d.annotated))

    def resolve(name, owner):
        try:
            return net_ids[name]
        except KeyError:
            raise DanglingRefError(f"{name!r} referenced by {owner!r}") from None

    out_nodes: list[CellNode] = []
    for i, d in enumerate(nodes):
        cls = d.cls if d.cls is not None else classify_cell(d.cell_type, seq_pats)
        ins = [resolve(x, d.name) for x in d.ins]
        outs = [resolve(x, d.name) for x in d.outs]
        if cls is CellClass.PORT_IN and ins:
            raise InvalidNodeError(f"input port {d.name!r} has in_nets")
        if cls is CellClass.PORT_OUT and outs:
            raise InvalidNodeError(f"output port {d.name!r} has out_nets")
        if cls is CellClass.CONSTANT and ins:
            raise InvalidNodeError(f"constant {d.name!r} has in_nets")
        for o in outs:
            net = out_nets[o]
            if net.driver != -1:
                raise MultiDriverError(net.raw_name)
            net.driver = i
        for x in ins:
            out_nets[x].sinks.append(i)
        out_nodes.append(CellNode(id=i, name=d.name, cell_type=d.cell_type, cls=cls,
                                  locs=list(d.locs), in_nets=ins, out_nets=outs,
                                  annotated_module=d.module))
    for net in out_nets:
        if net.driver == -1:
            raise MultiDriverError(f"{net.raw_name} has no driver")
    return DesignGraph(out_nodes, out_nets, side)
