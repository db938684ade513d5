"""Synthetic designs used by tests, the acceptance suite and benchmarks."""

from __future__ import annotations

import numpy as np

from ..graph import CellClass, DesignGraph, NetDesc, NodeDesc, Side, SourceLoc, build_graph
from ..ingest import read_fixture

F1_TEXT = """\
port in in1
port in in2
port in clk
port out out1
cell g1 AND comb loc=top.v:3 in=in1,in2 out=w1
cell r1 DFF seq loc=top.v:4 in=w1,clk out=q1
cell g2 XOR comb loc=top.v:5 in=q1,in2 out=out1
"""

P2_TEXT = """\
port in a1
port in b1
port in c1
port in a2
port in b2
port in c2
port in clk
port out out1
port out out2
cell g1 AND comb loc=p2.v:3 in=a1,b1 out=w1
cell r1 DFF seq loc=p2.v:4 in=w1,clk out=q1
cell h1 XOR comb loc=p2.v:5 in=q1,c1 out=out1
cell g2 AND comb loc=p2.v:7 in=a2,b2 out=w2
cell r2 DFF seq loc=p2.v:8 in=w2,clk out=q2
cell h2 XOR comb loc=p2.v:9 in=q2,c2 out=out2
"""


def f1(side: Side = Side.REF) -> DesignGraph:
    return read_fixture(F1_TEXT, side)


def p2(side: Side = Side.REF) -> DesignGraph:
    """Two independent AND -> flop -> XOR slices sharing only the clock."""
    return read_fixture(P2_TEXT, side)


_GATES = ("AND", "OR", "XOR", "NAND", "NOR", "XNOR")


def _pairs(rng, width: int) -> list[tuple[int, int]]:
    """``width`` distinct unordered index pairs covering every index at least once."""
    for _ in range(100):
        a = rng.permutation(width)
        b = rng.permutation(width)
        pairs = [tuple(sorted((int(x), int(y)))) for x, y in zip(a, b)]
        if all(x != y for x, y in pairs) and len(set(pairs)) == width:
            return pairs
    # fallback: a ring, always valid for width >= 3
    return [(i, (i + 1) % width) for i in range(width)]


def pipeline(slices: int = 13, width: int = 16, layers: int = 4, stages: int = 5,
             seed: int = 0, file: str = "pipe.v", twin_frac: float = 0.0) -> DesignGraph:
    """Multi-slice pipelined datapath.

    Each slice has its own input and output ports. A stage is ``layers``
    layers of 2-input gates over ``width`` bits followed by a register bank;
    gate inputs are distinct pairs of the previous layer. All flops share one
    clock port. Every cell gets its own source line.

    ``twin_frac`` duplicates that fraction of gates: the twin reads the same
    inputs and both feed an XOR that replaces the original downstream. A gate
    and its twin have identical signatures, so renaming both leaves a
    genuine tie. Without twins the net count is
    ``slices * width * (1 + stages * (layers + 1)) + 1``.
    """
    if width < 3:
        raise ValueError("width must be >= 3")
    rng = np.random.default_rng(seed)
    nodes: list[NodeDesc] = [NodeDesc("clk", "$input", CellClass.PORT_IN, outs=["clk"])]
    nets: list[NetDesc] = [NetDesc("clk")]
    line = 1
    for s in range(slices):
        mod = f"s{s}"
        prev = []
        for i in range(width):
            name = f"{mod}_in[{i}]"
            nodes.append(NodeDesc(name, "$input", CellClass.PORT_IN, outs=[name]))
            nets.append(NetDesc(name, i))
            prev.append(name)
        for k in range(stages):
            path = f"{mod}.st{k}"
            for lyr in range(layers):
                cur = []
                for j, (x, y) in enumerate(_pairs(rng, width)):
                    out = f"{path}.n{lyr}_{j}"
                    gtype = _GATES[int(rng.integers(len(_GATES)))]
                    nodes.append(NodeDesc(f"{path}.g{lyr}_{j}", gtype, CellClass.COMBINATIONAL,
                                          ins=[prev[x], prev[y]], outs=[out],
                                          locs=[SourceLoc(file, line)], module=path))
                    line += 1
                    nets.append(NetDesc(out))
                    if twin_frac and rng.random() < twin_frac:
                        tw, mg = f"{out}t", f"{out}m"
                        nodes.append(NodeDesc(f"{path}.g{lyr}_{j}t", gtype, CellClass.COMBINATIONAL,
                                              ins=[prev[x], prev[y]], outs=[tw],
                                              locs=[SourceLoc(file, line)], module=path))
                        nodes.append(NodeDesc(f"{path}.g{lyr}_{j}m", "XOR", CellClass.COMBINATIONAL,
                                              ins=[out, tw], outs=[mg],
                                              locs=[SourceLoc(file, line + 1)], module=path))
                        line += 2
                        nets += [NetDesc(tw), NetDesc(mg)]
                        out = mg
                    cur.append(out)
                prev = cur
            regs = []
            for j in range(width):
                q = f"{path}.q[{j}]"
                nodes.append(NodeDesc(f"{path}.r{j}", "DFF", CellClass.SEQUENTIAL,
                                      ins=[prev[j], "clk"], outs=[q],
                                      locs=[SourceLoc(file, line)], module=path))
                line += 1
                nets.append(NetDesc(q, j))
                regs.append(q)
            prev = regs
        for j, q in enumerate(prev):
            nodes.append(NodeDesc(f"{mod}_out[{j}]", "$output", CellClass.PORT_OUT, ins=[q]))
    return build_graph(nodes, nets, Side.REF)


def pipeline_for_nets(target_nets: int, width: int = 16, layers: int = 4, stages: int = 5,
                      seed: int = 0) -> DesignGraph:
    """Pipeline with the slice count chosen so the net count is at least ``target_nets``."""
    per = width * (1 + stages * (layers + 1))
    return pipeline(max(1, -(-(target_nets - 1) // per)), width, layers, stages, seed)


def random_design(n_nets: int, seed: int = 0, n_inputs: int | None = None, seq_frac: float = 0.15,
                  max_fanin: int = 3, cyclic: bool = False, n_outputs: int | None = None,
                  const_frac: float = 0.0) -> DesignGraph:
    """Random single-output-per-cell design with about ``n_nets`` nets.

    Cells draw inputs from earlier nets. With ``cyclic`` some flops (and a
    few gates) also read later nets, closing feedback loops. Nets without
    sinks become output ports, plus ``n_outputs`` random extra ones.
    """
    rng = np.random.default_rng(seed)
    if n_inputs is None:
        n_inputs = max(2, n_nets // 20)
    n_inputs = min(n_inputs, n_nets)
    n_const = int(const_frac * n_nets)
    nodes: list[NodeDesc] = []
    net_names: list[str] = []
    for i in range(n_inputs):
        name = f"in{i}"
        nodes.append(NodeDesc(name, "$input", CellClass.PORT_IN, outs=[name]))
        net_names.append(name)
    for i in range(n_const):
        name = f"k{i}"
        nodes.append(NodeDesc(f"$const{i}", "$const", CellClass.CONSTANT, outs=[name]))
        net_names.append(name)
    n_cells = max(0, n_nets - len(net_names))
    pending_back: list[tuple[int, int]] = []
    for c in range(n_cells):
        out = f"n{c}"
        seq = rng.random() < seq_frac
        k = int(rng.integers(1, max_fanin + 1))
        avail = len(net_names)
        ins = sorted({int(x) for x in rng.integers(0, avail, size=min(k, avail))})
        cls = CellClass.SEQUENTIAL if seq else CellClass.COMBINATIONAL
        nodes.append(NodeDesc(f"c{c}", "DFF" if seq else _GATES[c % len(_GATES)], cls,
                              ins=[net_names[x] for x in ins], outs=[out],
                              locs=[SourceLoc("rnd.v", c + 1)]))
        if cyclic and seq and rng.random() < 0.5:
            pending_back.append((len(nodes) - 1, c))
        net_names.append(out)
    if cyclic:
        for node_idx, c in pending_back:
            later = n_cells - c - 1
            if later > 0:
                t = c + 1 + int(rng.integers(later))
                d = nodes[node_idx]
                d.ins = list(d.ins) + [f"n{t}"]
    sink_count = {name: 0 for name in net_names}
    for d in nodes:
        for x in d.ins:
            sink_count[x] += 1
    outs = [n for n in net_names if sink_count[n] == 0 and not n.startswith("k")]
    extra = n_outputs if n_outputs is not None else max(1, n_cells // 50)
    cells = [f"n{c}" for c in range(n_cells)]
    if cells:
        outs += [cells[int(x)] for x in rng.integers(0, len(cells), size=extra)]
    for name in sorted(set(outs)):
        nodes.append(NodeDesc(f"{name}$po", "$output", CellClass.PORT_OUT, ins=[name]))
    nets = [NetDesc(n) for n in net_names]
    return build_graph(nodes, nets, Side.REF)
