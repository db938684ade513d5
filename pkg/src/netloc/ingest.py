"""Readers for Yosys-style JSON netlists, annotation files and the GNL text fixture format.

Yosys JSON is flattened on read: module instances are inlined with
dot-joined instance paths and every bus is split into single-bit nets named
``name`` (1 bit) or ``name[i]``.

GNL is a small line-oriented format used by the test fixtures::

    port in <name>
    port out <name>
    cell <id> <type> <seq|comb|const> [loc=<file>:<line>.<col>]... [module=<path>] in=<net,...> out=<net,...>
    net <name> [annot] [bit=<n>]
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .errors import (FixtureParseError, MalformedJSONError, MultiDriverError, NoTopError,
                     UnknownBitError)
from .graph import (CellClass, DesignGraph, NetDesc, NodeDesc, Side, SourceLoc, build_graph,
                    classify_cell)

_SRC_RE = re.compile(r"^(?P<file>.+?):(?P<line>\d+)(?:\.(?P<col>\d+))?(?:-\d+(?:\.\d+)?)?$")
_BIT_RE = re.compile(r"\[(\d+)\]$")
_TRAILING_IDX_RE = re.compile(r"_(\d+)$")

# Output pin names assumed when a cell carries no port_directions.
_OUTPUT_PINS = frozenset({"Y", "Q", "QN", "Q_N", "X", "Z", "ZN", "CO", "COUT", "S", "SUM",
                          "O", "OUT", "RD_DATA", "GCLK"})


def parse_src_attribute(s: str, tally: Counter | None = None) -> list[SourceLoc]:
    """Split a ``src`` attribute into source locations.

    Segments are ``|``-separated ``file:line.col`` or ``file:line.col-line2.col2``;
    each yields its first coordinate. Unparseable segments are skipped and
    counted under ``"bad_src"`` in ``tally``.
    """
    locs = []
    if not s:
        return locs
    for seg in s.split("|"):
        seg = seg.strip()
        m = _SRC_RE.match(seg)
        if m is None or int(m["line"]) < 1:
            if tally is not None:
                tally["bad_src"] += 1
            continue
        locs.append(SourceLoc(m["file"], int(m["line"]), int(m["col"] or 0)))
    return locs


def _truthy(v) -> bool:
    if isinstance(v, str):
        return v.strip("0") != "" if set(v) <= {"0", "1"} and v else v not in ("", "false")
    return bool(v)


def _bit_names(name: str, wire: dict) -> list[str]:
    bits = wire.get("bits", [])
    if len(bits) == 1 and "offset" not in wire:
        return [name]
    offset = int(wire.get("offset", 0))
    upto = _truthy(wire.get("upto", 0))
    w = len(bits)
    return [f"{name}[{offset + (w - 1 - i if upto else i)}]" for i in range(w)]


class _Flattener:
    def __init__(self, modules: dict, seq_types, tally: Counter):
        self.modules = modules
        self.seq_types = seq_types
        self.tally = tally
        self.next_key = 0
        self.cells: list[tuple[str, str, dict, list, list, list, str]] = []
        self.drivers: dict = {}
        self.names: dict = {}
        self.net_locs: dict = {}
        self.annotated: set = set()
        self.kept: set = set()

    def fresh(self):
        self.next_key += 1
        return ("b", self.next_key)

    def is_inlined(self, mod_name):
        mod = self.modules.get(mod_name)
        return mod is not None and not _truthy(mod.get("attributes", {}).get("blackbox", 0))

    def directions(self, cell: dict) -> dict:
        dirs = cell.get("port_directions")
        if dirs:
            return dirs
        mod = self.modules.get(cell.get("type"))
        if mod is not None:
            return {p: d.get("direction", "input") for p, d in mod.get("ports", {}).items()}
        return {p: ("output" if p in _OUTPUT_PINS else "input") for p in cell.get("connections", {})}

    def key(self, bit, bitmap, where):
        if isinstance(bit, str):
            if bit in ("0", "1", "x", "z"):
                return ("c", bit)
            raise MalformedJSONError(f"bad bit {bit!r} in {where}")
        try:
            return bitmap[bit]
        except KeyError:
            raise UnknownBitError(f"bit {bit} in {where}") from None

    def inline(self, mod_name: str, prefix: str, bitmap: dict, stack: tuple):
        if mod_name in stack:
            raise MalformedJSONError(f"recursive instantiation of {mod_name}")
        mod = self.modules[mod_name]
        if not isinstance(mod, dict):
            raise MalformedJSONError(f"module {mod_name} is not an object")
        depth = len(stack)
        pfx = f"{prefix}." if prefix else ""
        netnames = mod.get("netnames", {})
        declared = set()
        for wname in sorted(netnames):
            declared.update(b for b in netnames[wname].get("bits", []) if isinstance(b, int))
        for pname in sorted(mod.get("ports", {})):
            declared.update(b for b in mod["ports"][pname].get("bits", []) if isinstance(b, int))
        for b in sorted(declared):
            if b not in bitmap:
                bitmap[b] = self.fresh()

        for wname in sorted(netnames):
            wire = netnames[wname]
            attrs = wire.get("attributes", {}) or {}
            hidden = int(_truthy(wire.get("hide_name", 0)) or wname.startswith("$"))
            locs = parse_src_attribute(str(attrs.get("src", "")), self.tally)
            for bit, bname in zip(wire.get("bits", []), _bit_names(wname, wire)):
                if not isinstance(bit, int):
                    continue
                k = bitmap[bit]
                self.names.setdefault(k, []).append((hidden, depth, f"{pfx}{bname}"))
                if locs:
                    self.net_locs.setdefault(k, locs)
                if _truthy(attrs.get("annotate", 0)):
                    self.annotated.add(k)
                if _truthy(attrs.get("keep", 0)):
                    self.kept.add(k)

        cells = mod.get("cells", {})
        for cname in sorted(cells):
            cell = cells[cname]
            ctype = cell.get("type")
            if not ctype:
                raise MalformedJSONError(f"cell {pfx}{cname} has no type")
            conns = cell.get("connections", {})
            where = f"{pfx}{cname}"
            if self.is_inlined(ctype):
                sub = self.modules[ctype]
                subports = sub.get("ports", {})
                submap = {}
                for pname in sorted(subports):
                    pbits = subports[pname].get("bits", [])
                    outer = conns.get(pname, [])
                    for i, b in enumerate(pbits):
                        if i < len(outer) and isinstance(b, int):
                            submap[b] = self.key(outer[i], bitmap, where)
                self.inline(ctype, where, submap, stack + (mod_name,))
                continue
            dirs = self.directions(cell)
            ins, outs = [], []
            for pname in sorted(conns):
                keys = [self.key(b, bitmap, where) for b in conns[pname]]
                if dirs.get(pname, "input") == "output":
                    outs.extend(k for k in keys if k[0] == "b")
                else:
                    ins.extend(keys)
            attrs = cell.get("attributes", {}) or {}
            locs = parse_src_attribute(str(attrs.get("src", "")), self.tally)
            self.cells.append((where, ctype, cell, ins, outs, locs, prefix))


def _pick_top(modules: dict) -> str:
    tops = [n for n, m in modules.items() if _truthy((m.get("attributes") or {}).get("top", 0))]
    if len(tops) == 1:
        return tops[0]
    if len(tops) > 1:
        raise NoTopError(f"several modules marked top: {sorted(tops)}")
    used = {c.get("type") for m in modules.values() for c in m.get("cells", {}).values()}
    roots = [n for n in modules if n not in used
             and not _truthy((modules[n].get("attributes") or {}).get("blackbox", 0))]
    if len(roots) == 1:
        return roots[0]
    raise NoTopError(f"candidates: {sorted(roots)}")


def read_netlist_json(data: bytes | str, side: Side = Side.REF, seq_types: Iterable[str] | None = None,
                      canon: Callable[[str], str] | None = None) -> DesignGraph:
    """Flatten a Yosys-style JSON netlist into a :class:`DesignGraph`."""
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise MalformedJSONError(str(e)) from None
    modules = doc.get("modules") if isinstance(doc, dict) else None
    if not isinstance(modules, dict) or not modules:
        raise MalformedJSONError("missing 'modules' object")
    top = _pick_top(modules)
    tally: Counter = Counter()
    fl = _Flattener(modules, seq_types, tally)
    topmap: dict = {}
    fl.inline(top, "", topmap, ())

    nodes: list[NodeDesc] = []
    port_in, port_out = [], []
    for pname in sorted(modules[top].get("ports", {})):
        port = modules[top]["ports"][pname]
        direction = port.get("direction", "input")
        for bit, bname in zip(port.get("bits", []), _bit_names(pname, port)):
            k = fl.key(bit, topmap, f"port {pname}")
            if direction == "output":
                port_out.append((bname, k))
            else:
                port_in.append((bname, k))

    driver: dict = {}

    def drive(k, who):
        if k in driver:
            raise MultiDriverError(f"bit driven by {driver[k]} and {who}")
        driver[k] = who

    for bname, k in port_in:
        if k[0] == "b":
            drive(k, bname)
    for where, ctype, _, _, outs, _, _ in fl.cells:
        for k in outs:
            drive(k, where)

    used = {k for c in fl.cells for k in c[3]} | {k for _, k in port_out} | set(driver)
    # constant-tied output ports get their own constant driver so the port keeps its name
    extra_consts = []
    for bname, k in port_out:
        if k[0] == "c":
            nk = fl.fresh()
            fl.names.setdefault(nk, []).append((0, 0, bname))
            extra_consts.append((bname, k[1], nk))
            used.add(nk)
    port_out = [(b, next(nk for bb, _, nk in extra_consts if bb == b) if k[0] == "c" else k)
                for b, k in port_out]

    def name_of(k):
        if k[0] == "c":
            return f"$const{k[1]}"
        cands = fl.names.get(k)
        return min(cands)[2] if cands else f"$n{k[1]}"

    names = {k: name_of(k) for k in used}
    undriven = sorted(names[k] for k in used if k not in driver and k[0] == "b"
                      and k not in {nk for _, _, nk in extra_consts})

    for bname, k in port_in:
        if k[0] == "b":
            nodes.append(NodeDesc(bname, "$input", CellClass.PORT_IN, outs=[names[k]]))
    for bname, k in port_out:
        oname = bname if bname not in {n.name for n in nodes} else f"{bname}$out"
        nodes.append(NodeDesc(oname, "$output", CellClass.PORT_OUT, ins=[names[k]]))
    for bname, val, nk in extra_consts:
        nodes.append(NodeDesc(f"$const${bname}", f"$const{val}", CellClass.CONSTANT, outs=[names[nk]]))
    const_vals = sorted({k[1] for k in used if k[0] == "c"})
    for val in const_vals:
        nodes.append(NodeDesc(f"$const{val}", f"$const{val}", CellClass.CONSTANT,
                              outs=[f"$const{val}"]))
    if undriven:
        tally["undriven"] += len(undriven)
        nodes.append(NodeDesc("$undriven", "$undriven", CellClass.CONSTANT, outs=undriven))

    for where, ctype, _, ins, outs, locs, prefix in fl.cells:
        if not locs:
            for k in outs:
                if k in fl.net_locs:
                    locs = fl.net_locs[k]
                    break
        nodes.append(NodeDesc(where, ctype, classify_cell(ctype, seq_types),
                              ins=[names[k] for k in ins], outs=[names[k] for k in outs],
                              locs=locs, module=prefix))
    nodes.sort(key=lambda d: (d.cls is not CellClass.PORT_IN, d.cls is not CellClass.PORT_OUT, d.name))

    nets = []
    for k, n in sorted(names.items(), key=lambda kv: kv[1]):
        m = _BIT_RE.search(n)
        nets.append(NetDesc(n, int(m.group(1)) if m else 0, annotated=k in fl.annotated))
    g = build_graph(nodes, nets, side, seq_types=seq_types, canon=canon)
    g.warnings.update(tally)
    g.kept = {g.name_index[canon(names[k])] if canon else _lookup_raw(g, names[k])
              for k in fl.kept if k in names}
    return g


def _lookup_raw(g: DesignGraph, raw: str) -> int:
    for net in g.nets:
        if net.raw_name == raw:
            return net.id
    raise KeyError(raw)


@dataclass
class AnnotationSet:
    entries: list = field(default_factory=list)
    resolved: set = field(default_factory=set)
    unbound: list = field(default_factory=list)

    def __iter__(self):
        return iter(sorted(self.resolved))

    def __len__(self):
        return len(self.resolved)


def bind_annotation(g: DesignGraph, module: str, net: str,
                    canon: Callable[[str], str] | None = None) -> int | None:
    """Net id for a (module, net) annotation entry, or None."""
    if canon is None:
        from .normalize import canonicalize_name
        canon = canonicalize_name
    full = f"{module}.{net}" if module else net
    spellings = [full]
    bus = _TRAILING_IDX_RE.sub(r"[\1]", full)
    if bus != full:
        spellings.append(bus)
    for s in spellings:
        for cand in (canon(s), s):
            nid = g.name_index.get(cand)
            if nid is not None:
                return nid
    return None


def read_annotations(data: bytes | str, g: DesignGraph,
                     canon: Callable[[str], str] | None = None) -> AnnotationSet:
    """Bind a JSON array of ``{"module", "net"}`` objects to nets of ``g``.

    Bound nets get ``is_annotated`` set; unknown entries land in ``unbound``.
    """
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise MalformedJSONError(str(e)) from None
    if not isinstance(doc, list):
        raise MalformedJSONError("annotation file must be a JSON array")
    out = AnnotationSet()
    for entry in doc:
        if not isinstance(entry, dict) or not isinstance(entry.get("net"), str):
            raise MalformedJSONError(f"bad annotation entry {entry!r}")
        module = entry.get("module") or ""
        out.entries.append((module, entry["net"]))
        nid = bind_annotation(g, module, entry["net"], canon)
        if nid is None:
            out.unbound.append((module, entry["net"]))
        else:
            out.resolved.add(nid)
            g.nets[nid].is_annotated = True
    return out


# --- GNL fixture format -----------------------------------------------------

_CLASS_TOKENS = {"seq": CellClass.SEQUENTIAL, "comb": CellClass.COMBINATIONAL,
                 "const": CellClass.CONSTANT}
_ESCAPES = {"%": "%25", " ": "%20", "\t": "%09", ",": "%2C", "=": "%3D"}


def _enc(s: str) -> str:
    return "".join(_ESCAPES.get(c, c) for c in s)


def _dec(s: str) -> str:
    return re.sub(r"%([0-9A-Fa-f]{2})", lambda m: chr(int(m.group(1), 16)), s)


def _parse_loc(tok: str, lineno: int) -> SourceLoc:
    locs = parse_src_attribute(_dec(tok))
    if len(locs) != 1:
        raise FixtureParseError(lineno, f"bad loc {tok!r}")
    return locs[0]


def read_fixture(text: str, side: Side = Side.REF, seq_types: Iterable[str] | None = None,
                 canon: Callable[[str], str] | None = None) -> DesignGraph:
    """Parse GNL text. Nets are declared implicitly on first reference."""
    nodes: list[NodeDesc] = []
    nets: dict[str, NetDesc] = {}
    node_names: set[str] = set()

    def net(name):
        if name not in nets:
            m = _BIT_RE.search(name)
            nets[name] = NetDesc(name, int(m.group(1)) if m else 0)
        return name

    def split_list(val):
        return [net(_dec(x)) for x in val.split(",") if x]

    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip() if line.lstrip().startswith("#") else line.strip()
        if not line:
            continue
        toks = line.split()
        kind = toks[0]
        if kind == "port":
            if len(toks) != 3 or toks[1] not in ("in", "out"):
                raise FixtureParseError(lineno, "expected 'port in|out <name>'")
            name = _dec(toks[2])
            if toks[1] == "in":
                nodes.append(NodeDesc(name, "$input", CellClass.PORT_IN, outs=[net(name)]))
                node_names.add(name)
            else:
                nname = name if name not in node_names else f"{name}$out"
                nodes.append(NodeDesc(nname, "$output", CellClass.PORT_OUT, ins=[net(name)]))
                node_names.add(nname)
        elif kind == "cell":
            if len(toks) < 4:
                raise FixtureParseError(lineno, "expected 'cell <id> <type> <class> ...'")
            cls = _CLASS_TOKENS.get(toks[3])
            if cls is None:
                raise FixtureParseError(lineno, f"bad cell class {toks[3]!r}")
            locs, ins, outs, module = [], [], [], ""
            for tok in toks[4:]:
                key, eq, val = tok.partition("=")
                if not eq:
                    raise FixtureParseError(lineno, f"bad token {tok!r}")
                if key == "loc":
                    locs.append(_parse_loc(val, lineno))
                elif key == "in":
                    ins = split_list(val)
                elif key == "out":
                    outs = split_list(val)
                elif key == "module":
                    module = _dec(val)
                else:
                    raise FixtureParseError(lineno, f"unknown key {key!r}")
            name = _dec(toks[1])
            nodes.append(NodeDesc(name, _dec(toks[2]), cls, ins=ins, outs=outs, locs=locs,
                                  module=module))
            node_names.add(name)
        elif kind == "net":
            if len(toks) < 2:
                raise FixtureParseError(lineno, "expected 'net <name> [annot] [bit=<n>]'")
            d = nets[net(_dec(toks[1]))]
            for tok in toks[2:]:
                if tok == "annot":
                    d.annotated = True
                elif tok.startswith("bit=") and tok[4:].isdigit():
                    d.bit = int(tok[4:])
                else:
                    raise FixtureParseError(lineno, f"bad net flag {tok!r}")
        else:
            raise FixtureParseError(lineno, f"unknown record {kind!r}")
    return build_graph(nodes, list(nets.values()), side, seq_types=seq_types, canon=canon)


def write_fixture(g: DesignGraph) -> str:
    nets = g.nets
    lines = []
    for node in g.nodes:
        if node.cls is CellClass.PORT_IN:
            lines.append(f"port in {_enc(nets[node.out_nets[0]].raw_name)}")
        elif node.cls is CellClass.PORT_OUT:
            lines.append(f"port out {_enc(nets[node.in_nets[0]].raw_name)}")
    for node in g.nodes:
        if node.cls in (CellClass.PORT_IN, CellClass.PORT_OUT):
            continue
        parts = ["cell", _enc(node.name), _enc(node.cell_type), node.cls.value]
        parts += [f"loc={_enc(str(loc))}" for loc in node.locs]
        if node.annotated_module:
            parts.append(f"module={_enc(node.annotated_module)}")
        parts.append("in=" + ",".join(_enc(nets[i].raw_name) for i in node.in_nets))
        parts.append("out=" + ",".join(_enc(nets[o].raw_name) for o in node.out_nets))
        lines.append(" ".join(parts))
    for net in nets:
        m = _BIT_RE.search(net.raw_name)
        flags = []
        if net.is_annotated:
            flags.append("annot")
        if net.bit != (int(m.group(1)) if m else 0):
            flags.append(f"bit={net.bit}")
        if flags:
            lines.append(" ".join(["net", _enc(net.raw_name)] + flags))
    return "\n".join(lines) + "\n"


def load_design(path: str | Path, side: Side = Side.REF, seq_types=None, canon=None) -> DesignGraph:
    """Read a design file, choosing the reader by extension (``.json`` or GNL)."""
    path = Path(path)
    data = path.read_bytes()
    if path.suffix.lower() == ".json":
        return read_netlist_json(data, side, seq_types, canon)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise FixtureParseError(0, str(e)) from None
    return read_fixture(text, side, seq_types, canon)
