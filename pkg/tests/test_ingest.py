import json
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netloc.errors import (FixtureParseError, MalformedJSONError, MultiDriverError, NoTopError,
                           UnknownBitError)
from netloc.evalkit import generators
from netloc.graph import CellClass, Side, SourceLoc
from netloc.ingest import (bind_annotation, load_design, parse_src_attribute, read_annotations,
                           read_fixture, read_netlist_json, write_fixture)


def and_dff_module(src_and="top.v:3.5-3.20", src_dff="top.v:4.1"):
    """a & b -> flop -> q, with a netname for the AND output."""
    return {
        "ports": {
            "a": {"direction": "input", "bits": [2]},
            "b": {"direction": "input", "bits": [3]},
            "clk": {"direction": "input", "bits": [4]},
            "q": {"direction": "output", "bits": [6]},
        },
        "cells": {
            "u_and": {"type": "$_AND_", "port_directions": {"A": "input", "B": "input", "Y": "output"},
                      "connections": {"A": [2], "B": [3], "Y": [5]},
                      "attributes": {"src": src_and}},
            "u_ff": {"type": "$_DFF_P_", "port_directions": {"C": "input", "D": "input", "Q": "output"},
                     "connections": {"C": [4], "D": [5], "Q": [6]},
                     "attributes": {"src": src_dff}},
        },
        "netnames": {
            "a": {"bits": [2]}, "b": {"bits": [3]}, "clk": {"bits": [4]},
            "w": {"bits": [5], "attributes": {"src": "top.v:2"}},
            "q": {"bits": [6]},
        },
    }


def doc(**modules):
    return json.dumps({"modules": modules})


class TestSrcAttribute:
    @pytest.mark.parametrize("s,want", [
        ("top.v:3", [SourceLoc("top.v", 3)]),
        ("top.v:3.5", [SourceLoc("top.v", 3, 5)]),
        ("top.v:3.5-3.20", [SourceLoc("top.v", 3, 5)]),
        ("a.v:1.2-4.5|b.v:7", [SourceLoc("a.v", 1, 2), SourceLoc("b.v", 7)]),
        ("C:/w/x.sv:12.1-12.9", [SourceLoc("C:/w/x.sv", 12, 1)]),
        ("", []),
    ])
    def test_examples(self, s, want):
        assert parse_src_attribute(s) == want

    def test_bad_segments_counted(self):
        tally = Counter()
        assert parse_src_attribute("junk|a.v:0|a.v:2", tally) == [SourceLoc("a.v", 2)]
        assert tally["bad_src"] == 2

    @settings(max_examples=200)
    @given(st.from_regex(r"[a-z][a-z0-9_/]{0,10}\.s?v", fullmatch=True), st.integers(1, 10**6),
           st.integers(0, 500))
    def test_round_trip(self, f, line, col):
        loc = SourceLoc(f, line, col)
        assert parse_src_attribute(str(loc)) == [loc]

    @settings(max_examples=200)
    @given(st.text(max_size=30))
    def test_never_raises(self, s):
        for loc in parse_src_attribute(s):
            assert loc.line >= 1


class TestReadJson:
    def test_basic(self):
        g = read_netlist_json(doc(top=and_dff_module()))
        assert sorted(n.raw_name for n in g.nets) == ["a", "b", "clk", "q", "w"]
        assert g.node("u_and").locs == [SourceLoc("top.v", 3, 5)]
        assert g.node("u_ff").cls is CellClass.SEQUENTIAL
        assert g.node("u_and").cls is CellClass.COMBINATIONAL

    def test_netname_src_fills_cell_without_locs(self):
        g = read_netlist_json(doc(top=and_dff_module(src_and="")))
        assert g.node("u_and").locs == [SourceLoc("top.v", 2)]

    def test_key_order_independent(self):
        m = and_dff_module()
        flipped = {k: dict(reversed(list(v.items()))) for k, v in reversed(list(m.items()))}
        a = read_netlist_json(doc(top=m))
        b = read_netlist_json(doc(top=flipped))
        assert write_fixture(a) == write_fixture(b)

    def test_multi_driver(self):
        m = and_dff_module()
        m["cells"]["u_ff"]["connections"]["Q"] = [5]
        with pytest.raises(MultiDriverError) as e:
            read_netlist_json(doc(top=m))
        assert e.value.code == "MULTI_DRIVER"

    def test_unknown_bit(self):
        m = and_dff_module()
        m["cells"]["u_and"]["connections"]["A"] = [99]
        with pytest.raises(UnknownBitError):
            read_netlist_json(doc(top=m))

    @pytest.mark.parametrize("text", ["{", "[]", '{"modules": {}}', '{"modules": 3}'])
    def test_malformed(self, text):
        with pytest.raises(MalformedJSONError):
            read_netlist_json(text)

    def test_no_top(self):
        with pytest.raises(NoTopError):
            read_netlist_json(doc(x=and_dff_module(), y=and_dff_module()))

    def test_top_attribute_wins(self):
        y = and_dff_module()
        y["attributes"] = {"top": "00000000000000000000000000000001"}
        g = read_netlist_json(doc(x=and_dff_module(), y=y))
        assert g.m == 5

    def test_constants(self):
        m = and_dff_module()
        m["cells"]["u_and"]["connections"]["B"] = ["1"]
        m["ports"]["k"] = {"direction": "output", "bits": ["0"]}
        g = read_netlist_json(doc(top=m))
        names = {n.raw_name for n in g.nets}
        assert "$const1" in names
        # the constant-tied output port keeps its own name and a constant driver
        k = g.nets[g.name_index["k"]]
        assert g.nodes[k.driver].cls is CellClass.CONSTANT
        assert g.const_mask[k.id] and g.const_mask[g.name_index["$const1"]]

    def test_undriven_bits(self):
        m = and_dff_module()
        m["netnames"]["dangling"] = {"bits": [7]}
        m["cells"]["u_ff"]["connections"]["D"] = [7]
        g = read_netlist_json(doc(top=m))
        d = g.nets[g.name_index["dangling"]]
        assert g.nodes[d.driver].name == "$undriven"
        assert g.warnings["undriven"] == 1

    def test_bus_offset_and_upto(self):
        m = and_dff_module()
        m["netnames"]["bus"] = {"bits": [2, 3], "offset": 4}
        m["netnames"]["rev"] = {"bits": [2, 3], "upto": 1}
        g = read_netlist_json(doc(top=m))
        # a and b are also named bus[4]/bus[5] and rev[1]/rev[0]; the ports' own names win
        assert "bus[4]" not in g.name_index
        m["ports"]["a"]["bits"] = [8]
        m["netnames"]["a"]["bits"] = [8]
        m["ports"]["b"]["bits"] = [9]
        m["netnames"]["b"]["bits"] = [9]
        m["cells"]["u_and"]["connections"].update(A=[8], B=[9])
        m["cells"]["pa"] = {"type": "BUF", "port_directions": {"A": "input", "Y": "output"},
                            "connections": {"A": [8], "Y": [2]}}
        m["cells"]["pb"] = {"type": "BUF", "port_directions": {"A": "input", "Y": "output"},
                            "connections": {"A": [9], "Y": [3]}}
        g = read_netlist_json(doc(top=m))
        assert g.nets[g.name_index["bus[4]"]].bit == 4
        assert g.nets[g.name_index["bus[5]"]].bit == 5
        assert g.node("pa").out_nets == [g.name_index["bus[4]"]]

    def test_hierarchy_matches_hand_flattened(self):
        leaf = {
            "ports": {"x": {"direction": "input", "bits": [2]}, "y": {"direction": "input", "bits": [3]},
                      "z": {"direction": "output", "bits": [4]}},
            "cells": {"g": {"type": "$_AND_", "connections": {"A": [2], "B": [3], "Y": [4]},
                            "attributes": {"src": "leaf.v:2"}}},
            "netnames": {"x": {"bits": [2]}, "y": {"bits": [3]}, "z": {"bits": [4]}},
        }
        top = {
            "ports": {"a": {"direction": "input", "bits": [2]}, "b": {"direction": "input", "bits": [3]},
                      "o": {"direction": "output", "bits": [5]}},
            "cells": {"u0": {"type": "leaf", "connections": {"x": [2], "y": [3], "z": [4]}},
                      "inv": {"type": "$_NOT_", "connections": {"A": [4], "Y": [5]},
                              "attributes": {"src": "top.v:9"}}},
            "netnames": {"a": {"bits": [2]}, "b": {"bits": [3]}, "o": {"bits": [5]},
                         "$auto$1": {"bits": [4], "hide_name": 1}},
        }
        hier = read_netlist_json(doc(top=top, leaf=leaf))
        flat = read_fixture("port in a\nport in b\nport out o\n"
                            "cell inv $_NOT_ comb loc=top.v:9 in=u0.z out=o\n"
                            "cell u0.g $_AND_ comb loc=leaf.v:2 module=u0 in=a,b out=u0.z\n")
        assert write_fixture(hier) == write_fixture(flat)

    def test_recursive_module(self):
        m = and_dff_module()
        m["cells"]["self"] = {"type": "top", "connections": {}}
        t = and_dff_module()
        t["cells"]["inner"] = {"type": "m", "connections": {}}
        with pytest.raises((MalformedJSONError, NoTopError)):
            read_netlist_json(doc(m=m, top=t))

    def test_annotate_and_keep_attributes(self):
        m = and_dff_module()
        m["netnames"]["w"]["attributes"].update(annotate="1", keep=1)
        g = read_netlist_json(doc(top=m))
        w = g.name_index["w"]
        assert g.nets[w].is_annotated and g.kept == {w}


class TestAnnotations:
    def test_bus_fallback(self):
        text = ("port in clk\n"
                "cell r DFF seq in=clk out=dcache.tlb_pmp_io_addr[31]\n"
                "port out dcache.tlb_pmp_io_addr[31]\n")
        g = read_fixture(text, Side.SYNTH)
        nid = bind_annotation(g, "dcache", "tlb_pmp_io_addr_31")
        assert g.nets[nid].raw_name == "dcache.tlb_pmp_io_addr[31]"

    def test_read(self, f1):
        ann = read_annotations(json.dumps([{"module": "", "net": "w1"}, {"module": "x", "net": "nope"}]),
                               f1)
        assert list(ann) == [f1.name_index["w1"]]
        assert ann.unbound == [("x", "nope")]
        assert f1.nets[f1.name_index["w1"]].is_annotated

    @pytest.mark.parametrize("text", ["{}", "[1]", '[{"module": "a"}]', "nope"])
    def test_malformed(self, f1, text):
        with pytest.raises(MalformedJSONError):
            read_annotations(text, f1)


class TestFixture:
    def test_round_trip_f1(self):
        text = generators.F1_TEXT
        assert write_fixture(read_fixture(text)) == text

    @pytest.mark.parametrize("n,seed", [(50, 0), (300, 3), (800, 7)])
    def test_round_trip_random(self, n, seed):
        g = generators.random_design(n, seed=seed, cyclic=True, const_frac=0.01)
        text = write_fixture(g)
        assert write_fixture(read_fixture(text)) == text

    def test_escapes(self):
        text = "port in a%20b\ncell c%2Cd AND comb in=a%20b out=x%3Dy\nport out x%3Dy\nnet x%3Dy annot\n"
        g = read_fixture(text)
        assert "a b" in g.name_index and "x=y" in g.name_index
        assert g.nets[g.name_index["x=y"]].is_annotated
        assert write_fixture(read_fixture(write_fixture(g))) == write_fixture(g)

    @pytest.mark.parametrize("text,lineno", [
        ("port in a\nport sideways b\n", 2),
        ("port in a\n\ncell g AND weird in=a out=b\n", 3),
        ("cell g AND comb loc=nope in=a out=b\n", 1),
        ("port in a\nwire x\n", 2),
        ("net\n", 1),
    ])
    def test_parse_errors(self, text, lineno):
        with pytest.raises(FixtureParseError) as e:
            read_fixture(text)
        assert e.value.lineno == lineno

    def test_load_design_picks_reader(self, tmp_path):
        (tmp_path / "d.json").write_text(doc(top=and_dff_module()))
        (tmp_path / "d.gnl").write_text(generators.F1_TEXT)
        assert load_design(tmp_path / "d.json").m == 5
        assert load_design(tmp_path / "d.gnl").m == 6
