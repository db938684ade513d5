import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netloc.align import (SENTINEL_MAX, ZERO, AlignConfig, Confidence, MatchRecord, Stage, TiePolicy,
                          Weight, build_any_srp_index, build_indexes, calc_wt, full_half_match,
                          install_matches, partial_match, run_alignment, surrounding_match)
from netloc.errors import NoAnchorsError
from netloc.evalkit import generators
from netloc.graph import CAT_COMB, CellClass, Side, SourceLoc
from netloc.ingest import read_fixture
from netloc.normalize import normalize_graph
from netloc.report import format_json
from netloc.resolve import Direction, RPMaps, compute_all_rps, frontier_map, rp_mask

import oracles
from conftest import renamed_copy

fs = frozenset


def maps(srp, erp):
    return RPMaps(dict(srp), dict(erp))


class TestCalcWt:
    def test_examples(self):
        assert calc_wt(fs("abc"), fs("abx")) == Weight(0, Fraction(10))
        assert calc_wt(fs("a"), fs("ab")) == SENTINEL_MAX
        assert calc_wt(fs("ab"), fs("c")) == ZERO
        assert calc_wt(fs(), fs("c")) == ZERO

    def test_synth_side_mismatches(self):
        # extra ref members never count against the match
        assert calc_wt(fs("ab"), fs("abcdef")) == SENTINEL_MAX
        assert calc_wt(fs("abcdef"), fs("ab")) == Weight(0, Fraction(5 * 2, 4))

    def test_coeff(self):
        assert calc_wt(fs("abc"), fs("abx"), AlignConfig(wt_match_coeff=3)) == Weight(0, Fraction(6))

    @settings(max_examples=300)
    @given(st.frozensets(st.integers(0, 12), max_size=10), st.frozensets(st.integers(0, 12), max_size=10))
    def test_against_oracle(self, s, r):
        w = calc_wt(s, r)
        assert (w.sentinels, w.value) == oracles.calc_wt_oracle(s, r)

    @settings(max_examples=200)
    @given(st.integers(2, 20), st.data())
    def test_monotone(self, size, data):
        m1 = data.draw(st.integers(1, size - 1))
        # more matches with the same synth-set size: strictly heavier
        a = calc_wt(fs(range(size)), fs(range(m1)))
        b = calc_wt(fs(range(size)), fs(range(m1 + 1)))
        assert b > a
        # same matches, one more mismatch: strictly lighter
        c = calc_wt(fs(range(size + 1)), fs(range(m1)))
        assert c < a


class TestWeight:
    def test_order(self):
        assert SENTINEL_MAX > Weight(0, Fraction(10**9))
        assert SENTINEL_MAX + SENTINEL_MAX > SENTINEL_MAX + Weight(0, Fraction(10**9))
        assert SENTINEL_MAX + Weight(0, Fraction(1)) > SENTINEL_MAX
        assert ZERO < Weight(0, Fraction(1, 3))

    def test_str(self):
        assert str(Weight(0, Fraction(5, 2))) == "5/2"
        assert str(SENTINEL_MAX) == "MAX"
        assert str(Weight(2, Fraction(3))) == "2*MAX+3"

    def test_confidence_tiers(self):
        want = {Stage.ANCHOR: Confidence.HIGH, Stage.FULL: Confidence.HIGH,
                Stage.SURROUNDING: Confidence.HIGH, Stage.HALF_SRP: Confidence.MEDIUM,
                Stage.HALF_ERP: Confidence.MEDIUM, Stage.PARTIAL: Confidence.LOW}
        for stage, conf in want.items():
            assert MatchRecord(0, [1], stage).confidence is conf

    def test_record_needs_ref(self):
        with pytest.raises(ValueError):
            MatchRecord(0, [], Stage.FULL)

    @pytest.mark.parametrize("kw", [{"wt_match_coeff": 0}, {"collapse_depth": 0},
                                    {"max_fixpoint_iters": 0}, {"tie_policy": "nope"}])
    def test_config_validation(self, kw):
        with pytest.raises(ValueError):
            AlignConfig(**kw)


class TestFullHalf:
    cfg = AlignConfig()

    def run(self, synth, ref):
        rs = maps({s: v[0] for s, v in synth.items()}, {s: v[1] for s, v in synth.items()})
        rr = maps({r: v[0] for r, v in ref.items()}, {r: v[1] for r, v in ref.items()})
        by_s, by_e = build_indexes(sorted(ref), rr.srp, rr.erp)
        return full_half_match(sorted(synth), rr, rs, by_s, by_e, self.cfg)

    def test_full(self):
        recs = self.run({0: (fs({"a1", "b1"}), fs({"q1"}))},
                        {10: (fs({"a1", "b1"}), fs({"q1"})), 11: (fs({"a1"}), fs({"q1"}))})
        assert [(r.synth_net, r.ref_nets, r.stage) for r in recs] == [(0, [10], Stage.FULL)]
        assert recs[0].weight == SENTINEL_MAX + SENTINEL_MAX

    def test_half_tie(self):
        recs = self.run({0: (fs({"a1", "b1"}), fs({"q1", "q3"}))},
                        {10: (fs({"a1", "b1"}), fs({"q1"})), 11: (fs({"a1", "b1"}), fs({"q1", "q2"}))})
        assert len(recs) == 1
        rec = recs[0]
        assert rec.stage is Stage.HALF_ERP and rec.ref_nets == [10, 11] and rec.n_ties == 2
        assert rec.weight == Weight(1, Fraction(5))

    def test_half_srp(self):
        recs = self.run({0: (fs({"a", "b", "c"}), fs({"q"}))},
                        {10: (fs({"a", "b", "x"}), fs({"q"})), 11: (fs({"a", "y", "z"}), fs({"q"}))})
        assert recs[0].stage is Stage.HALF_SRP and recs[0].ref_nets == [10]

    def test_half_needs_overlap(self):
        recs = self.run({0: (fs({"a"}), fs({"q"}))}, {10: (fs({"a"}), fs({"z"}))})
        assert recs == []

    def test_empty_signature_skipped(self):
        assert self.run({0: (fs(), fs())}, {10: (fs(), fs())}) == []

    def test_full_ties_kept(self):
        sig = (fs("ab"), fs("q"))
        recs = self.run({0: sig}, {10: sig, 11: sig})
        assert recs[0].stage is Stage.FULL and recs[0].ref_nets == [10, 11]


class TestPartial:
    def run(self, synth, ref):
        rs = maps({s: v[0] for s, v in synth.items()}, {s: v[1] for s, v in synth.items()})
        rr = maps({r: v[0] for r, v in ref.items()}, {r: v[1] for r, v in ref.items()})
        return partial_match(sorted(synth), rr, rs, build_any_srp_index(sorted(ref), rr.srp), AlignConfig())

    def test_subset_wins(self):
        recs = self.run({0: (fs("ab"), fs("q"))}, {10: (fs("abc"), fs("q")), 11: (fs("ax"), fs("q"))})
        assert recs[0].ref_nets == [10] and recs[0].weight == Weight(2, Fraction(0))

    def test_sentinel_count_ordering(self):
        recs = self.run({0: (fs("a"), fs("q"))}, {10: (fs("a"), fs("z")), 11: (fs("ab"), fs("q"))})
        assert recs[0].ref_nets == [11] and recs[0].stage is Stage.PARTIAL

    def test_no_shared_srp(self):
        assert self.run({0: (fs("a"), fs("q"))}, {10: (fs("b"), fs("q"))}) == []

    @settings(max_examples=100)
    @given(st.dictionaries(st.integers(10, 30), st.tuples(st.frozensets(st.sampled_from("abcde"), max_size=4),
                                                          st.frozensets(st.sampled_from("pqr"), max_size=3)),
                           min_size=1, max_size=8),
           st.frozensets(st.sampled_from("abcde"), min_size=1, max_size=4),
           st.frozensets(st.sampled_from("pqr"), max_size=3))
    def test_brute_force(self, ref, S, E):
        recs = self.run({0: (S, E)}, ref)
        scored = {r: calc_wt(S, v[0]) + calc_wt(E, v[1]) for r, v in ref.items() if S & v[0]}
        if not scored:
            assert recs == []
            return
        best = max(scored.values())
        assert recs[0].ref_nets == sorted(r for r, w in scored.items() if w == best)
        assert recs[0].weight == best


# --- surrounding ------------------------------------------------------------

UNANIMOUS = """\
port in a
port in b
port out o
cell u1 AND comb loc=s.v:7 in=a,b out=x
cell u2 OR comb loc=s.v:7 in=a,b out=y
cell op XOR comb in=x,y out=z
cell u3 NOT comb loc={loc3} in=z out=o
"""

COLLAPSE = """\
port in a
port in c
port out o
cell op AND comb in=a,c out=y
cell b BUF comb in=y out=z
cell u4 NOT comb loc=s.v:9 in=z out=o
"""


def surround(text, depth=2):
    g = read_fixture(text, Side.SYNTH)
    rps = [n.id for n in g.nets if g.net_category[n.id] != CAT_COMB]
    stop = rp_mask(g, rps)
    rp = RPMaps(frontier_map(g, stop, Direction.BACKWARD), frontier_map(g, stop, Direction.FORWARD))
    known = {n.id: n.locs[0] for n in g.nodes if n.locs}
    got = surrounding_match(g, known, rp, AlignConfig(collapse_depth=depth))
    return g, {g.nodes[n].name: loc for n, loc in got}


class TestSurrounding:
    def test_unanimous_neighbors(self):
        _, got = surround(UNANIMOUS.format(loc3="s.v:7"))
        assert got == {"op": SourceLoc("s.v", 7)}

    def test_conflicting_neighbors(self):
        _, got = surround(UNANIMOUS.format(loc3="s.v:8"))
        assert got == {}

    def test_collapse(self):
        _, got = surround(COLLAPSE)
        assert got == {"op": SourceLoc("s.v", 9), "b": SourceLoc("s.v", 9)}

    def test_collapse_blocked_by_signature(self):
        # b reads an extra input, so op and b differ; op has no located neighbour of its own
        # until b is located, after which op is assigned through b
        text = COLLAPSE.replace("port in c\n", "port in c\nport in d\n").replace(
            "cell b BUF comb in=y out=z", "cell b AND comb in=y,d out=z")
        _, got = surround(text)
        assert got == {"b": SourceLoc("s.v", 9), "op": SourceLoc("s.v", 9)}

    def test_collapse_depth_limits_merges(self):
        text = """\
port in a
port out o
cell n1 BUF comb in=a out=x1
cell n2 BUF comb in=x1 out=x2
cell n3 BUF comb in=x2 out=x3
cell n4 BUF comb in=x3 out=x4
cell u NOT comb loc=s.v:2 in=x4 out=o
"""
        _, got = surround(text, depth=1)
        # neighbours are resolved one hop at a time, so every node still ends up at s.v:2
        assert set(got) == {"n1", "n2", "n3", "n4"}

    @settings(max_examples=25, deadline=None)
    @given(st.integers(20, 300), st.integers(0, 10_000), st.floats(0.1, 0.9))
    def test_never_overrides_known(self, n, seed, frac):
        g = generators.random_design(n, seed=seed)
        rng = random.Random(seed)
        known = {node.id: node.locs[0] for node in g.nodes if node.locs and rng.random() < frac}
        stop = rp_mask(g, [x.id for x in g.nets if g.net_category[x.id] != CAT_COMB])
        rp = RPMaps(frontier_map(g, stop, Direction.BACKWARD), frontier_map(g, stop, Direction.FORWARD))
        got = surrounding_match(g, known, rp, AlignConfig())
        assert not {x for x, _ in got} & set(known)
        assert len({x for x, _ in got}) == len(got)


class TestInstall:
    CHAIN = ("port in a\ncell g1 NOT comb in=a out=x\ncell g2 NOT comb in=x out=w\n"
             "cell g3 NOT comb in=w out=y\nport out y\n")

    def test_install_moves_frontier(self):
        g = read_fixture(self.CHAIN)
        x, w = g.name_index["x"], g.name_index["w"]
        rps = {g.name_index["a"], g.name_index["y"]}
        m = compute_all_rps(g, rps)
        assert m.erp[x] == {g.name_index["y"]}
        s2r, r2s, pending = {}, {}, {x, w}
        assert install_matches([MatchRecord(w, [w], Stage.FULL)], s2r, r2s, pending, m)
        assert m.epoch == 1 and pending == {x}
        assert compute_all_rps(g, rps | set(s2r)).erp[x] == {w}

    def test_empty_no_bump(self):
        m = RPMaps()
        assert not install_matches([], {}, {}, maps=m)
        assert m.epoch == 0

    def test_idempotent(self):
        s2r, r2s, m = {}, {}, RPMaps()
        rec = MatchRecord(1, [2], Stage.FULL)
        install_matches([rec], s2r, r2s, maps=m)
        assert not install_matches([rec, MatchRecord(1, [3], Stage.HALF_SRP)], s2r, r2s, maps=m)
        assert s2r == {1: 2} and m.epoch == 1

    def test_ties_not_installed(self):
        s2r = {}
        assert not install_matches([MatchRecord(1, [2, 3], Stage.FULL)], s2r, {})


class TestRunAlignment:
    def test_f1_full(self, f1):
        synth = renamed_copy(generators.f1, ["w1"])
        w1s = synth.name_index["w1_changed"]
        res = run_alignment(f1, synth, [w1s])
        rec = res.record_for(w1s)
        assert rec.stage is Stage.FULL and rec.ref_nets == [f1.name_index["w1"]]
        assert rec.locs == [SourceLoc("top.v", 3)] and rec.confidence is Confidence.HIGH
        assert res.unresolved == set()

    def test_f1_identical(self, f1):
        synth = generators.f1(Side.SYNTH)
        res = run_alignment(f1, synth, [synth.name_index["w1"]])
        assert res.records[0].stage is Stage.ANCHOR

    def test_p2_not_crossed(self, p2):
        synth = renamed_copy(generators.p2, ["w1", "w2"])
        ann = [synth.name_index["w1_changed"], synth.name_index["w2_changed"]]
        res = run_alignment(p2, synth, ann)
        got = {synth.nets[r.synth_net].raw_name: (p2.nets[r.ref_nets[0]].raw_name, r.stage)
               for r in res.records}
        assert got == {"w1_changed": ("w1", Stage.FULL), "w2_changed": ("w2", Stage.FULL)}

    def test_no_anchors(self, f1):
        synth = renamed_copy(generators.f1, [n.raw_name for n in f1.nets])
        with pytest.raises(NoAnchorsError) as e:
            run_alignment(f1, synth, [0])
        assert e.value.code == "NO_ANCHORS"

    def test_no_anchor_list(self, f1):
        synth = generators.f1(Side.SYNTH)
        w1 = synth.name_index["w1"]
        res = run_alignment(f1, synth, [w1], no_anchor=[w1])
        assert res.record_for(w1).stage is Stage.FULL

    def test_stats_and_timing(self, f1):
        synth = renamed_copy(generators.f1, ["w1"])
        res = run_alignment(f1, synth, [synth.name_index["w1_changed"]])
        assert res.stats["anchors"] == 5 and res.stats["m_d"] == 1
        assert res.stats["a"] == 6
        assert {"anchor", "comb_full_half"} <= set(res.stage_timing)
        assert res.stage_counts["anchor"] == [6, 5]

    @pytest.mark.parametrize("n,seed,cyclic", [(200, 0, False), (500, 1, True), (1500, 2, True)])
    def test_self_alignment(self, n, seed, cyclic):
        g = generators.random_design(n, seed=seed, cyclic=cyclic, const_frac=0.01)
        s = generators.random_design(n, seed=seed, cyclic=cyclic, const_frac=0.01)
        s.side = Side.SYNTH
        res = run_alignment(g, s, cfg=AlignConfig(full_report=True))
        assert all(r.stage is Stage.ANCHOR and r.ref_nets == [r.synth_net] for r in res.records)
        assert len(res.records) == g.m - int(g.const_mask.sum())

    @settings(max_examples=15, deadline=None)
    @given(st.integers(30, 400), st.integers(0, 10_000), st.floats(0.1, 1.0), st.booleans())
    def test_each_target_reported_once(self, n, seed, frac, full):
        g = generators.random_design(n, seed=seed, cyclic=seed % 3 == 0)
        s = generators.random_design(n, seed=seed, cyclic=seed % 3 == 0)
        rng = random.Random(seed)
        renamed = [x.id for x in s.nets if rng.random() < frac and not x.raw_name.startswith("in")]
        for i in renamed:
            s.nets[i].raw_name += "_r"
        normalize_graph(s)
        ann = renamed[: max(1, len(renamed) // 2)] if renamed else [0]
        cfg = AlignConfig(full_report=full)
        res = run_alignment(g, s, ann, cfg)
        targets = [i for i in range(s.m) if not s.const_mask[i]] if full else sorted(set(ann))
        seen = [r.synth_net for r in res.records] + sorted(res.unresolved)
        assert sorted(seen) == sorted(targets)
        # installed RPs are always the truth on an isomorphic renamed copy
        assert all(r == sn for sn, r in res.aligned.items())
        for rec in res.records:
            if rec.stage in (Stage.ANCHOR, Stage.FULL, Stage.SURROUNDING) and len(rec.ref_nets) == 1:
                assert rec.ref_nets == [rec.synth_net]

    def test_deterministic(self):
        g = generators.pipeline(slices=2, width=8, stages=3, twin_frac=0.2, seed=3)
        outs = []
        for _ in range(2):
            s = generators.pipeline(slices=2, width=8, stages=3, twin_frac=0.2, seed=3)
            s.side = Side.SYNTH
            for net in s.nets[::3]:
                net.raw_name += "_x"
            normalize_graph(s)
            res = run_alignment(g, s, cfg=AlignConfig(tie_policy=TiePolicy.LEX_FIRST, full_report=True))
            outs.append(format_json(res, g, s))
        assert outs[0] == outs[1]

    def test_backends_agree(self):
        g = generators.random_design(800, seed=5, cyclic=True)
        outs = []
        for backend in ("python", "cython"):
            s = generators.random_design(800, seed=5, cyclic=True)
            for net in s.nets[1::2]:
                net.raw_name += "_x"
            normalize_graph(s)
            res = run_alignment(g, s, cfg=AlignConfig(full_report=True), backend=backend)
            outs.append(format_json(res, g, s))
        assert outs[0] == outs[1]


def unique_signature_pairs(g_ref, g_synth, rps):
    """Brute-force bijection by comparing nearest-RP signatures of every net pair."""
    sig_r = oracles.signatures(g_ref, rps, [i for i in range(g_ref.m) if i not in rps
                                            and not g_ref.const_mask[i]])
    sig_s = oracles.signatures(g_synth, rps, [i for i in range(g_synth.m) if i not in rps
                                              and not g_synth.const_mask[i]])
    pairs = {}
    for s, ss in sig_s.items():
        if not ss[0] and not ss[1]:
            continue
        hits = [r for r, rr in sig_r.items() if rr == ss]
        if len(hits) == 1:
            pairs[s] = hits[0]
    unique = (len(set(sig_r.values())) == len(sig_r)) and (len(set(sig_s.values())) == len(sig_s))
    return pairs, unique


@settings(max_examples=10, deadline=None)
@given(st.integers(30, 300), st.integers(0, 10_000))
def test_full_stage_matches_signature_oracle(n, seed):
    g = generators.random_design(n, seed=seed, n_inputs=max(4, n // 6))
    s = generators.random_design(n, seed=seed, n_inputs=max(4, n // 6))
    # only port nets keep their names, so they are exactly the anchors
    anchors = {x.id for x in g.nets if g.net_category[x.id] != CAT_COMB and not g.const_mask[x.id]
               and g.nodes[x.driver].cls is not CellClass.SEQUENTIAL
               and not any(g.nodes[k].cls is CellClass.SEQUENTIAL for k in x.sinks)}
    for x in s.nets:
        if x.id not in anchors:
            x.raw_name += "_r"
    normalize_graph(s)
    pairs, _ = unique_signature_pairs(g, s, anchors)
    res = run_alignment(g, s, cfg=AlignConfig(full_report=True))
    by = res.by_synth()
    for sn, r in pairs.items():
        assert by[sn].stage is Stage.FULL and by[sn].ref_nets == [r]
    for rec in res.records:
        if rec.stage is Stage.FULL and len(rec.ref_nets) == 1:
            assert rec.ref_nets == [rec.synth_net]
