"""Net-name canonicalization across tool nomenclatures, and anchor-point matching.

Anchors are nets whose canonical names exist on both sides with the same
driver class. Top-level port nets always anchor when their names match.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .graph import CAT_PORT, DesignGraph

_BUS_RE = re.compile(r"_(\d+)_$")
_DOTS_RE = re.compile(r"\.{2,}")


class SepPolicy(enum.Enum):
    DOT = "dot"
    UNDERSCORE = "underscore"
    INFER = "infer"


class HierarchyVocab:
    """Known module paths (and optionally known net names) for separator inference."""

    def __init__(self, paths: Iterable[str], names: Iterable[str] | None = None):
        self.paths = frozenset(paths)
        self.names = frozenset(names) if names is not None else None
        flat: dict[str, list[str]] = {}
        for p in sorted(self.paths):
            flat.setdefault(p.replace(".", "_"), []).append(p)
        self._flat = flat

    def _prefix_candidates(self, prefix: str) -> list[str]:
        # dots already present in the prefix are definite separators
        cands = self._flat.get(prefix.replace(".", "_"), ())
        dots = [i for i, c in enumerate(prefix) if c == "."]
        return [p for p in cands if all(p[i] == "." for i in dots)]

    def rewrite(self, name: str, policy: SepPolicy) -> str:
        if "." in name:
            if policy is SepPolicy.UNDERSCORE:
                return name
            prefix, _, local = name.rpartition(".")
            if not prefix or prefix in self.paths:
                return name
            parses = [f"{p}.{local}" for p in self._prefix_candidates(prefix)]
        else:
            parses = []
            for i, c in enumerate(name):
                if c == "_" and 0 < i < len(name) - 1:
                    parses.extend(f"{p}.{name[i + 1:]}" for p in self._flat.get(name[:i], ()))
        if len(parses) > 1 and self.names is not None:
            parses = [p for p in parses if p in self.names]
        return parses[0] if len(parses) == 1 else name


def canonicalize_name(raw: str, policy: SepPolicy | str = SepPolicy.DOT,
                      vocab: HierarchyVocab | Iterable[str] | None = None) -> str:
    """Canonical form of a net name.

    Steps: strip one trailing ``_BAR`` (recorded as a trailing ``~``), rewrite a
    trailing ``_<digits>_`` to ``[<digits>]``, rewrite hierarchy separators to
    ``.`` per ``policy``, collapse repeated dots. Idempotent.
    """
    if not raw:
        raise ValueError("net name must be non-empty")
    policy = SepPolicy(policy)
    name = raw
    inverted = False
    if name.endswith("~") and len(name) > 1:
        inverted = True
        name = name[:-1]
    if not inverted and name.endswith("_BAR") and len(name) > 4:
        inverted = True
        name = name[:-4]
    name = _BUS_RE.sub(r"[\1]", name)
    if policy is not SepPolicy.DOT and vocab is not None:
        if not isinstance(vocab, HierarchyVocab):
            vocab = HierarchyVocab(vocab)
        name = vocab.rewrite(name, policy)
    if ".." in name:
        name = _DOTS_RE.sub(".", name)
    return name + "~" if inverted else name


def make_canonicalizer(policy: SepPolicy | str = SepPolicy.DOT,
                       vocab: HierarchyVocab | None = None) -> Callable[[str], str]:
    policy = SepPolicy(policy)
    return lambda raw: canonicalize_name(raw, policy, vocab)


def normalize_graph(g: DesignGraph, policy: SepPolicy | str = SepPolicy.DOT,
                    vocab: HierarchyVocab | None = None) -> DesignGraph:
    """Recompute canonical names of ``g`` in place (before alignment) and reindex."""
    canon = make_canonicalizer(policy, vocab)
    for net in g.nets:
        net.canon_name = canon(net.raw_name)
        net.collided = False
    g._index_names()
    return g


@dataclass
class AnchorMap:
    ref_to_synth: dict[int, int] = field(default_factory=dict)
    synth_to_ref: dict[int, int] = field(default_factory=dict)
    class_conflicts: int = 0
    visits: int = 0
    synth_m: int = 0

    @property
    def count(self) -> int:
        return len(self.synth_to_ref)

    @property
    def anchor_fraction(self) -> float:
        return self.count / self.synth_m if self.synth_m else 0.0

    def add(self, r: int, s: int):
        self.ref_to_synth[r] = s
        self.synth_to_ref[s] = r


def find_anchor_points(g_ref: DesignGraph, g_synth: DesignGraph,
                       exclude: Iterable[int] = ()) -> AnchorMap:
    """Pair synth nets with identically named, identically driven ref nets.

    ``exclude`` holds synth net ids that must not anchor (e.g. nets an
    evaluation harness deliberately renamed). One pass over each graph.
    """
    amap = AnchorMap(synth_m=g_synth.m)
    rnodes, snodes = g_ref.nodes, g_synth.nodes
    rconst, sconst = g_ref.const_mask, g_synth.const_mask
    rcat, scat = g_ref.net_category, g_synth.net_category

    eligible: dict[str, int] = {}
    for net in g_ref.nets:
        amap.visits += 1
        if not net.collided and not rconst[net.id]:
            eligible[net.canon_name] = net.id

    excluded = set(exclude)
    for net in g_synth.nets:
        amap.visits += 1
        if net.collided or sconst[net.id] or net.id in excluded:
            continue
        r = eligible.get(net.canon_name)
        if r is None:
            continue
        if rcat[r] == CAT_PORT and scat[net.id] == CAT_PORT:
            amap.add(r, net.id)
        elif rnodes[g_ref.nets[r].driver].cls is snodes[net.driver].cls:
            amap.add(r, net.id)
        else:
            amap.class_conflicts += 1
    return amap
