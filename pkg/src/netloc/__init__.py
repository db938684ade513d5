"""Align nets of an optimized gate-level netlist back to a reference netlist and its source lines."""

__version__ = "0.1.0"

from .align import (SENTINEL_MAX, AlignConfig, AlignmentResult, Confidence, MatchRecord, Stage,
                    TiePolicy, Weight, calc_wt, run_alignment)
from .errors import NetlistError
from .graph import CellClass, DesignGraph, Side, SourceLoc, build_graph, classify_cell
from .ingest import load_design, read_annotations, read_fixture, read_netlist_json, write_fixture
from .normalize import SepPolicy, canonicalize_name, find_anchor_points
from .resolve import Direction, compute_all_rps, compute_rps, reduce_to_sequential

__all__ = [
    "SENTINEL_MAX", "AlignConfig", "AlignmentResult", "CellClass", "Confidence", "DesignGraph",
    "Direction", "MatchRecord", "NetlistError", "SepPolicy", "Side", "SourceLoc", "Stage",
    "TiePolicy", "Weight", "build_graph", "calc_wt", "canonicalize_name", "classify_cell",
    "compute_all_rps", "compute_rps", "find_anchor_points", "load_design", "read_annotations",
    "read_fixture", "read_netlist_json", "reduce_to_sequential", "run_alignment", "write_fixture",
]
