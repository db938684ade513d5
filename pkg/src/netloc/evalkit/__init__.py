"""NL2NL evaluation harness and synthetic design generators."""

from .generators import f1, p2, pipeline, pipeline_for_nets, random_design
from .nl2nl import (CSV_COLUMNS, DEFAULT_LEVELS, RNG_ID, NoiseSpec, NoisyDesign, SweepRow,
                    SweepTable, eligible_nets, inject_noise, read_sweep_csv, run_nl2nl,
                    score_nl2nl, stage_stats, sweep)

__all__ = [
    "CSV_COLUMNS", "DEFAULT_LEVELS", "RNG_ID", "NoiseSpec", "NoisyDesign", "SweepRow",
    "SweepTable", "eligible_nets", "f1", "inject_noise", "p2", "pipeline", "pipeline_for_nets",
    "random_design", "read_sweep_csv", "run_nl2nl", "score_nl2nl", "stage_stats", "sweep",
]
