"""Compare the compiled and pure-Python traversal kernels.

Times ``frontier_sets`` (all nearest-RP sets in one sweep) and a batch of
``bfs_frontier`` calls on generated designs, plus one end-to-end alignment
per backend. Prints a TSV table; ``--csv`` writes the same rows to a file.

    python benchmarks/bench_kernels.py --nets 10000 100000 --repeat 3
"""

import argparse
import csv
import sys
import time

import numpy as np

from netloc import _kernels
from netloc.align import AlignConfig, run_alignment
from netloc.evalkit import NoiseSpec, generators, inject_noise
from netloc.graph import CAT_PORT
from netloc.resolve import Direction, frontier_map, rp_mask


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_design(g, backend, repeat, n_bfs):
    kern = _kernels.get_backend(backend)
    # only port nets resolved: searches cross the whole design, the kernels' worst case
    stop = rp_mask(g, [i for i in range(g.m) if g.net_category[i] == CAT_PORT])
    ptr, idx = g.pred
    args = [kern.prepare(a) for a in (ptr, idx, stop, g.const_mask & (stop == 0))]
    free = np.flatnonzero(stop == 0)
    starts = [int(free[i]) for i in np.linspace(0, free.size - 1, n_bfs).astype(int)]

    def bfs_batch():
        for s in starts:
            kern.bfs_frontier(*args, s, 10 ** 9)

    noisy = inject_noise(g, NoiseSpec(40, seed=0))
    cfg = AlignConfig(tie_policy="lex")
    return {
        "frontier_sets": best_of(lambda: frontier_map(g, stop, Direction.BACKWARD, backend=backend), repeat),
        "bfs_batch": best_of(bfs_batch, repeat),
        "align_40pct": best_of(lambda: run_alignment(g, noisy.graph, noisy.renamed, cfg,
                                                     no_anchor=noisy.renamed, backend=backend), repeat),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nets", type=int, nargs="+", default=[10_000, 50_000])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--bfs", type=int, default=500, help="number of single-net searches per batch")
    ap.add_argument("--csv", help="also write rows to this CSV file")
    args = ap.parse_args(argv)

    try:
        _kernels.get_backend("cython")
        backends = ["python", "cython"]
    except ImportError:
        print("compiled kernels not built; timing the Python fallback only", file=sys.stderr)
        backends = ["python"]

    rows = []
    for n in args.nets:
        g = generators.pipeline_for_nets(n)
        res = {b: bench_design(g, b, args.repeat, args.bfs) for b in backends}
        for op in res[backends[0]]:
            row = {"nets": g.m, "op": op}
            for b in backends:
                row[f"{b}_s"] = round(res[b][op], 4)
            if len(backends) == 2:
                row["speedup"] = round(res["python"][op] / max(res["cython"][op], 1e-9), 2)
            rows.append(row)

    cols = list(rows[0])
    print("\t".join(cols))
    for r in rows:
        print("\t".join(str(r[c]) for c in cols))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols)
            w.writeheader()
            w.writerows(rows)


if __name__ == "__main__":
    main()
