"""Compiled vs pure-Python bitmask kernels on generated groundings.

    python benchmarks/bench_kernels.py [--instances N] [--repeat R]
"""
import argparse
import statistics
import time

from ucqa import kernels
from ucqa.grounding import Grounding
from ucqa.oracle import gen_random


def _groundings(n):
    out = []
    for seed in range(n):
        for profile in ("denial", "acyclic", "jd", "cyclic"):
            _, i, f = gen_random(seed, profile, max_hull=18, max_facts=14, dom=3)
            g = Grounding(i, f)
            if g.nbits >= 10:
                out.append(g)
    return out


def _run(gs, backend):
    for g in gs:
        rules = kernels.pack(g.lhs_masks, g.rhs_masks, g.nbits, backend=backend)
        tgd = kernels.pack(g.tgd_lhs, g.tgd_rhs, g.nbits, backend=backend)
        masks = kernels.consistent_masks(g.nbits, rules)
        kernels.minimal_masks(g.imask, masks, backend=backend)
        mod = kernels.c if backend == "cython" else kernels.py
        for m in range(0, 1 << g.nbits, 7):
            mod.check_repair_mask(g.imask, m, tgd, rules)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=40)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    gs = _groundings(args.instances)
    print(f"{len(gs)} groundings, hull sizes {min(g.nbits for g in gs)}..{max(g.nbits for g in gs)}")
    backends = ["python"] + (["cython"] if kernels.c is not None else [])
    times = {}
    for b in backends:
        runs = []
        for _ in range(args.repeat):
            t = time.perf_counter()
            _run(gs, b)
            runs.append(time.perf_counter() - t)
        times[b] = statistics.median(runs)
        print(f"{b:7s} {times[b]:8.3f}s (median of {args.repeat})")
    if len(times) == 2:
        print(f"speedup {times['python'] / times['cython']:.1f}x")
    else:
        print("compiled kernels not built; only the fallback was timed")


if __name__ == "__main__":
    main()
