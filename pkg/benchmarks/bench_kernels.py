#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy twins.

Builds a random CSR graph, runs every kernel on both backends, checks the
results are bit-identical, and prints timings.  With AWAREFLOW_NO_NUMBA=1
(or without numba installed) only the numpy path is timed.

    python3 benchmarks/bench_kernels.py --nodes 200000 --degree 12
"""

import argparse
import time

import numpy as np

from awareflow import kernels


def make_csr(rng, n_nodes, degree):
    """Random undirected multigraph-free CSR with both edge directions."""
    n_edges = n_nodes * degree // 2
    src = rng.integers(0, n_nodes, size=n_edges, dtype=np.int64)
    dst = rng.integers(0, n_nodes, size=n_edges, dtype=np.int64)
    keep = src != dst
    src, dst = src[keep], dst[keep]
    all_src = np.concatenate([src, dst])
    all_dst = np.concatenate([dst, src])
    order = np.lexsort((all_dst, all_src))
    all_src, all_dst = all_src[order], all_dst[order]
    indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.cumsum(np.bincount(all_src, minlength=n_nodes), out=indptr[1:])
    return indptr, all_dst.astype(np.int32)


def timeit(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=200_000)
    ap.add_argument("--degree", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(7)
    indptr, indices = make_csr(rng, args.nodes, args.degree)
    ids = rng.integers(0, 1 << 62, size=args.nodes, dtype=np.uint64)
    marked = rng.random(args.nodes) < 0.3
    hit = rng.random(args.nodes) < 0.5
    nodes = np.flatnonzero(rng.random(args.nodes) < 0.05).astype(np.int64)

    print(f"backend: {kernels.BACKEND}  nodes: {args.nodes}  "
          f"directed edges: {len(indices)}")
    kernels.warmup()

    def inc_with(fn):
        counts = np.zeros(args.nodes, dtype=np.int64)
        fn(indptr, indices, nodes, counts)
        return counts

    cases = [
        ("counter_uniforms",
         lambda: kernels.counter_uniforms(42, 3, ids, 9),
         lambda: kernels._np_counter_uniforms(42, 3, ids, 9)),
        ("count_marked_neighbors",
         lambda: kernels.count_marked_neighbors(indptr, indices, marked),
         lambda: kernels._np_count_marked_neighbors(indptr, indices, marked)),
        ("count_marked_neighbors_two",
         lambda: kernels.count_marked_neighbors_two(indptr, indices, marked, hit),
         lambda: kernels._np_count_marked_neighbors_two(indptr, indices, marked, hit)),
        ("increment_neighbor_counts",
         lambda: inc_with(kernels.increment_neighbor_counts),
         lambda: inc_with(kernels._np_increment_neighbor_counts)),
    ]

    width = max(len(name) for name, _, _ in cases)
    for name, active, fallback in cases:
        t_active, out_a = timeit(active, args.repeat)
        t_numpy, out_n = timeit(fallback, args.repeat)
        if isinstance(out_a, tuple):
            same = all(np.array_equal(a, b) for a, b in zip(out_a, out_n))
        else:
            same = np.array_equal(out_a, out_n)
        status = "identical" if same else "MISMATCH"
        if not same:
            raise SystemExit(f"{name}: backend outputs differ")
        speedup = t_numpy / t_active if t_active > 0 else float("inf")
        print(f"{name:<{width}}  {kernels.BACKEND}: {t_active*1e3:8.2f} ms"
              f"  numpy: {t_numpy*1e3:8.2f} ms"
              f"  speedup: {speedup:5.2f}x  [{status}]")


if __name__ == "__main__":
    main()
