"""Compiled core against the pure-Python fallback on the hot kernels.

Run with ``python benchmarks/bench_core.py [--size 32] [--repeat 3]``.  Both
backends consume identical uniforms, so the resulting states must agree.
"""

from __future__ import annotations

import argparse
import copy
import math
import time

import numpy as np

from isofk import _pycore
from isofk._backend import COMPILED, core
from isofk.lattice import AngleSequence, build_lattice
from isofk.sampler import heat_bath_sweep, new_chain, run_chain
from isofk.weights import WeightTable


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_sweep(size: int, q: float, repeat: int) -> dict:
    lat = build_lattice(AngleSequence.alternating(math.pi / 3, math.pi / 2), size, size)
    chain = new_chain(lat, WeightTable.for_lattice(lat, q), seed=1)
    run_chain(chain, 20)
    out = {}
    states = {}
    for name, backend in (("compiled", core), ("python", _pycore)):
        copies = [copy.deepcopy(chain) for _ in range(repeat)]
        it = iter(copies)
        out[name] = best_of(lambda b=backend: heat_bath_sweep(next(it), backend=b), repeat)
        states[name] = copies[-1].config.full_state
    out["agree"] = bool(np.array_equal(states["compiled"], states["python"]))
    out["edges"] = lat.n_edges
    return out


def bench_labels(size: int, repeat: int) -> dict:
    lat = build_lattice(AngleSequence.constant(math.pi / 2), size, size)
    topo = lat.topo
    rng = np.random.default_rng(0)
    st = (rng.random(topo.n_edges) < 0.5).astype(np.uint8)
    eu = np.asarray(topo.edge_u, np.int64)
    ev = np.asarray(topo.edge_v, np.int64)
    out = {}
    labels = {}
    for name, backend in (("compiled", core), ("python", _pycore)):
        out[name] = best_of(lambda b=backend, n=name: labels.__setitem__(
            n, b.label_clusters(topo.n_vertices, eu, ev, st)), repeat)
    out["agree"] = bool(np.array_equal(labels["compiled"], labels["python"]))
    out["edges"] = topo.n_edges
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=32)
    ap.add_argument("--q", type=float, default=4.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not COMPILED:
        print("compiled core unavailable; both columns use the Python fallback")
    rows = [("heat_bath_sweep", bench_sweep(args.size, args.q, args.repeat)),
            ("label_clusters", bench_labels(args.size * 2, args.repeat))]
    print(f"{'kernel':<16} {'edges':>7} {'compiled s':>11} {'python s':>10} {'speedup':>8} agree")
    for name, r in rows:
        print(f"{name:<16} {r['edges']:>7} {r['compiled']:>11.5f} {r['python']:>10.5f} "
              f"{r['python'] / r['compiled']:>8.1f} {r['agree']}")


if __name__ == "__main__":
    main()
