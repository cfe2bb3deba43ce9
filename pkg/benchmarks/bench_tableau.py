"""Compiled vs pure-numpy tableau kernels on random Clifford circuits.

Usage: python3 benchmarks/bench_tableau.py [--qubits 16 64 256] [--gates 2000]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from eftvqa.stabilizer import _pykernels
from eftvqa.stabilizer._backend import BACKEND, kernels as default_kernels
from eftvqa.stabilizer.tableau import Tableau


def random_ops(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    ops = np.zeros((m, 3), dtype=np.int64)
    ops[:, 0] = rng.choice([0, 1, 2, 6], size=m)
    ops[:, 1] = rng.integers(0, n, size=m)
    t = rng.integers(0, n - 1, size=m)
    ops[:, 2] = np.where(t >= ops[:, 1], t + 1, t)
    return ops


def bench(kernels, n: int, ops: np.ndarray, repeats: int) -> float:
    best = np.inf
    for _ in range(repeats):
        tab = Tableau(n, kernels=kernels)
        rng = np.random.default_rng(1)
        t0 = time.perf_counter()
        tab.run(ops)
        for q in range(n):
            tab.measure(q, rng)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, nargs="+", default=[16, 64, 256])
    ap.add_argument("--gates", type=int, default=2000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"default backend: {BACKEND}")
    print(f"{'qubits':>7} {'gates':>7} {'numpy [s]':>10} {'compiled [s]':>13} {'speedup':>8}")
    for n in args.qubits:
        ops = random_ops(n, args.gates, rng)
        t_py = bench(_pykernels, n, ops, args.repeats)
        if BACKEND == "cython":
            t_cy = bench(default_kernels, n, ops, args.repeats)
            print(f"{n:>7} {args.gates:>7} {t_py:>10.4f} {t_cy:>13.4f} {t_py / t_cy:>8.1f}")
        else:
            print(f"{n:>7} {args.gates:>7} {t_py:>10.4f} {'n/a':>13} {'n/a':>8}")


if __name__ == "__main__":
    main()
