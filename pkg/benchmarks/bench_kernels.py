"""Compiled kernels against their pure-Python twins.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from trapkit import _kernels_py
from trapkit.graph import grid, petersen
from trapkit.tableau import Tableau

try:
    from trapkit import _kernels
except ImportError:
    _kernels = None


def _failures_args(trials=20_000, n=40, s=20, k=5):
    rng = np.random.default_rng(0)
    dev = rng.integers(0, 1 << 5, size=(trials, n)).astype(np.uint64)
    tests = np.sort(np.argsort(rng.random((trials, n)), axis=1)[:, :s], axis=1).astype(np.int64)
    picks = rng.integers(0, k, size=(trials, s)).astype(np.int64)
    masks = rng.integers(1, 1 << 5, size=k).astype(np.uint64)
    parity = np.zeros(k, dtype=np.uint8)
    return dev, tests, picks, masks, parity


def _graph_tableau(n=12):
    t = Tableau(n)
    for a in range(n):
        t.h(a)
    for a in range(n - 1):
        t.cz(a, a + 1)
    return t


def cases(impl):
    g = petersen()
    adj, n = g.adjacency_masks(), len(g)
    h = grid(4, 4)
    hadj = h.adjacency_masks()
    fargs = _failures_args()
    t = _graph_tableau()

    def measure_all():
        u = Tableau.__new__(Tableau)
        u.n, u.x, u.z, u.r = t.n, t.x.copy(), t.z.copy(), t.r.copy()
        for a in range(u.n):
            impl.tableau_rotate_measure(u.x, u.z, u.r, u.n, a, a % 4, a % 4, 0)

    return {
        "independent_sets petersen": lambda: list(impl.independent_sets(adj, n, n)),
        "independent_sets grid 4x4": lambda: list(impl.independent_sets(hadj, 16, 16)),
        "count_failures 20k x 40": lambda: impl.count_failures(*fargs),
        "rotate+measure 12 qubits": measure_all,
    }


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = [("python", _kernels_py)] + ([("cython", _kernels)] if _kernels is not None else [])
    table = {name: {label: fn for label, fn in cases(impl).items()} for name, impl in impls}
    print(f"{'kernel':28s}" + "".join(f"{name:>12s}" for name, _ in impls) + ("   speedup" if len(impls) > 1 else ""))
    for label in table["python"]:
        times = [min(timeit.repeat(table[name][label], number=1, repeat=args.repeat)) for name, _ in impls]
        row = f"{label:28s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times)
        if len(times) > 1:
            row += f"  {times[0] / times[1]:8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
