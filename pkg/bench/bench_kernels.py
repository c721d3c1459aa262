"""Time the compiled fixpoint kernels against the pure-Python twins.

    python bench/bench_kernels.py [--nodes 20000 50000] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from mpdsverify import _kernels_py
from mpdsverify.kernels import Csr

try:
    from mpdsverify import _kernels as compiled
except ImportError:
    compiled = None


def random_graph(n, degree, rng):
    succ = [rng.integers(0, n, size=rng.integers(0, degree + 1)).tolist() for _ in range(n)]
    return Csr(n, succ)


def cases(c, rng):
    n = c.n
    a = (rng.random(n) < 0.7).astype(np.uint8)
    b = (rng.random(n) < 0.05).astype(np.uint8)
    owner = (rng.random(n) < 0.5).astype(np.uint8)
    alive = np.ones(n, np.uint8)
    return {
        "ex_image": lambda k: k.ex_image(c.pred_ptr, c.pred_idx, a),
        "eu_fix": lambda k: k.eu_fix(c.pred_ptr, c.pred_idx, a, b),
        "eg_fix": lambda k: k.eg_fix(c.succ_ptr, c.succ_idx, c.pred_ptr, c.pred_idx, a),
        "attractor": lambda k: k.attractor(c.succ_ptr, c.succ_idx, c.pred_ptr, c.pred_idx,
                                           owner, alive, b, 0),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, nargs="+", default=[20_000, 100_000])
    ap.add_argument("--degree", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args(argv)
    if compiled is None:
        print("compiled kernels not built; only the pure-Python times are shown")
    rng = np.random.default_rng(a.seed)
    print(f"{'kernel':<10} {'nodes':>8} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for n in a.nodes:
        g = random_graph(n, a.degree, rng)
        for name, run in cases(g, rng).items():
            py = min(timeit.repeat(lambda: run(_kernels_py), number=1, repeat=a.repeat))
            if compiled is None:
                print(f"{name:<10} {n:>8} {py * 1e3:>10.1f} {'-':>10} {'-':>8}")
                continue
            assert np.array_equal(np.asarray(run(compiled)), np.asarray(run(_kernels_py)))
            cy = min(timeit.repeat(lambda: run(compiled), number=1, repeat=a.repeat))
            print(f"{name:<10} {n:>8} {py * 1e3:>10.1f} {cy * 1e3:>10.2f} {py / cy:>7.0f}x")


if __name__ == "__main__":
    main()
