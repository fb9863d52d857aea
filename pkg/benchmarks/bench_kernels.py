"""Compare the compiled and pure-Python tree kernels.

    python3 benchmarks/bench_kernels.py [--rows 100000] [--repeat 3]

Both backends must produce the same tree; the script checks that before
reporting timings.
"""
import argparse
import time

import numpy as np

from lqe import kernels
from lqe.learn.tree import grow_tree


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def make_data(n, d, seed):
    rng = np.random.default_rng(seed)
    # integer-valued like RSSI features, with many ties
    X = np.rint(rng.normal(40, 12, (n, d)))
    score = X[:, 0] + 0.5 * X[:, 1] - 0.2 * X[:, 2 % d] + rng.normal(0, 8, n)
    y = np.digitize(score, np.quantile(score, [0.34, 0.39])).astype(np.int64)
    return X, y


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=100_000)
    ap.add_argument("--features", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    names = kernels.available_backends()
    if "cython" not in names:
        print("compiled extension not built; only the python backend is available")
    X, y = make_data(args.rows, args.features, args.seed)
    idx = np.arange(args.rows, dtype=np.intp)
    feats = list(range(args.features))
    Q = np.random.default_rng(1).normal(40, 12, (args.rows, args.features))

    results = {}
    trees = {}
    for name in names:
        be = kernels.get_backend(name)
        t_split, _ = best_of(lambda: be.best_split(X, y, idx, feats, 3, 5), args.repeat)
        t_grow, tree = best_of(lambda: grow_tree(X, y, min_samples_leaf=5, backend=be), args.repeat)
        t_apply, _ = best_of(lambda: tree.apply(Q, be), args.repeat)
        results[name] = (t_split, t_grow, t_apply)
        trees[name] = tree.to_dict()

    if len(trees) == 2 and trees["cython"] != trees["python"]:
        raise SystemExit("backends disagree: trees differ")

    print(f"rows={args.rows} features={args.features} best of {args.repeat}")
    print(f"{'backend':<8} {'best_split':>11} {'grow_tree':>11} {'tree_apply':>11}")
    for name, row in results.items():
        print(f"{name:<8} " + " ".join(f"{t:10.4f}s" for t in row))
    if len(results) == 2:
        speed = np.array(results["python"]) / np.array(results["cython"])
        print(f"{'speedup':<8} " + " ".join(f"{s:10.1f}x" for s in speed))


if __name__ == "__main__":
    main()
