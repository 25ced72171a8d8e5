"""Time the compiled query kernels against the NumPy fallback.

Builds a synthetic inverted-file layout, runs assign_nearest and
scan_lists through both backends, checks they agree, and prints a
best-of-N timing table. Run from the repo root:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --n 200000 --queries 500
"""

import argparse
import time

import numpy as np

from pairmine._kernels import _numpy

try:
    from pairmine._kernels import _core
except ImportError:
    _core = None


def build_layout(rng, n, d, x):
    vecs = rng.standard_normal((n, d)).astype(np.float32)
    centroids = rng.standard_normal((x, d)).astype(np.float32)
    labels, _ = _numpy.assign_nearest(vecs, centroids)
    order = np.argsort(labels, kind="stable")
    vecs = np.ascontiguousarray(vecs[order])
    ids = np.arange(n, dtype=np.int64)[order]
    counts = np.bincount(labels, minlength=x)
    offsets = np.zeros(x + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return vecs, ids, offsets, centroids


def best_of(repeats, fn):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_assign(impl, points, centroids, repeats):
    return best_of(repeats, lambda: impl.assign_nearest(points, centroids))


def bench_scan(impl, queries, vecs, ids, offsets, probe_lists, k, repeats):
    def run():
        for qi in range(queries.shape[0]):
            probe = probe_lists[qi]
            impl.scan_lists(queries[qi], vecs, ids, offsets[probe], offsets[probe + 1], k)

    return best_of(repeats, run)


def check_agreement(queries, vecs, ids, offsets, probe_lists, k):
    for qi in range(queries.shape[0]):
        probe = probe_lists[qi]
        args = (queries[qi], vecs, ids, offsets[probe], offsets[probe + 1], k)
        got_ids, got_d = _core.scan_lists(*args)
        want_ids, want_d = _numpy.scan_lists(*args)
        # summation order differs between backends, so distances agree only
        # to rounding; the returned ids and ranking must agree exactly
        if not (np.array_equal(got_ids, want_ids)
                and np.allclose(got_d, want_d, rtol=1e-12, atol=0.0)):
            raise SystemExit(f"backend disagreement on query {qi}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100_000, help="indexed vectors")
    ap.add_argument("--d", type=int, default=16, help="reduced dimension")
    ap.add_argument("--x", type=int, default=100, help="cluster lists")
    ap.add_argument("--queries", type=int, default=200)
    ap.add_argument("--k", type=int, default=100)
    ap.add_argument("--nprobe", type=int, default=13)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    vecs, ids, offsets, centroids = build_layout(rng, args.n, args.d, args.x)
    queries = rng.standard_normal((args.queries, args.d)).astype(np.float32)
    probe_lists = np.stack([
        rng.choice(args.x, size=args.nprobe, replace=False) for _ in range(args.queries)
    ])

    print(f"n={args.n} d={args.d} x={args.x} queries={args.queries} "
          f"k={args.k} nprobe={args.nprobe} (best of {args.repeats})")

    if _core is None:
        print("compiled core not built; timing the NumPy fallback only")
    else:
        check_agreement(queries, vecs, ids, offsets, probe_lists, args.k)
        print("backends agree on all scan results")

    rows = []
    t = bench_assign(_numpy, vecs, centroids, args.repeats)
    rows.append(("assign_nearest", "numpy", t))
    if _core is not None:
        rows.append(("assign_nearest", "compiled",
                     bench_assign(_core, vecs, centroids, args.repeats)))
    t = bench_scan(_numpy, queries, vecs, ids, offsets, probe_lists, args.k, args.repeats)
    rows.append(("scan_lists", "numpy", t))
    if _core is not None:
        rows.append(("scan_lists", "compiled",
                     bench_scan(_core, queries, vecs, ids, offsets, probe_lists,
                                args.k, args.repeats)))

    print(f"\n{'kernel':<16} {'backend':<10} {'time':>10}  speedup")
    base = {}
    for kernel, backend, t in rows:
        if backend == "numpy":
            base[kernel] = t
        rel = base[kernel] / t if t > 0 else float("inf")
        print(f"{kernel:<16} {backend:<10} {t * 1e3:>8.2f}ms  {rel:>5.2f}x")


if __name__ == "__main__":
    main()
