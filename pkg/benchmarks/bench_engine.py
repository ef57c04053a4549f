"""Compiled core against the pure-Python fallback on the 4-point oracle.

    python benchmarks/bench_engine.py [--orders 4 6 8] [--triples 50] [--repeat 3]

Two timings per order: building the engine tables for one truncation
weight (cold), and evaluating a batch of winding triples on an already
built engine (warm).  Both backends must return identical series.
"""

import argparse
import itertools
import json
import random
import sys
import time

from hdft import _engine
from hdft.correlators import _ENGINES, four_point_oracle
from hdft.fock_oracle import label


def triples(n, seed=0):
    vecs = list(itertools.product((-1, 0, 1), repeat=3))
    rng = random.Random(seed)
    return [tuple(label(rng.choice(vecs)) for _ in range(3)) for _ in range(n)]


def run_batch(order, batch, compiled):
    return [four_point_oracle(a + b + c, a, b, c, order, use_compiled=compiled)
            for a, b, c in batch]


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(order, batch, repeat):
    row = {"order": order, "triples": len(batch)}
    results = {}
    for compiled in (True, False):
        name = "compiled" if compiled else "python"

        def cold():
            _ENGINES.clear()
            return four_point_oracle(*_first(batch), order, use_compiled=compiled)

        row[f"{name}_cold_s"], _ = best_of(cold, repeat)
        row[f"{name}_warm_s"], results[name] = best_of(
            lambda: run_batch(order, batch, compiled), repeat)
    row["agree"] = results["compiled"] == results["python"]
    row["cold_speedup"] = row["python_cold_s"] / row["compiled_cold_s"]
    row["warm_speedup"] = row["python_warm_s"] / row["compiled_warm_s"]
    return row


def _first(batch):
    a, b, c = batch[0]
    return a + b + c, a, b, c


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--orders", type=int, nargs="+", default=[4, 6, 8])
    ap.add_argument("--triples", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true", help="print rows as JSON")
    args = ap.parse_args(argv)

    if _engine.backend() != "compiled":
        print("compiled core not importable; build the extension first", file=sys.stderr)
        return 2
    batch = triples(args.triples)
    rows = [bench(k, batch, args.repeat) for k in args.orders]
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        print(f"{'K':>3} {'cold py':>9} {'cold C':>9} {'x':>6} "
              f"{'warm py':>9} {'warm C':>9} {'x':>6}  agree")
        for r in rows:
            print(f"{r['order']:>3} {r['python_cold_s']:9.3f} {r['compiled_cold_s']:9.3f} "
                  f"{r['cold_speedup']:6.1f} {r['python_warm_s']:9.3f} "
                  f"{r['compiled_warm_s']:9.3f} {r['warm_speedup']:6.1f}  {r['agree']}")
    return 0 if all(r["agree"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
