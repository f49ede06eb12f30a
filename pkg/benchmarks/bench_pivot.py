"""Compare the compiled pivot kernel with the pure-Python fallback.

Two measurements: the elimination step alone, replayed over pivot steps
recorded from real solver runs (same tableaus, same pivot positions for
both kernels), and end-to-end solves of generated auction programs in
child processes with the kernel forced each way (kernel choice is fixed
at import, so each timing runs in its own process).  Exact arithmetic
means the kernels must produce identical results; the run verifies that
before reporting times.

    python3 benchmarks/bench_pivot.py
    python3 benchmarks/bench_pivot.py --record 12 --reps 5 --solves 32
"""

import argparse
import os
import subprocess
import sys
import time
from fractions import Fraction

SOLVE_CHILD = "--solve-batch"

SHAPES = (
    {"n": 2, "m": 1, "support": 2},
    {"n": 1, "m": 2, "support": 2},
    {"n": 3, "m": 1, "support": 2},
    {"n": 2, "m": 2, "support": 2},
)


def record_steps(count):
    """Solve a seeded batch with the elimination call intercepted,
    keeping a tableau snapshot per pivot for later replay."""
    from auctionlp.auction import BAYES, DS, solve_form
    from auctionlp.lp import simplex
    from auctionlp.oracles import gen_instance

    steps = []
    original = simplex.eliminate

    def recorder(rows, r, c):
        steps.append(([row[:] for row in rows], r, c))
        original(rows, r, c)

    simplex.eliminate = recorder
    try:
        for s in range(count):
            instance = gen_instance(SHAPES[s % len(SHAPES)], 100 + s)
            solve_form(instance, DS)
            solve_form(instance, BAYES)
    finally:
        simplex.eliminate = original
    return steps


def replay(module, steps):
    prepared = [([row[:] for row in rows], r, c) for rows, r, c in steps]
    start = time.perf_counter()
    for rows, r, c in prepared:
        module.eliminate(rows, r, c)
    return time.perf_counter() - start, prepared


def bench_eliminate(record, reps):
    from auctionlp.lp import _pivot_py

    try:
        from auctionlp.lp import _pivot_cy
    except ImportError:
        _pivot_cy = None

    steps = record_steps(record)
    kernels = [("pure", _pivot_py)]
    if _pivot_cy is not None:
        kernels.insert(0, ("compiled", _pivot_cy))

    times = {}
    finals = {}
    for name, module in kernels:
        best = None
        final = None
        for _ in range(reps):
            elapsed, final = replay(module, steps)
            best = elapsed if best is None else min(best, elapsed)
        times[name] = best
        finals[name] = final
    identical = len(finals) < 2 or finals["pure"] == finals["compiled"]
    return len(steps), times, identical


def solve_batch(count):
    """Child-process body: solve a seeded batch with whatever kernel the
    environment selected, print kernel, wall time, objective total."""
    from auctionlp.auction import BAYES, DS, solve_form
    from auctionlp.lp import KERNEL
    from auctionlp.model import rat_str
    from auctionlp.oracles import gen_instance

    instances = [gen_instance(SHAPES[s % len(SHAPES)], s) for s in range(count)]
    total = Fraction(0)
    start = time.perf_counter()
    for instance in instances:
        total += solve_form(instance, DS).objective
        total += solve_form(instance, BAYES).objective
    elapsed = time.perf_counter() - start
    print(KERNEL, elapsed, rat_str(total))


def bench_solves(count):
    results = {}
    for label, forced in (("compiled", None), ("pure", "1")):
        env = dict(os.environ)
        env.pop("AUCTIONLP_PURE", None)
        if forced:
            env["AUCTIONLP_PURE"] = forced
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), SOLVE_CHILD, str(count)],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        kernel, elapsed, total = proc.stdout.split()
        results[label] = (kernel, float(elapsed), total)
    return results


def main():
    if len(sys.argv) > 1 and sys.argv[1] == SOLVE_CHILD:
        solve_batch(int(sys.argv[2]))
        return

    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--record", type=int, default=8,
                        help="instances to record pivot steps from")
    parser.add_argument("--reps", type=int, default=3)
    parser.add_argument("--solves", type=int, default=24)
    args = parser.parse_args()

    from auctionlp.lp import KERNEL

    print(f"active kernel: {KERNEL}")

    pivots, times, identical = bench_eliminate(args.record, args.reps)
    print(f"eliminate microbench: {pivots} recorded pivots from "
          f"{args.record} solved instances, best of {args.reps}")
    for name in ("compiled", "pure"):
        if name in times:
            print(f"  {name:9s} {times[name]:.4f}s")
    if "compiled" in times:
        print(f"  speedup   {times['pure'] / times['compiled']:.2f}x")
        print(f"  tableaus identical: {'yes' if identical else 'NO'}")
        if not identical:
            raise SystemExit("kernel results diverged")
    else:
        print("  compiled kernel not built; microbench ran pure only")

    results = bench_solves(args.solves)
    print(f"full solves: {args.solves} instances, both forms each, "
          f"one child process per kernel")
    for label in ("compiled", "pure"):
        kernel, elapsed, total = results[label]
        note = "" if kernel == label else f"  (resolved to {kernel})"
        print(f"  {label:9s} {elapsed:.4f}s{note}")
    if results["compiled"][2] != results["pure"][2]:
        raise SystemExit("solve objectives diverged between kernels")
    print(f"  objective totals agree: {results['compiled'][2]}")
    if results["compiled"][0] == "compiled":
        print(f"  speedup   {results['pure'][1] / results['compiled'][1]:.2f}x")


if __name__ == "__main__":
    main()
