"""Timing comparison of the two rational backends.

The backend is fixed at import time, so the benchmark re-runs itself in a
child process per backend with ``NASHREDUCE_RATIONAL_BACKEND`` set, timing
three representative workloads:

* build: linearize a 2x2x2 game with the log construction (3603 players)
* verify: check the lifted pure-equilibrium profile of that game
* solve: bimatrixify small random polymatrix games and solve them exactly

Run from the repository root::

    python3 benchmarks/bench_backends.py
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _workloads():
    from nashreduce import R
    from nashreduce.model import NormalFormGame, random_polymatrix
    from nashreduce.reductions import bimatrixify, lift_to_polymatrix, linearize
    from nashreduce.solvers import support_enumeration_bimatrix

    payoffs = [[[R(1)] * 4, [R(0)] * 4] for _ in range(3)]
    game = NormalFormGame((2, 2, 2), payoffs)

    timings = {}

    start = time.perf_counter()
    gm, mapping, params = linearize(game, R(9, 10), "log")
    timings["build"] = time.perf_counter() - start

    profile = lift_to_polymatrix([(R(1), R(0))] * 3, mapping)
    start = time.perf_counter()
    assert gm.verify_wsne(profile, params.eps_m).ok
    timings["verify"] = time.perf_counter() - start

    start = time.perf_counter()
    for seed in range(5):
        poly = random_polymatrix(seed, (2, 2, 2))
        g2, bi_map, bi_params = bimatrixify(poly, R(3, 10))
        support_enumeration_bimatrix(g2)
    timings["solve"] = time.perf_counter() - start

    return timings


def _run_child(backend: str) -> dict:
    env = dict(os.environ, NASHREDUCE_RATIONAL_BACKEND=backend)
    out = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--backend", backend],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(out.stdout)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--backend", help="internal: run one backend and print JSON")
    args = parser.parse_args()

    if args.backend:
        from nashreduce import ACTIVE

        assert ACTIVE.name == args.backend, f"wanted {args.backend}, got {ACTIVE.name}"
        print(json.dumps(_workloads()))
        return

    from nashreduce import GMPY2

    backends = ["fractions"] + (["gmpy2"] if GMPY2 is not None else [])
    results = {name: _run_child(name) for name in backends}
    names = sorted({key for timing in results.values() for key in timing})
    width = max(len(n) for n in names)
    header = f"{'workload':<{width}}  " + "  ".join(f"{b:>10}" for b in backends)
    print(header)
    print("-" * len(header))
    for name in names:
        row = f"{name:<{width}}  " + "  ".join(
            f"{results[b][name]:>9.3f}s" for b in backends
        )
        print(row)
    if len(backends) == 2:
        total = {b: sum(results[b].values()) for b in backends}
        print(f"\nspeedup (fractions/gmpy2): {total['fractions'] / total['gmpy2']:.2f}x")


if __name__ == "__main__":
    main()
