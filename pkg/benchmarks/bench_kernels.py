"""Compare the compiled and pure-Python hit-and-run kernels.

    python benchmarks/bench_kernels.py [--steps 100000] [--repeat 3]

For each Euclidean body the same random inputs are fed to both backends; the
script reports seconds per run, the speedup, and the largest difference
between the two outputs over the first 100 steps (expected: a few ulps).
Over longer runs the trajectories drift apart: the backends sum dot products
in different orders, and a hit-and-run path amplifies rounding differences
exponentially (about tenfold every 50 steps in a 20-cube).  Both remain exact
samplers of the same chain; only the pathwise agreement is finite.  Matrix
bodies are timed through the sampler for reference only, since their cost is
dominated by LAPACK eigensolvers, not by Python overhead.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from hitrun import ChainConfig, QuantumStates, Simplex, run_chains_parallel
from hitrun.kernels import get_backend


def _cases(d_small=2, d_large=20):
    simplex = Simplex(d_large + 1)
    A, b = (np.ascontiguousarray(m) for m in simplex.polytope)
    return [
        ("ball d=2", d_small, lambda k, x, g, u: k.ball_walk(x, g, u, 1.0), np.zeros(d_small)),
        (f"ball d={d_large}", d_large, lambda k, x, g, u: k.ball_walk(x, g, u, 1.0), np.zeros(d_large)),
        ("cube d=2", d_small, lambda k, x, g, u: k.box_walk(x, g, u, 0.0, 1.0), np.full(d_small, 0.5)),
        (f"cube d={d_large}", d_large, lambda k, x, g, u: k.box_walk(x, g, u, 0.0, 1.0), np.full(d_large, 0.5)),
        (f"simplex N={d_large + 1}", d_large, lambda k, x, g, u: k.polytope_walk(x, g, u, A, b), np.zeros(d_large)),
    ]


def _time(fn, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--python-steps", type=int, default=None,
                    help="steps for the slow backend (default: steps / 10, scaled up in the report)")
    args = ap.parse_args(argv)
    try:
        fast = get_backend("cython")
    except ImportError:
        print("compiled kernels are not built; nothing to compare")
        return 1
    slow = get_backend("python")
    n_slow = args.python_steps or max(1000, args.steps // 10)
    rng = np.random.default_rng(0)
    print(f"{'body':<16}{'cython s':>10}{'python s':>10}{'speedup':>10}{'diff@100':>12}")
    for name, d, walk, x0 in _cases():
        g = rng.standard_normal((args.steps, d))
        u = rng.random(args.steps)
        tc, (out_c, _) = _time(lambda: walk(fast, x0.copy(), g, u), args.repeat)
        tp, (out_p, _) = _time(lambda: walk(slow, x0.copy(), g[:n_slow], u[:n_slow]), 1)
        tp_scaled = tp * args.steps / n_slow
        diff = float(np.max(np.abs(out_c[:100] - out_p[:100])))
        print(f"{name:<16}{tc:>10.4f}{tp_scaled:>10.3f}{tp_scaled / tc:>10.1f}{diff:>12.2e}")
    for N, chains in ((3, 64), (4, 64)):
        body = QuantumStates(N)
        steps = 200
        cfg = ChainConfig(steps=steps, burn_in=0, thin=steps, seed=0)
        t, _ = _time(lambda: run_chains_parallel(body, cfg, chains), 1)
        print(f"quantum N={N}: {1e6 * t / (steps * chains):.1f} us per chain-step ({chains} chains in lockstep)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
