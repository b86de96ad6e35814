"""Time the compiled path-scan kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--paths 50000] [--repeat 3]

Both backends run on the same batch; outputs are checked for equality
before any timing is reported.
"""

import argparse
import time

import numpy as np

from jointruin import kernels
from jointruin.claims import Exponential
from jointruin.model import ModelParams
from jointruin.simulate import generate_paths


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=50_000)
    ap.add_argument("--horizon", type=float, default=28.0)
    ap.add_argument("--levels", type=int, default=81)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    params = ModelParams(r=0.05, lam=1.0, c1=2.0, c2=1.0, delta1=0.5, delta2=0.5)
    batch = generate_paths(params.lam, Exponential(1.0), args.horizon, args.paths, np.random.default_rng(args.seed))
    th, sg, ct = batch.theta, batch.sigma, batch.counts
    levels = np.linspace(0.0, 20.0, args.levels)
    cases = {
        "scan_joint": lambda k: k.scan_joint(th, sg, ct, 2.0, 6.0, params.p1, params.p2, params.r),
        "scan_joint_compounded": lambda k: k.scan_joint_compounded(
            th, sg, ct, 1.0, 3.0, params.c1, params.c2, params.delta1, params.delta2, params.r),
        f"first_passage_levels[{args.levels}]": lambda k: k.first_passage_levels(
            th, sg, ct, levels, params.p2, params.r),
    }
    impls = kernels.backends()
    print(f"{args.paths} paths, mean {ct.mean():.1f} arrivals per path; backends: {', '.join(impls)}")
    print(f"{'kernel':<28}" + "".join(f"{name:>14}" for name in impls) + f"{'speedup':>10}")
    for label, fn in cases.items():
        results = {name: best_of(lambda: fn(mod), args.repeat) for name, mod in impls.items()}
        outs = [out for _, out in results.values()]
        if any(not np.array_equal(outs[0], o) for o in outs[1:]):
            raise SystemExit(f"{label}: backends disagree")
        secs = {name: t for name, (t, _) in results.items()}
        speed = secs["python"] / secs["compiled"] if "compiled" in secs else float("nan")
        print(f"{label:<28}" + "".join(f"{secs[n] * 1e3:>12.1f}ms" for n in impls) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
