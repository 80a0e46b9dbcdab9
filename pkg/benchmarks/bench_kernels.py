"""Time the compiled and numpy kernel backends on bootstrap-sized workloads.

    python benchmarks/bench_kernels.py --rows 20000 --n 40 --repeat 3
"""

import argparse
import timeit

import numpy as np

from poisgof import kernels


def workloads(rows: int, n: int, seed: int):
    rng = np.random.default_rng(seed)
    yield "sparrow-like (lam 1.1)", rng.poisson(1.1, size=(rows, n))
    yield "horse-kick-like (lam 9.8)", rng.poisson(9.8, size=(rows, n))
    yield "overdispersed NB(1,0.5)", rng.negative_binomial(1, 0.5, size=(rows, n))


def best_of(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=20_000, help="samples per statistic batch")
    parser.add_argument("--n", type=int, default=40, help="sample size")
    parser.add_argument("--draws", type=int, default=1_000_000, help="uniforms for the inversion sampler")
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    found = kernels.backends()
    print(f"backends: {', '.join(found)}   (active: {kernels.BACKEND})")
    print(f"{'workload':<28} {'backend':<8} {'seconds':>9} {'rows/s':>12} {'speedup':>8}")

    for label, values in workloads(args.rows, args.n, args.seed):
        lam = values.mean(axis=1)
        times, results = {}, {}
        for name, mod in found.items():
            times[name] = best_of(lambda: mod.all_statistics(values, lam, 1.0), args.repeat)
            results[name] = mod.all_statistics(values, lam, 1.0)
        base = times["python"]
        for name, t in times.items():
            print(f"{label:<28} {name:<8} {t:>9.3f} {args.rows / t:>12,.0f} {base / t:>7.1f}x")
        if len(results) > 1:
            ref = results["python"]
            diff = max(float(np.max(np.abs(r - ref) / np.maximum(1.0, np.abs(ref)))) for r in results.values())
            print(f"{'':<28} max relative difference between backends: {diff:.1e}")

    u = np.random.default_rng(args.seed).random(args.draws)
    for lam in (1.1, 9.8):
        times, outs = {}, {}
        for name, mod in found.items():
            times[name] = best_of(lambda: mod.poisson_inversion(lam, u), args.repeat)
            outs[name] = mod.poisson_inversion(lam, u)
        same = all(np.array_equal(outs["python"], o) for o in outs.values())
        for name, t in times.items():
            print(f"{'inversion lam=' + str(lam):<28} {name:<8} {t:>9.3f} {args.draws / t:>12,.0f} "
                  f"{times['python'] / t:>7.1f}x")
        print(f"{'':<28} identical variates across backends: {same}")


if __name__ == "__main__":
    main()
