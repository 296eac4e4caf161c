"""Parameter counts and errors of TTT-SVD vs TATCU vs TT-SVD on planted TTT tensors.

    python3 scripts/synthetic_benchmark.py --trials 10 --seed 0
"""

import argparse
import statistics
import time

from tubaltt.synth import make_rng, planted_ttt
from tubaltt.tensor_core import relative_error
from tubaltt.tatcu import tatcu
from tubaltt.tt import tt_contract, tt_svd
from tubaltt.ttt import ttt_contract, ttt_svd_tolerance


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--shape", default="6,6,6,6")
    ap.add_argument("--tube", type=int, default=8)
    ap.add_argument("--ranks", default="3,4,3")
    ap.add_argument("--noise", type=float, default=0.05)
    ap.add_argument("--tol", type=float, default=0.1)
    args = ap.parse_args()

    rng = make_rng(args.seed)
    shape = tuple(int(v) for v in args.shape.split(","))
    ranks = tuple(int(v) for v in args.ranks.split(","))
    rows = {"ttt-svd": [], "tatcu": [], "tt-svd": []}
    for _ in range(args.trials):
        x = planted_ttt(rng, shape, args.tube, ranks, noise=args.noise)
        t0 = time.perf_counter()
        f = ttt_svd_tolerance(x, args.tol)
        rows["ttt-svd"].append((f.param_count(), relative_error(x, ttt_contract(f)), time.perf_counter() - t0))
        t0 = time.perf_counter()
        res = tatcu(x, args.tol)
        rows["tatcu"].append((res.ttt.param_count(), res.rel_error, time.perf_counter() - t0))
        t0 = time.perf_counter()
        g = tt_svd(x, eps=args.tol)
        rows["tt-svd"].append((g.param_count(), relative_error(x, tt_contract(g)), time.perf_counter() - t0))

    print(f"shape {shape} T={args.tube} planted ranks {ranks} noise {args.noise} tol {args.tol}")
    print(f"{'method':<9}{'params (median)':>17}{'rel_err (max)':>15}{'sec (mean)':>12}")
    for name, vals in rows.items():
        params, errs, secs = zip(*vals)
        print(f"{name:<9}{statistics.median(params):>17.0f}{max(errs):>15.4f}{statistics.mean(secs):>12.3f}")


if __name__ == "__main__":
    main()
