"""Tensor completion of a planted TTT tensor with 70% of entries missing.

    python3 scripts/completion_demo.py --seed 1 --iters 50

Prints the per-iteration trace for the TTT backend and for a T-SVD backend
over a small sweep of tubal ranks.
"""

import argparse

from tubaltt.completion import CompletionProblem, TsvdBackend, TttBackend, complete
from tubaltt.synth import bernoulli_mask, make_rng, random_ttt
from tubaltt.ttt import ttt_contract


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--iters", type=int, default=50)
    ap.add_argument("--missing", type=float, default=0.7)
    args = ap.parse_args()

    rng = make_rng(args.seed)
    x = ttt_contract(random_ttt(rng, (10, 10, 10), 4, (2, 2)))
    omega = bernoulli_mask(rng, x.shape, args.missing)
    m = omega * x

    res = complete(CompletionProblem(m, omega, TttBackend(ranks=(2, 2)), args.iters, 0.0), truth=x)
    print("TTT ranks (2,2)")
    for r in res.trace[:: max(1, len(res.trace) // 10)] + res.trace[-1:]:
        print(f"  iter {r.iteration:3d}  observed {r.observed_rel_error:.3e}  "
              f"full {r.full_rel_error:.3e}  change {r.change:.2e}")
    for rank in (1, 2, 4, 8):
        res = complete(CompletionProblem(m, omega, TsvdBackend(rank), args.iters, 0.0), truth=x)
        print(f"T-SVD tubal rank {rank}: full relative error {res.trace[-1].full_rel_error:.3e}")


if __name__ == "__main__":
    main()
