"""Decode success once the observed prefix carries L + overhead equations."""

import argparse

from behavmark.erasure import full_rank_probability, success_lower_bound
from behavmark.harness.experiments import run_truncation


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--length", type=int, default=64)
    ap.add_argument("--overhead", type=int, default=8)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = run_truncation(args.trials, args.length, args.overhead, args.seed)
    r = args.length + args.overhead
    print(f"success {out.successes}/{out.trials} = {out.rate:.4f}")
    print(f"bound {success_lower_bound(r, args.length):.4f}, exact full-rank {full_rank_probability(r, args.length):.4f}")
    print(f"received bits: min {min(out.received)}, mean {sum(out.received) / len(out.received):.1f}")


if __name__ == "__main__":
    main()
