"""False-accept rate vs equation overhead for invalid records."""

import argparse
import sys

from behavmark.harness.experiments import UNWATERMARKED, WRONGKEY, expected_false_accept, run_fpr


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--length", type=int, default=128)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--k-max", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="fpr.csv")
    args = ap.parse_args()

    res = run_fpr(range(args.k_max + 1), args.trials, args.length, args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(res.to_csv())
    print(f"{'k':>3} {'unwatermarked':>14} {'wrong key':>10} {'exact':>9} {'2^-k':>9}", file=sys.stderr)
    for k in range(args.k_max + 1):
        u, w = res.lookup(UNWATERMARKED, k), res.lookup(WRONGKEY, k)
        exact = expected_false_accept(args.length + k, args.length)
        print(f"{k:>3} {u.estimate:>14.4f} {w.estimate:>10.4f} {exact:>9.5f} {2.0**-k:>9.5f}", file=sys.stderr)


if __name__ == "__main__":
    main()
