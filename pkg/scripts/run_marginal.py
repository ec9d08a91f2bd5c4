"""Empirical behavior frequencies under watermarking vs the policy distribution."""

import argparse

import numpy as np

from behavmark.cli import EXAMPLE_BEHAVIORS, EXAMPLE_PROBS
from behavmark.harness.baseline import DELTA, rg_bias
from behavmark.harness.experiments import run_marginal_test
from behavmark.harness.sources import DistSourceSpec, random_distribution
from behavmark.harness.stats import total_variation
from behavmark.recombination import BehaviorDistribution


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--synthetic", type=int, default=0, help="also test this many Dirichlet distributions")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="marginal.csv")
    args = ap.parse_args()

    example = BehaviorDistribution(EXAMPLE_BEHAVIORS, EXAMPLE_PROBS)
    dists = [example]
    if args.synthetic:
        rng = np.random.default_rng(args.seed)
        spec = DistSourceSpec(seed=args.seed)
        dists += [random_distribution(rng, spec) for _ in range(args.synthetic)]
    res, outcomes = run_marginal_test(dists, args.samples, args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(res.to_csv())
    for i, o in enumerate(outcomes):
        print(f"d{i}: n={len(o.behaviors)} TV={o.tv:.5f} chi2 p={o.chi2_p:.4f}")
    # the biased baseline on the same distribution, greening the top half
    green = set(EXAMPLE_BEHAVIORS[:3])
    print(f"red-green (delta={DELTA}, green={sorted(green)}): TV={total_variation(example.probs, rg_bias(example, green).probs):.4f}")


if __name__ == "__main__":
    main()
