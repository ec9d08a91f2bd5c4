"""Decode success vs per-step erasure probability: RLNC (single, global) and repetition."""

import argparse

from behavmark.harness.experiments import DEFAULT_P_GRID, run_erasure_benchmark


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--length", type=int, default=8)
    ap.add_argument("--trajectories", type=int, default=25)
    ap.add_argument("--horizon", type=int, default=25)
    ap.add_argument("--reps", type=int, default=30)
    ap.add_argument("--refine", type=int, default=3, help="extra points around each 50%% crossing")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="erasure.csv")
    args = ap.parse_args()

    res = run_erasure_benchmark(DEFAULT_P_GRID, args.reps, args.length, args.trajectories,
                                args.horizon, args.seed, refine=args.refine)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(res.to_csv())
    for row in res.rows:
        print(f"{row.series:<18} p={row.param:<6.3g} {row.estimate:.3f}  [{row.ci_lo:.3f}, {row.ci_hi:.3f}]")


if __name__ == "__main__":
    main()
