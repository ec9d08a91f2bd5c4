"""Red-green logit-bias baseline: keyed green subsets and a z-score detector."""

from __future__ import annotations

import hashlib
import math
import random

from ..keyed import MasterKey, RandomStream, StepContext, derive_step_key
from ..recombination import BehaviorDistribution, quantize
from ..trajectory import StepRecord, Trajectory

GAMMA = 0.5
DELTA = 2.0


def green_size(n: int, gamma: float) -> int:
    return math.floor(gamma * n + 0.5)


def rg_partition(candidates, ctx: StepContext, master: MasterKey, gamma: float = GAMMA) -> frozenset[str]:
    """Keyed pseudorandom green subset of size round(gamma * n)."""
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    key = derive_step_key(master, ctx)
    stream = RandomStream(hashlib.sha256(key.digest + b"rg-green").digest())
    scores = [(stream.next_unit(), i) for i in range(len(candidates))]
    chosen = sorted(scores)[: green_size(len(candidates), gamma)]
    return frozenset(candidates[i] for _, i in chosen)


def rg_bias(dist: BehaviorDistribution, green, delta: float = DELTA) -> BehaviorDistribution:
    boost = math.exp(delta)
    w = [p * boost if b in green else p for b, p in zip(dist.behaviors, dist.probs)]
    total = sum(w)
    return BehaviorDistribution(dist.behaviors, [x / total for x in w])


def rg_embed_trajectory(dist_stream, master: MasterKey, seed: int, gamma: float = GAMMA, delta: float = DELTA) -> Trajectory:
    """Sample each step from the green-biased distribution."""
    rng = random.Random(seed)
    records = []
    for ctx, dist in dist_stream:
        q = quantize(dist)
        biased = rg_bias(dist, rg_partition(dist.behaviors, ctx, master, gamma), delta)
        chosen = rng.choices(biased.behaviors, weights=biased.probs)[0]
        records.append(StepRecord(ctx.trajectory_id.decode("utf-8"), ctx.step_index,
                                  ctx.context_payload, q.behaviors, q.units, chosen))
    return Trajectory(tuple(records))


def rg_detect(traj: Trajectory, master: MasterKey, gamma: float = GAMMA) -> float:
    """z = (G - gamma N) / sqrt(N gamma (1 - gamma)) over green hits G."""
    if not len(traj):
        raise ValueError("empty trajectory")
    hits = sum(r.chosen in rg_partition(r.candidates, r.context, master, gamma) for r in traj)
    n = len(traj)
    return (hits - gamma * n) / math.sqrt(n * gamma * (1 - gamma))
