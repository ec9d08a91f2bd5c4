"""Synthetic stand-ins for elicited behavior distributions."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..errors import ParseError
from ..keyed import StepContext
from ..recombination import BehaviorDistribution
from .stats import trial_seed


@dataclass(frozen=True)
class DistSourceSpec:
    """Where step distributions come from.

    ``kind`` is ``"dirichlet"`` (symmetric Dirichlet(alpha) over n candidates),
    ``"peaked"`` (``top_prob`` on one candidate, the rest uniform) or
    ``"scripted"`` (a JSONL file, see :func:`read_dist_stream`). Candidate
    counts are drawn per step from ``[n_min, n_max]`` and horizons from
    ``[horizon_min, horizon_max]``.
    """

    kind: str = "dirichlet"
    alpha: float = 1.0
    n_min: int = 4
    n_max: int = 12
    top_prob: float = 0.6
    horizon_min: int = 10
    horizon_max: int = 40
    seed: int = 0
    path: str | None = None

    def __post_init__(self):
        if self.kind not in ("dirichlet", "peaked", "scripted"):
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.kind == "scripted" and self.path is None:
            raise ValueError("scripted source needs a path")
        if not 1 <= self.n_min <= self.n_max:
            raise ValueError("need 1 <= n_min <= n_max")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.kind == "peaked" and not (1 / self.n_min < self.top_prob <= 1):
            raise ValueError("top_prob must lie in (1/n, 1]")
        if not 1 <= self.horizon_min <= self.horizon_max:
            raise ValueError("need 1 <= horizon_min <= horizon_max")


def candidate_names(n: int) -> list[str]:
    return [f"b{i:02d}" for i in range(n)]


def random_distribution(rng: np.random.Generator, spec: DistSourceSpec, n: int | None = None) -> BehaviorDistribution:
    if n is None:
        n = int(rng.integers(spec.n_min, spec.n_max + 1))
    if spec.kind == "peaked":
        if n == 1:
            probs = [1.0]
        else:
            rest = (1 - spec.top_prob) / (n - 1)
            probs = [rest] * n
            probs[int(rng.integers(n))] = spec.top_prob
    else:
        probs = rng.dirichlet([spec.alpha] * n).tolist()
    total = sum(probs)
    return BehaviorDistribution(candidate_names(n), [p / total for p in probs])


def generate_trajectory(spec: DistSourceSpec, trajectory_id: str, horizon: int | None = None):
    """Deterministic ``[(StepContext, distribution), ...]`` for one trajectory."""
    if spec.kind == "scripted":
        streams = read_dist_stream(spec.path)
        if trajectory_id not in streams:
            raise KeyError(trajectory_id)
        return streams[trajectory_id]
    rng = np.random.default_rng(trial_seed(spec.seed, "traj", trajectory_id))
    if horizon is None:
        horizon = int(rng.integers(spec.horizon_min, spec.horizon_max + 1))
    tid = trajectory_id.encode("utf-8")
    steps = []
    for t in range(1, horizon + 1):
        dist = random_distribution(rng, spec)
        payload = rng.bytes(16)
        steps.append((StepContext(tid, t, payload), dist))
    return steps


def generate_trajectories(spec: DistSourceSpec, count: int, horizon: int | None = None, prefix: str = "traj"):
    if spec.kind == "scripted":
        return list(read_dist_stream(spec.path).values())[:count]
    return [generate_trajectory(spec, f"{prefix}{i:04d}", horizon) for i in range(count)]


def read_dist_stream(path) -> dict[str, list]:
    """Parse a JSONL distribution stream.

    Each line: ``{"trajectory_id": str, "t": int, "context_hex": str,
    "candidates": [str], "probs": [float]}``. ``context_hex`` is optional.
    Steps are grouped by trajectory in first-seen order.
    """
    out: dict[str, list] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                tid = str(obj["trajectory_id"])
                ctx = StepContext(tid.encode("utf-8"), int(obj["t"]), bytes.fromhex(obj.get("context_hex", "")))
                dist = BehaviorDistribution(obj["candidates"], [float(p) for p in obj["probs"]])
            except (KeyError, TypeError, ValueError) as e:
                raise ParseError(f"bad distribution record: {e}", lineno) from None
            out.setdefault(tid, []).append((ctx, dist))
    return out


def write_dist_stream(trajs, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for steps in trajs:
            for ctx, dist in steps:
                fh.write(json.dumps({
                    "trajectory_id": ctx.trajectory_id.decode("utf-8"),
                    "t": ctx.step_index,
                    "context_hex": ctx.context_payload.hex(),
                    "candidates": list(dist.behaviors),
                    "probs": list(dist.probs),
                }, separators=(",", ":")) + "\n")

