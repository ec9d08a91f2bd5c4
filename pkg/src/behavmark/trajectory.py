"""Logged decision records, the JSONL log format, and erasure/truncation channels.

One record per line::

    {"trajectory_id": "...", "t": 3, "context_hex": "...", "candidates": [...],
     "probs_micro": [...], "chosen": "..."}

Probabilities are integers in units of 1e-6, in the order the policy emitted
the candidates; readers recompute the canonical order.
"""

from __future__ import annotations

import io
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import InvariantViolation, ParseError
from .keyed import StepContext
from .recombination import SCALE, QuantizedDistribution

FIELDS = ("trajectory_id", "t", "context_hex", "candidates", "probs_micro", "chosen")


@dataclass(frozen=True)
class StepRecord:
    trajectory_id: str
    step_index: int
    context_payload: bytes
    candidates: tuple[str, ...]
    probs_micro: tuple[int, ...]
    chosen: str

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        object.__setattr__(self, "probs_micro", tuple(self.probs_micro))
        if self.step_index < 1:
            raise InvariantViolation("t >= 1", f"got {self.step_index}")
        if len(self.candidates) != len(self.probs_micro):
            raise InvariantViolation("len(candidates) == len(probs_micro)")
        if len(set(self.candidates)) != len(self.candidates):
            raise InvariantViolation("distinct candidates")
        if self.chosen not in self.candidates:
            raise InvariantViolation("chosen in candidates", repr(self.chosen))
        if any(p < 0 for p in self.probs_micro) or sum(self.probs_micro) != SCALE:
            raise InvariantViolation("probs_micro sum to 1e6", str(sum(self.probs_micro)))

    @property
    def context(self) -> StepContext:
        return StepContext(self.trajectory_id.encode("utf-8"), self.step_index, self.context_payload)

    @property
    def distribution(self) -> QuantizedDistribution:
        return QuantizedDistribution(self.candidates, self.probs_micro)

    def to_json(self) -> str:
        obj = {
            "trajectory_id": self.trajectory_id,
            "t": self.step_index,
            "context_hex": self.context_payload.hex(),
            "candidates": list(self.candidates),
            "probs_micro": list(self.probs_micro),
            "chosen": self.chosen,
        }
        return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


@dataclass(frozen=True)
class Trajectory:
    records: tuple[StepRecord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        ids = {r.trajectory_id for r in self.records}
        if len(ids) > 1:
            raise InvariantViolation("single trajectory_id", ", ".join(sorted(ids)))
        idx = [r.step_index for r in self.records]
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise InvariantViolation("step_index strictly increasing")

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def trajectory_id(self) -> str | None:
        return self.records[0].trajectory_id if self.records else None


def _parse_record(line: str, lineno: int) -> StepRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", lineno) from None
    if not isinstance(obj, dict):
        raise ParseError("record is not an object", lineno)
    missing = [f for f in FIELDS if f not in obj]
    if missing:
        raise ParseError(f"missing fields {missing}", lineno)
    try:
        t = obj["t"]
        probs = obj["probs_micro"]
        if not isinstance(t, int) or isinstance(t, bool):
            raise ParseError("t must be an integer", lineno)
        if not all(isinstance(p, int) and not isinstance(p, bool) for p in probs):
            raise ParseError("probs_micro must be integers", lineno)
        return StepRecord(
            trajectory_id=str(obj["trajectory_id"]),
            step_index=t,
            context_payload=bytes.fromhex(obj["context_hex"]),
            candidates=tuple(str(c) for c in obj["candidates"]),
            probs_micro=tuple(probs),
            chosen=str(obj["chosen"]),
        )
    except InvariantViolation as e:
        raise InvariantViolation(e.invariant, line=lineno) from None
    except (TypeError, ValueError) as e:
        if isinstance(e, ParseError):
            raise
        raise ParseError(str(e), lineno) from None


def iter_records(source) -> Iterable[StepRecord]:
    """Parse records from a path or text stream, skipping blank lines."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            yield from iter_records(fh)
        return
    for lineno, line in enumerate(source, 1):
        if line.strip():
            yield _parse_record(line, lineno)


def write_records(records: Iterable[StepRecord], sink) -> None:
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            write_records(records, fh)
        return
    for r in records:
        sink.write(r.to_json() + "\n")


def write_log(traj: Trajectory, sink) -> None:
    write_records(traj.records, sink)


def read_log(source) -> Trajectory:
    return Trajectory(tuple(iter_records(source)))


def read_logs(source) -> list[Trajectory]:
    """Group a multi-trajectory log by trajectory_id, in first-seen order."""
    groups: dict[str, list[StepRecord]] = {}
    for r in iter_records(source):
        groups.setdefault(r.trajectory_id, []).append(r)
    return [Trajectory(tuple(v)) for v in groups.values()]


def write_logs(trajs: Sequence[Trajectory], sink) -> None:
    write_records((r for t in trajs for r in t.records), sink)


def dumps(traj: Trajectory) -> str:
    buf = io.StringIO()
    write_log(traj, buf)
    return buf.getvalue()


def loads(text: str) -> Trajectory:
    return read_log(io.StringIO(text))


def erase(traj: Trajectory, p: float, seed: int) -> Trajectory:
    """Drop each record independently with probability ``p``."""
    if not 0 <= p <= 1:
        raise ValueError("erasure probability must lie in [0, 1]")
    rng = random.Random(seed)
    return Trajectory(tuple(r for r in traj.records if rng.random() >= p))


def truncate(traj: Trajectory, tau: int) -> Trajectory:
    if tau < 0:
        raise ValueError("prefix length must be non-negative")
    return Trajectory(tuple(r for r in traj.records if r.step_index <= tau))
