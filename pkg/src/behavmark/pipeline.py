"""End-to-end embedding into trajectories and payload verification from logs."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from .erasure import (
    GF2System,
    PayloadMessage,
    SolveResult,
    Status,
    bits_to_int,
    satisfies,
    solve,
    success_lower_bound,
)
from .errors import BehaviorOutsideBin
from .keyed import MasterKey, StepContext, StepStreams, derive_step_key
from .recombination import quantize
from .step import RatelessBitSource, RawBitSource, decode_step, encode_step, unmask
from .trajectory import StepRecord, Trajectory

RAW_HEADER_BITS = 16


class Mode(str, enum.Enum):
    RAW = "raw"
    RATELESS = "rlnc"


@dataclass(frozen=True)
class EmbedConfig:
    payload: PayloadMessage
    master: MasterKey
    mode: Mode = Mode.RATELESS


def frame_raw(payload: PayloadMessage) -> str:
    """RAW mode frame: 16-bit big-endian length, then the payload bits."""
    if payload.length >= 1 << RAW_HEADER_BITS:
        raise ValueError("payload too long for the RAW length header")
    return format(payload.length, f"0{RAW_HEADER_BITS}b") + payload.bits


def make_source(cfg: EmbedConfig):
    if cfg.mode == Mode.RATELESS:
        return RatelessBitSource(cfg.payload.value, cfg.payload.length)
    # zeros after the frame keep the source from running short mid-codeword
    return RawBitSource(frame_raw(cfg.payload), filler="0")


@dataclass(frozen=True)
class EmbedStats:
    steps: int
    bits: int

    @property
    def bits_per_step(self) -> float:
        return self.bits / self.steps if self.steps else 0.0


def embed_trajectory(dist_stream: Iterable, cfg: EmbedConfig, source=None, stats: list | None = None) -> Trajectory:
    """Watermark one trajectory.

    ``dist_stream`` yields ``(StepContext, distribution)`` pairs sharing one
    trajectory id. A custom bit ``source`` overrides the one implied by
    ``cfg.mode``; per-step channel bit counts are appended to ``stats``.
    """
    if source is None:
        source = make_source(cfg)
    records = []
    for ctx, dist in dist_stream:
        q = quantize(dist)
        out = encode_step(q, ctx, cfg.master, source)
        if stats is not None:
            stats.append(out.consumed)
        records.append(
            StepRecord(
                trajectory_id=ctx.trajectory_id.decode("utf-8"),
                step_index=ctx.step_index,
                context_payload=ctx.context_payload,
                candidates=q.behaviors,
                probs_micro=q.units,
                chosen=out.behavior,
            )
        )
    return Trajectory(tuple(records))


@dataclass(frozen=True)
class StepBits:
    """What one logged step yields to the verifier."""

    step_index: int
    channel: str
    source: str
    rows: tuple[int, ...] = ()


def extract_step(record: StepRecord, master: MasterKey, length: int | None = None) -> StepBits:
    """Decode, unmask and (if ``length`` is given) regenerate coefficient rows.

    Raises BehaviorOutsideBin for desynchronized steps.
    """
    streams = StepStreams.for_key(derive_step_key(master, record.context))
    s = decode_step(record.chosen, record.distribution, record.context, master, streams)
    raw = unmask(s, streams=streams)
    rows = ()
    if length is not None:
        rows = tuple(streams.coef.next_coefficient_row(length) for _ in s)
    return StepBits(record.step_index, s, raw, rows)


@dataclass
class VerificationReport:
    payload_bits: int
    observed_steps: int = 0
    contributing_steps: int = 0
    desync_steps: int = 0
    total_bits: int = 0
    rank: int = 0
    status: str = Status.UNDERDETERMINED.value
    payload_hex: str | None = None
    success_bound: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _collect(trajs: Sequence[Trajectory], master: MasterKey, length: int):
    system = GF2System(length)
    report = VerificationReport(payload_bits=length)
    for traj in trajs:
        for rec in traj.records:
            report.observed_steps += 1
            try:
                sb = extract_step(rec, master, length)
            except BehaviorOutsideBin:
                report.desync_steps += 1
                continue
            report.contributing_steps += 1
            report.total_bits += len(sb.source)
            system.extend(sb.rows, (int(b) for b in sb.source))
    return system, report


def _finish(system: GF2System, report: VerificationReport) -> tuple[VerificationReport, SolveResult]:
    res = solve(system)
    report.rank = res.rank
    report.status = res.status.value
    if res.status == Status.UNIQUE:
        report.payload_hex = PayloadMessage(res.solution, system.length).hex()
    if report.total_bits >= system.length:
        report.success_bound = success_lower_bound(report.total_bits, system.length)
    return report, res


def decode_trajectory(traj: Trajectory, master: MasterKey, length: int) -> VerificationReport:
    return global_decode([traj], master, length)


def global_decode(trajs: Sequence[Trajectory], master: MasterKey, length: int) -> VerificationReport:
    """Pool equations from every trajectory and solve once."""
    system, report = _collect(trajs, master, length)
    return _finish(system, report)[0]


class Verdict(str, enum.Enum):
    ACCEPT = "ACCEPT"
    PARTIAL = "PARTIAL"
    REJECT = "REJECT"


def verify_claim(trajs: Sequence[Trajectory], master: MasterKey, claimed: PayloadMessage) -> tuple[Verdict, VerificationReport]:
    system, report = _collect(trajs, master, claimed.length)
    report, res = _finish(system, report)
    if res.status == Status.UNIQUE and res.solution == claimed.value:
        return Verdict.ACCEPT, report
    if res.status == Status.UNDERDETERMINED and satisfies(system, claimed.value):
        return Verdict.PARTIAL, report
    return Verdict.REJECT, report


def decode_raw(traj: Trajectory, master: MasterKey) -> PayloadMessage | None:
    """Read a RAW-mode frame back from a complete, in-order log.

    Returns ``None`` when a step desynchronizes or the log is too short.
    """
    bits = []
    for rec in traj.records:
        try:
            bits.append(extract_step(rec, master).source)
        except BehaviorOutsideBin:
            return None
    stream = "".join(bits)
    if len(stream) < RAW_HEADER_BITS:
        return None
    length = bits_to_int(stream[:RAW_HEADER_BITS])
    body = stream[RAW_HEADER_BITS:RAW_HEADER_BITS + length]
    if length < 1 or len(body) < length:
        return None
    return PayloadMessage.from_bits(body)


def capacity_summary(trajs: Sequence[Trajectory], master: MasterKey) -> dict:
    """Bits per step and per trajectory, recomputed from logs."""
    steps = bits = 0
    for traj in trajs:
        for rec in traj.records:
            steps += 1
            try:
                bits += len(extract_step(rec, master).channel)
            except BehaviorOutsideBin:
                pass
    return {
        "trajectories": len(trajs),
        "steps": steps,
        "bits": bits,
        "bits_per_step": bits / steps if steps else 0.0,
        "bits_per_task": bits / len(trajs) if trajs else 0.0,
    }


def context_stream(trajectory_id: str, dists: Sequence, payloads: Sequence[bytes] | None = None):
    """Pair distributions with 1-based step contexts."""
    tid = trajectory_id.encode("utf-8")
    for t, dist in enumerate(dists, 1):
        payload = payloads[t - 1] if payloads is not None else b""
        yield StepContext(tid, t, payload), dist
