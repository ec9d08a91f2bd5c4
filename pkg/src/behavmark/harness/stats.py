"""Seeding and interval helpers shared by the experiments."""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass, field

from scipy import stats as _st

Z95 = 1.959963984540054


def trial_seed(seed: int, *parts) -> int:
    """64-bit seed from hash(experiment seed || labels), independent of scheduling."""
    h = hashlib.sha256(str(seed).encode())
    for p in parts:
        h.update(b"\x1f" + str(p).encode())
    return int.from_bytes(h.digest()[:8], "big")


def trial_bytes(seed: int, *parts, size: int = 32) -> bytes:
    h = hashlib.sha256(str(trial_seed(seed, *parts)).encode()).digest()
    return h[:size]


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    ci = _st.binomtest(successes, trials).proportion_ci(confidence, method="wilson")
    return max(0.0, float(ci.low)), min(1.0, float(ci.high))


def sem_interval(successes: int, trials: int) -> tuple[float, float]:
    """Normal-approximation +/- 1.96 SEM, clipped to [0, 1]."""
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    half = Z95 * math.sqrt(p * (1 - p) / trials)
    return max(0.0, p - half), min(1.0, p + half)


@dataclass
class ResultRow:
    series: str
    param: float
    estimate: float
    ci_lo: float
    ci_hi: float
    trials: int


@dataclass
class ExperimentResult:
    name: str
    rows: list[ResultRow] = field(default_factory=list)

    def add_proportion(self, series: str, param, successes: int, trials: int) -> ResultRow:
        lo, hi = wilson_interval(successes, trials)
        est = successes / trials if trials else 0.0
        row = ResultRow(series, param, est, lo, hi, trials)
        self.rows.append(row)
        return row

    def series(self, name: str) -> list[ResultRow]:
        return sorted((r for r in self.rows if r.series == name), key=lambda r: r.param)

    def lookup(self, series: str, param) -> ResultRow:
        for r in self.rows:
            if r.series == series and r.param == param:
                return r
        raise KeyError((series, param))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["series", "param", "estimate", "ci_lo", "ci_hi", "trials"])
        for r in self.rows:
            w.writerow([r.series, _fmt(r.param), _fmt(r.estimate), _fmt(r.ci_lo), _fmt(r.ci_hi), r.trials])
        return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, int):
        return str(x)
    return f"{x:.6g}"


def total_variation(p, q) -> float:
    return 0.5 * sum(abs(a - b) for a, b in zip(p, q, strict=True))


def kl_divergence(p, q) -> float:
    """KL(p || q) in nats; terms with p_i = 0 contribute nothing."""
    total = 0.0
    for a, b in zip(p, q, strict=True):
        if a > 0:
            if b <= 0:
                return math.inf
            total += a * math.log(a / b)
    return total
