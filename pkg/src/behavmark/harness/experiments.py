"""Monte Carlo drivers: marginal preservation, FPR, erasure curves, truncation,
and sensitivity to distribution perturbation.

Every trial seeds itself from ``trial_seed(seed, ...)``, so results do not
depend on execution order.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats as st

from ..erasure import (
    GF2System,
    PayloadMessage,
    Status,
    consistency_check,
    coefficient_rows,
    dot,
    repetition_blind_decode,
)
from ..errors import BehaviorOutsideBin
from ..keyed import MasterKey, StepContext, derive_step_key
from ..pipeline import (
    EmbedConfig,
    Mode,
    decode_trajectory,
    embed_trajectory,
    extract_step,
    global_decode,
)
from ..recombination import BehaviorDistribution, quantize
from ..step import CyclicBitSource, RawBitSource, decode_step, encode_step
from ..trajectory import Trajectory, erase, truncate
from .sources import DistSourceSpec, generate_trajectory, random_distribution
from .stats import ExperimentResult, ResultRow, kl_divergence, total_variation, trial_bytes, trial_seed

# Marginal preservation -------------------------------------------------------


@dataclass
class MarginalOutcome:
    behaviors: tuple[str, ...]
    expected: tuple[float, ...]
    counts: tuple[int, ...]
    tv: float
    chi2_p: float

    @property
    def samples(self) -> int:
        return sum(self.counts)


def marginal_counts(dist, samples: int, seed: int, label: str = "m") -> MarginalOutcome:
    """Encode ``dist`` ``samples`` times under fresh step keys and random payload bits."""
    q = quantize(dist)
    master = MasterKey(trial_bytes(seed, "marginal-key", label))
    rng = random.Random(trial_seed(seed, "marginal-bits", label))
    tid = f"marginal-{label}".encode()
    index = {b: i for i, b in enumerate(q.behaviors)}
    counts = [0] * len(q)
    for s in range(samples):
        src = RawBitSource(format(rng.getrandbits(16), "016b"))
        out = encode_step(q, StepContext(tid, s + 1), master, src)
        counts[index[out.behavior]] += 1
    expected = [float(p) for p in q.probs]
    freqs = [c / samples for c in counts]
    support = [i for i, p in enumerate(expected) if p > 0]
    if len(support) > 1:
        chi = st.chisquare([counts[i] for i in support], [expected[i] * samples for i in support])
        chi2_p = float(chi.pvalue)
    else:
        chi2_p = 1.0
    return MarginalOutcome(q.behaviors, tuple(expected), tuple(counts), total_variation(freqs, expected), chi2_p)


def run_marginal_test(source: DistSourceSpec | Sequence, samples: int, seed: int = 0, count: int = 3):
    """Empirical behavior frequencies vs quantized P for each test distribution.

    ``source`` is either a DistSourceSpec (``count`` distributions are drawn from it) or
    an explicit list of distributions.
    """
    if isinstance(source, DistSourceSpec):
        rng = np.random.default_rng(trial_seed(source.seed, "marginal-dists"))
        dists = [random_distribution(rng, source) for _ in range(count)]
    else:
        dists = list(source)
    result = ExperimentResult("marginal")
    outcomes = []
    for i, dist in enumerate(dists):
        out = marginal_counts(dist, samples, seed, label=str(i))
        outcomes.append(out)
        for b, c in zip(out.behaviors, out.counts):
            result.add_proportion(f"d{i}:{b}", 0, c, samples)
        result.rows.append(ResultRow(f"d{i}:tv", 0, out.tv, out.tv, out.tv, samples))
        result.rows.append(ResultRow(f"d{i}:chi2_p", 0, out.chi2_p, out.chi2_p, out.chi2_p, samples))
    return result, outcomes


# False positives ---------------------------------------------------------------

UNWATERMARKED = "unwatermarked"
WRONGKEY = "wrongkey"


def _fpr_rows(seed: int, cond: str, k: int, trial: int, length: int, count: int) -> list[int]:
    master = MasterKey(trial_bytes(seed, "fpr", cond, k, trial, "key"))
    ctx = StepContext(b"fpr", 1, trial_bytes(seed, "fpr", cond, k, trial, "ctx", size=16))
    return coefficient_rows(derive_step_key(master, ctx), length, count)


def fpr_trial(seed: int, cond: str, k: int, trial: int, length: int) -> bool:
    """One verification attempt on an invalid record; True if it is accepted."""
    count = length + k
    rng = random.Random(trial_seed(seed, "fpr", cond, k, trial, "obs"))
    if cond == UNWATERMARKED:
        rows = _fpr_rows(seed, cond, k, trial, length, count)
        ys = [rng.getrandbits(1) for _ in range(count)]
    elif cond == WRONGKEY:
        m = rng.getrandbits(length)
        true_rows = _fpr_rows(seed, cond, k, trial, length, count)
        ys = [dot(r, m) for r in true_rows]
        rows = _fpr_rows(seed, cond + "-forged", k, trial, length, count)
    else:
        raise ValueError(cond)
    sys = GF2System(length)
    sys.extend(rows, ys)
    return consistency_check(sys)


def run_fpr(k_values: Sequence[int] = range(17), trials: int = 1000, length: int = 128, seed: int = 0) -> ExperimentResult:
    result = ExperimentResult("fpr")
    for cond in (UNWATERMARKED, WRONGKEY):
        for k in k_values:
            hits = sum(fpr_trial(seed, cond, k, i, length) for i in range(trials))
            result.add_proportion(cond, k, hits, trials)
    return result


def expected_false_accept(rows: int, length: int) -> float:
    """Exact P[y in colspan(A)] for dense uniform A (rows x length) and uniform y."""
    # rank distribution of a random rows x length matrix via row-by-row recursion
    dist = {0: 1.0}
    for _ in range(rows):
        nxt: dict[int, float] = {}
        for r, p in dist.items():
            stay = 2.0 ** (r - length)
            nxt[r] = nxt.get(r, 0.0) + p * stay
            if r < length:
                nxt[r + 1] = nxt.get(r + 1, 0.0) + p * (1 - stay)
        dist = nxt
    return sum(p * 2.0 ** (r - rows) for r, p in dist.items())


# Erasure robustness ------------------------------------------------------------

RLNC_SINGLE = "rlnc-single"
RLNC_GLOBAL = "rlnc-global"
REP_SINGLE = "repetition-single"
DEFAULT_P_GRID = tuple(round(0.1 * i, 1) for i in range(11))


@dataclass
class ErasureSetup:
    payload: PayloadMessage
    master: MasterKey
    rlnc: list[Trajectory] = field(default_factory=list)
    repetition: list[Trajectory] = field(default_factory=list)
    rep_capacities: list[list[int]] = field(default_factory=list)
    rejected: int = 0


def _rep_decode(traj: Trajectory, setup: ErasureSetup, capacities: list[int]) -> bool:
    surviving = []
    for rec in traj.records:
        try:
            bits = extract_step(rec, setup.master).source
        except BehaviorOutsideBin:
            continue
        surviving.append((rec.step_index - 1, bits))
    got = repetition_blind_decode(surviving, setup.payload.length, capacities)
    return got == setup.payload.bits


def _rlnc_ok(report, payload: PayloadMessage) -> bool:
    return report.status == Status.UNIQUE.value and report.payload_hex == payload.hex()


def prepare_erasure(
    n_traj: int = 25,
    horizon: int = 25,
    length: int = 8,
    seed: int = 0,
    source: DistSourceSpec | None = None,
    max_candidates: int = 1000,
) -> ErasureSetup:
    """Embed RLNC and repetition trajectories over shared distribution streams.

    A stream is kept only if both methods decode it without erasure.
    """
    source = source or DistSourceSpec(seed=seed)
    rng = random.Random(trial_seed(seed, "erasure-payload"))
    payload = PayloadMessage(rng.getrandbits(length), length)
    master = MasterKey(trial_bytes(seed, "erasure-key"))
    setup = ErasureSetup(payload, master)
    cfg = EmbedConfig(payload, master, Mode.RATELESS)
    for i in range(max_candidates):
        if len(setup.rlnc) == n_traj:
            break
        steps = generate_trajectory(source, f"erasure{i:04d}", horizon)
        rl = embed_trajectory(steps, cfg)
        caps: list[int] = []
        rep = embed_trajectory(steps, cfg, source=CyclicBitSource(payload.bits), stats=caps)
        if _rlnc_ok(decode_trajectory(rl, master, length), payload) and _rep_decode(rep, setup, caps):
            setup.rlnc.append(rl)
            setup.repetition.append(rep)
            setup.rep_capacities.append(caps)
        else:
            setup.rejected += 1
    if len(setup.rlnc) < n_traj:
        raise RuntimeError("could not find enough decodable trajectories")
    return setup


def _erasure_point(setup: ErasureSetup, p: float, reps: int, seed: int, series: set[str]) -> dict[str, tuple[int, int]]:
    L = setup.payload.length
    out = {}
    if RLNC_SINGLE in series or REP_SINGLE in series:
        rl_hits = rep_hits = n = 0
        for i, (rl, rep, caps) in enumerate(zip(setup.rlnc, setup.repetition, setup.rep_capacities)):
            for r in range(reps):
                s = trial_seed(seed, "erase", p, i, r)  # same realization for both methods
                n += 1
                if RLNC_SINGLE in series:
                    rl_hits += _rlnc_ok(decode_trajectory(erase(rl, p, s), setup.master, L), setup.payload)
                if REP_SINGLE in series:
                    rep_hits += _rep_decode(erase(rep, p, s), setup, caps)
        if RLNC_SINGLE in series:
            out[RLNC_SINGLE] = (rl_hits, n)
        if REP_SINGLE in series:
            out[REP_SINGLE] = (rep_hits, n)
    if RLNC_GLOBAL in series:
        hits = 0
        for r in range(reps):
            pooled = [erase(rl, p, trial_seed(seed, "erase", p, i, r)) for i, rl in enumerate(setup.rlnc)]
            hits += _rlnc_ok(global_decode(pooled, setup.master, L), setup.payload)
        out[RLNC_GLOBAL] = (hits, reps)
    return out


def run_erasure_benchmark(
    p_grid: Sequence[float] = DEFAULT_P_GRID,
    reps: int = 30,
    length: int = 8,
    n_traj: int = 25,
    horizon: int = 25,
    seed: int = 0,
    series: Sequence[str] = (RLNC_SINGLE, RLNC_GLOBAL, REP_SINGLE),
    refine: int = 3,
    setup: ErasureSetup | None = None,
) -> ExperimentResult:
    """Decode success vs erasure probability, refined around 50% crossings.

    For each single-episode series, ``refine`` extra points are inserted
    evenly between the two grid points that bracket its 50% crossing.
    """
    setup = setup or prepare_erasure(n_traj, horizon, length, seed)
    wanted = set(series)
    done: dict[float, dict] = {}

    def run(points):
        for p in points:
            p = round(float(p), 6)
            if p not in done:
                done[p] = _erasure_point(setup, p, reps, seed, wanted)

    run(p_grid)
    if refine:
        extra = set()
        coarse = sorted(done)
        for name in (RLNC_SINGLE, REP_SINGLE):
            if name not in wanted:
                continue
            for a, b in zip(coarse, coarse[1:]):
                ra = done[a][name][0] / done[a][name][1]
                rb = done[b][name][0] / done[b][name][1]
                if ra >= 0.5 > rb:
                    extra.update(a + (b - a) * j / (refine + 1) for j in range(1, refine + 1))
        run(sorted(extra))
    result = ExperimentResult("erasure")
    for name in series:
        for p in sorted(done):
            hits, n = done[p][name]
            result.add_proportion(name, p, hits, n)
    return result


def run_erasure_curve(method: str, scope: str, p_grid=DEFAULT_P_GRID, reps: int = 30, length: int = 8, **kw) -> ExperimentResult:
    """Single curve: ``method`` in {rlnc, repetition}, ``scope`` in {single, global}."""
    name = f"{method.lower()}-{scope.lower()}"
    if name not in (RLNC_SINGLE, RLNC_GLOBAL, REP_SINGLE):
        raise ValueError(f"unsupported combination {method}/{scope}")
    return run_erasure_benchmark(p_grid, reps, length, series=(name,), **kw)


# Truncation --------------------------------------------------------------------


@dataclass
class TruncationOutcome:
    trials: int
    successes: int
    received: list[int]

    @property
    def rate(self) -> float:
        return self.successes / self.trials


def truncation_trial(seed: int, trial: int, length: int, overhead: int, source: DistSourceSpec) -> tuple[bool, int]:
    """Embed, cut at the first prefix carrying >= L + overhead bits, decode."""
    rng = random.Random(trial_seed(seed, "trunc", trial))
    payload = PayloadMessage(rng.getrandbits(length), length)
    master = MasterKey(trial_bytes(seed, "trunc-key", trial))
    cfg = EmbedConfig(payload, master)
    horizon = length + overhead  # doubled until the prefix exists
    while True:
        steps = generate_trajectory(source, f"trunc{trial:05d}", horizon)
        caps: list[int] = []
        traj = embed_trajectory(steps, cfg, stats=caps)
        total, tau = 0, None
        for t, c in enumerate(caps, 1):
            total += c
            if total >= length + overhead:
                tau = t
                break
        if tau is not None:
            break
        horizon *= 2
    report = decode_trajectory(truncate(traj, tau), master, length)
    return _rlnc_ok(report, payload), report.total_bits


def run_truncation(trials: int = 1000, length: int = 64, overhead: int = 8, seed: int = 0,
                   source: DistSourceSpec | None = None) -> TruncationOutcome:
    source = source or DistSourceSpec(seed=seed)
    ok, received = 0, []
    for i in range(trials):
        hit, r = truncation_trial(seed, i, length, overhead, source)
        ok += hit
        received.append(r)
    return TruncationOutcome(trials, ok, received)


# Perturbation sensitivity ---------------------------------------------------------


def perturb(dist: BehaviorDistribution, noise: float, kind: str, rng: np.random.Generator) -> BehaviorDistribution:
    """Same candidates, shifted probabilities.

    ``temperature``: p' ~ p^(1 / (1 + noise)). ``dirichlet``: p' ~ Dir(p / noise).
    """
    p = np.asarray(dist.probs, dtype=float)
    if noise == 0:
        return dist
    if kind == "temperature":
        w = p ** (1.0 / (1.0 + noise))
    elif kind == "dirichlet":
        w = rng.dirichlet(np.maximum(p / noise, 1e-3))
        w = np.maximum(w, 1e-9)
    else:
        raise ValueError(f"unknown perturbation {kind!r}")
    w = w / w.sum()
    return BehaviorDistribution(dist.behaviors, w.tolist())


@dataclass
class PerturbationPoint:
    noise: float
    steps: int
    matches: int
    watermarked: int
    recovered: int
    mean_kl: float

    @property
    def match_rate(self) -> float:
        return self.matches / self.steps

    @property
    def bit_recovery(self) -> float:
        return self.recovered / self.watermarked if self.watermarked else 1.0


def run_perturbation_sensitivity(
    source: DistSourceSpec | None = None,
    noise_levels: Sequence[float] = (0.0, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0),
    length: int = 32,
    steps: int = 2000,
    kind: str = "temperature",
    seed: int = 0,
) -> tuple[ExperimentResult, list[PerturbationPoint]]:
    """Encode under P_t and P'_t with identical keys and payload bits.

    Match rate compares the two chosen behaviors; bit recovery decodes the
    behavior chosen under P_t using P'_t and compares channel bits, over
    steps that embedded at least one bit. Steps are teacher-forced (each is
    independent of the previous choice).
    """
    source = source or DistSourceSpec(seed=seed)
    master = MasterKey(trial_bytes(seed, "perturb-key"))
    base = []
    per_traj = max(1, source.horizon_max)
    for i in range(-(-steps // per_traj)):
        base.extend(generate_trajectory(source, f"perturb{i:04d}", per_traj))
    base = base[:steps]
    payload_rng = random.Random(trial_seed(seed, "perturb-bits"))
    payload_bits = [format(payload_rng.getrandbits(16), "016b") for _ in base]

    result = ExperimentResult("perturbation")
    points = []
    for level in noise_levels:
        rng = np.random.default_rng(trial_seed(seed, "perturb-noise", level))
        matches = watermarked = recovered = 0
        kls = []
        for (ctx, dist), bits in zip(base, payload_bits):
            shifted = perturb(dist, level, kind, rng)
            kls.append(kl_divergence(dist.probs, shifted.probs))
            a = encode_step(dist, ctx, master, RawBitSource(bits))
            b = encode_step(shifted, ctx, master, RawBitSource(bits))
            matches += a.behavior == b.behavior
            if a.embedded:
                watermarked += 1
                try:
                    got = decode_step(a.behavior, shifted, ctx, master)
                except BehaviorOutsideBin:
                    got = None
                recovered += got == a.embedded
        point = PerturbationPoint(level, len(base), matches, watermarked, recovered, float(np.mean(kls)))
        points.append(point)
        result.add_proportion("match_rate", level, matches, len(base))
        result.add_proportion("bit_recovery", level, recovered, watermarked)
        sem = float(np.std(kls, ddof=1) / math.sqrt(len(kls))) if len(kls) > 1 else 0.0
        result.rows.append(ResultRow("mean_kl", level, point.mean_kl,
                                     max(0.0, point.mean_kl - 1.96 * sem),
                                     point.mean_kl + 1.96 * sem, len(base)))
    return result, points


def monotonicity(points: Sequence[PerturbationPoint]) -> dict[str, tuple[float, float]]:
    """Spearman (rho, p) of match rate and bit recovery against mean KL."""
    kl = [p.mean_kl for p in points]
    out = {}
    for name, vals in (("match_rate", [p.match_rate for p in points]),
                       ("bit_recovery", [p.bit_recovery for p in points])):
        res = st.spearmanr(kl, vals)
        out[name] = (float(res.statistic), float(res.pvalue))
    return out
