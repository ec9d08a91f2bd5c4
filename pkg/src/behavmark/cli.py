"""Command-line interface.

Exit codes: 0 success/accept, 1 verification reject, 2 usage error,
3 I/O or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .erasure import PayloadMessage
from .errors import InvariantViolation, ParseError
from .harness import experiments as ex
from .harness.sources import DistSourceSpec, generate_trajectories, read_dist_stream
from .harness.stats import trial_bytes, trial_seed
from .keyed import MasterKey, load_key, save_key
from .pipeline import (
    EmbedConfig,
    Mode,
    capacity_summary,
    decode_raw,
    embed_trajectory,
    global_decode,
    verify_claim,
)
from .trajectory import Trajectory, erase, read_logs, truncate, write_logs

EXIT_OK, EXIT_REJECT, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def parse_grid(text: str, cast=float) -> list:
    """``a:b`` (inclusive integer range), ``a:b:step`` or ``x,y,z``."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise UsageError(f"bad grid {text!r}")
        start, stop = float(parts[0]), float(parts[1])
        step = float(parts[2]) if len(parts) == 3 else 1.0
        if step <= 0:
            raise UsageError("grid step must be positive")
        vals, i = [], 0
        while start + i * step <= stop + 1e-9:
            vals.append(round(start + i * step, 9))
            i += 1
        return [cast(v) for v in vals]
    return [cast(v) for v in text.split(",") if v.strip()]


def _payload(args) -> PayloadMessage:
    if args.payload_hex is None:
        raise UsageError("--payload-hex is required")
    try:
        return PayloadMessage.from_hex(args.payload_hex, args.payload_bits)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _key(args) -> MasterKey:
    if args.key is None:
        raise UsageError("--key is required")
    try:
        return load_key(args.key)
    except ValueError as e:
        raise ParseError(f"{args.key}: {e}") from None


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# commands -------------------------------------------------------------------


def cmd_keygen(args) -> int:
    key = MasterKey(trial_bytes(args.seed, "keygen")) if args.seed is not None else MasterKey.generate()
    if args.out is None:
        print(key.hex())
    else:
        save_key(key, args.out)
    return EXIT_OK


def cmd_embed(args) -> int:
    master = _key(args)
    payload = _payload(args)
    cfg = EmbedConfig(payload, master, Mode(args.mode))
    if args.dist is not None:
        streams = list(read_dist_stream(args.dist).values())
    else:
        spec = DistSourceSpec(kind=args.source, n_min=args.n_min, n_max=args.n_max,
                              horizon_min=args.horizon, horizon_max=args.horizon, seed=args.seed)
        streams = generate_trajectories(spec, args.trajectories)
    trajs = [embed_trajectory(steps, cfg) for steps in streams]
    if args.out is None:
        raise UsageError("--out is required")
    write_logs(trajs, args.out)
    summary = capacity_summary(trajs, master)
    print(f"trajectories={summary['trajectories']} steps={summary['steps']} bits={summary['bits']} "
          f"bits/step={summary['bits_per_step']:.3f} bits/task={summary['bits_per_task']:.2f}")
    return EXIT_OK


def _load(args) -> list[Trajectory]:
    if args.log is None:
        raise UsageError("--log is required")
    return read_logs(args.log)


def cmd_decode(args) -> int:
    master = _key(args)
    trajs = _load(args)
    if args.mode == Mode.RAW.value:
        reports = []
        for t in trajs:
            got = decode_raw(t, master)
            reports.append({"trajectory_id": t.trajectory_id,
                            "payload_bits": got.length if got else None,
                            "payload_hex": got.hex() if got else None})
        _write(_dump_json(reports), args.out)
        return EXIT_OK
    if args.payload_bits is None:
        raise UsageError("--payload-bits is required for rlnc decoding")
    if args.global_decode:
        reports = [dict(global_decode(trajs, master, args.payload_bits).to_dict(), scope="global")]
    else:
        reports = [dict(global_decode([t], master, args.payload_bits).to_dict(), trajectory_id=t.trajectory_id)
                   for t in trajs]
    _write(_dump_json(reports), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    master = _key(args)
    claimed = _payload(args)
    trajs = _load(args)
    groups = [trajs] if args.global_decode else [[t] for t in trajs]
    results, ok = [], True
    for g in groups:
        verdict, report = verify_claim(g, master, claimed)
        ok &= verdict.value == "ACCEPT"
        results.append(dict(report.to_dict(), verdict=verdict.value,
                            trajectory_id=g[0].trajectory_id if len(g) == 1 else None))
    _write(_dump_json(results), args.out)
    return EXIT_OK if ok and results else EXIT_REJECT


def cmd_erase(args) -> int:
    if args.erasure_p is None:
        raise UsageError("--erasure-p is required")
    trajs = _load(args)
    out = [erase(t, args.erasure_p, trial_seed(args.seed, "erase", t.trajectory_id)) for t in trajs]
    if args.out is None:
        raise UsageError("--out is required")
    write_logs(out, args.out)
    return EXIT_OK


def cmd_truncate(args) -> int:
    if args.truncate is None:
        raise UsageError("--truncate is required")
    trajs = _load(args)
    if args.out is None:
        raise UsageError("--out is required")
    write_logs([truncate(t, args.truncate) for t in trajs], args.out)
    return EXIT_OK


def cmd_fpr(args) -> int:
    grid = parse_grid(args.grid or "0:16", int)
    res = ex.run_fpr(grid, args.trials or 1000, args.payload_bits or 128, args.seed)
    _write(res.to_csv(), args.out)
    return EXIT_OK


def cmd_erasure_bench(args) -> int:
    grid = parse_grid(args.grid) if args.grid else ex.DEFAULT_P_GRID
    res = ex.run_erasure_benchmark(grid, reps=args.trials or 30, length=args.payload_bits or 8,
                                   n_traj=args.trajectories, horizon=args.horizon, seed=args.seed)
    _write(res.to_csv(), args.out)
    return EXIT_OK


def cmd_marginal(args) -> int:
    from .recombination import BehaviorDistribution

    samples = args.trials or 200_000
    if args.source == "example":
        dists = [BehaviorDistribution(EXAMPLE_BEHAVIORS, EXAMPLE_PROBS)]
    else:
        dists = DistSourceSpec(kind=args.source, seed=args.seed)
    res, outcomes = ex.run_marginal_test(dists, samples, args.seed, count=args.count)
    _write(res.to_csv(), args.out)
    for i, o in enumerate(outcomes):
        print(f"d{i}: tv={o.tv:.5f} chi2_p={o.chi2_p:.4f}", file=sys.stderr)
    return EXIT_OK


def cmd_perturb(args) -> int:
    levels = parse_grid(args.grid) if args.grid else (0.0, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0)
    res, points = ex.run_perturbation_sensitivity(
        DistSourceSpec(seed=args.seed), levels, length=args.payload_bits or 32,
        steps=args.trials or 2000, kind=args.noise_kind, seed=args.seed)
    _write(res.to_csv(), args.out)
    return EXIT_OK


EXAMPLE_BEHAVIORS = ("Search", "Book", "Pay", "Check-in", "Modify")
EXAMPLE_PROBS = (0.40, 0.25, 0.15, 0.12, 0.08)


def example_transcript() -> tuple[list[str], list[tuple[str, object, object]]]:
    """Run the ticket-purchase step with injected draws.

    Returns transcript lines and ``(name, got, expected)`` checks.
    """
    from .cyclic import BinCode, draw_shift
    from .keyed import ScriptedStream, StepContext, StepStreams
    from .recombination import BehaviorDistribution, canonical_order, diff_recombine, quantize, slice_heights, SCALE
    from .step import RawBitSource, decode_step, encode_step, sample_bin, unmask, xor_bits

    def units(xs):
        return tuple(round(x / SCALE, 6) for x in xs)

    u_bin, u_shift, pad, raw = 0.62, 0.27, "11", "01"
    dist = BehaviorDistribution(EXAMPLE_BEHAVIORS, EXAMPLE_PROBS)
    ordered = canonical_order(quantize(dist))
    decomp = diff_recombine(ordered)
    d = units(slice_heights(ordered))
    q = units(q for _, q in decomp.bins)
    cum, acc = [], 0
    for _, w in decomp.bins:
        acc += w
        cum.append(round(acc / SCALE, 6))
    K = sample_bin(decomp, ScriptedStream([u_bin]))
    R = draw_shift(K, ScriptedStream([u_shift]))
    code = BinCode(K)
    masked = xor_bits(raw, pad)
    x = int(masked[: code.k], 2)

    def streams():
        return StepStreams(ScriptedStream([u_bin]), ScriptedStream([u_shift]), ScriptedStream(bits=pad), ScriptedStream())

    ctx = StepContext(b"ticket", 7, b"User: book a ticket.")
    dummy = MasterKey(bytes(32))  # unused: every draw is scripted
    out = encode_step(dist, ctx, dummy, RawBitSource(raw), streams())
    dec_streams = streams()
    s = decode_step(out.behavior, dist, ctx, dummy, dec_streams)
    recovered = unmask(s, streams=dec_streams)

    checks = [
        ("order", tuple(ordered.behaviors), EXAMPLE_BEHAVIORS),
        ("d", d, (0.15, 0.10, 0.03, 0.04, 0.08)),
        ("q", q, (0.15, 0.20, 0.09, 0.16, 0.40)),
        ("cumulative", tuple(cum), (0.15, 0.35, 0.44, 0.60, 1.00)),
        ("K", K, 5),
        ("R", R, 1),
        ("k", code.k, 2),
        ("masked", masked, "10"),
        ("x", x, 2),
        ("j", out.index, 3),
        ("behavior", out.behavior, "Check-in"),
        ("s", out.embedded, "10"),
        ("decoded s", s, "10"),
        ("unmasked", recovered, "01"),
    ]
    lines = [
        "one-step example: ticket purchase, t=7",
        f"P = {dict(zip(EXAMPLE_BEHAVIORS, EXAMPLE_PROBS))}",
        f"canonical order = {list(ordered.behaviors)}",
        f"slice heights d = {d}",
        f"bin weights q = {q}",
        f"cumulative = {tuple(cum)}",
        f"u_bin = {u_bin} -> bin K = {K}, T_K = {list(decomp.members(K))}",
        f"pad Z[1:2] = {pad}; payload bits {raw} -> masked {masked}",
        f"u_shift = {u_shift} -> R = floor({u_shift}*{K}) = {R}",
        f"k = {code.k}, surplus = {code.surplus}, x = bits2int({masked[:code.k]}) = {x} < {code.n_short}",
        f"j = (x + R) mod {K} = {out.index}",
        f"behavior = T_{K}[{out.index}] = {out.behavior}, s = {out.embedded}",
        f"decode: s = {s}, unmasked = {s} xor {pad} = {recovered}",
    ]
    return lines, checks


def cmd_example(args) -> int:
    lines, checks = example_transcript()
    failed = 0
    for name, got, want in checks:
        ok = got == want
        failed += not ok
        lines.append(f"[{'ok' if ok else 'MISMATCH'}] {name}: {got!r}" + ("" if ok else f" (expected {want!r})"))
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK if not failed else EXIT_REJECT


# parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--key", help="key file: 64 hex characters on one line")
    common.add_argument("--payload-hex", help="payload as hex (length must match --payload-bits)")
    common.add_argument("--payload-bits", type=int, help="payload length L in bits")
    common.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.RATELESS.value,
                        help="raw: framed bitstring; rlnc: rateless GF(2) equations (default: rlnc)")
    common.add_argument("--seed", type=int, default=0, help="64-bit experiment / channel seed (default: 0)")
    common.add_argument("--log", help="input trajectory log (JSONL)")
    common.add_argument("--out", help="output path (default: stdout where applicable)")
    common.add_argument("--grid", help="grid: a:b, a:b:step or comma list")
    common.add_argument("--trials", type=int, help="trials / samples / reps per grid point")
    common.add_argument("--global", dest="global_decode", action="store_true",
                        help="pool equations across all trajectories in the log")

    p = argparse.ArgumentParser(prog="behavmark", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        return sp

    # an unseeded keygen must draw from the OS, not fall back to seed 0
    add("keygen", cmd_keygen, "write a new master key (deterministic with --seed)").set_defaults(seed=None)
    sp = add("embed", cmd_embed, "watermark a distribution stream into a trajectory log")
    sp.add_argument("--dist", help="JSONL distribution stream (else a synthetic source is used)")
    sp.add_argument("--source", choices=["dirichlet", "peaked"], default="dirichlet")
    sp.add_argument("--trajectories", type=int, default=1)
    sp.add_argument("--horizon", type=int, default=25)
    sp.add_argument("--n-min", type=int, default=4)
    sp.add_argument("--n-max", type=int, default=12)
    add("decode", cmd_decode, "decode payloads and print verification reports (JSON)")
    add("verify", cmd_verify, "check a claimed payload; exit 0 only on a unique matching decode")
    sp = add("erase", cmd_erase, "drop each step independently with probability p")
    sp.add_argument("--erasure-p", type=float)
    sp = add("truncate", cmd_truncate, "keep steps with t <= tau")
    sp.add_argument("--truncate", type=int)
    add("fpr", cmd_fpr, "false-positive rate vs equation overhead k (CSV)")
    sp = add("erasure-bench", cmd_erasure_bench, "decode success vs erasure probability (CSV)")
    sp.add_argument("--trajectories", type=int, default=25)
    sp.add_argument("--horizon", type=int, default=25)
    sp = add("marginal", cmd_marginal, "empirical behavior frequencies vs P (CSV)")
    sp.add_argument("--source", choices=["example", "dirichlet", "peaked"], default="example")
    sp.add_argument("--count", type=int, default=3, help="distributions drawn from a synthetic source")
    sp = add("perturb", cmd_perturb, "sensitivity to perturbed distributions (CSV)")
    sp.add_argument("--noise-kind", choices=["temperature", "dirichlet"], default="temperature")
    add("example", cmd_example, "annotated one-step worked example with fixed draws")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParseError, InvariantViolation) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
