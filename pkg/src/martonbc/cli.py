"""Command-line front end.

Commands:
  sum-rate   inner/outer sum-rate bounds and their gap for one channel
  sweep      gap curve over a beta range of the binary channel family (CSV)
  verify     randomized identity/property suites
  reduce     W-support reduction of a joint distribution file

Exit codes: 0 success, 1 file/validation failure, 2 bad arguments.
CSV output uses LF line endings and 12 significant digits.  The
environment variable MB_THREADS caps worker parallelism for sweeps.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import channels
from .bounds import OptimizationConfig, marton_sum_rate, ne_outer_sum_rate
from .info_core import DistributionError, JointDistribution
from .reduction import reduce_w
from .verify import SUITES


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _vec(arr) -> str:
    return "[" + ", ".join(f"{v:.6g}" for v in np.asarray(arr).ravel()) + "]"


# --------------------------------------------------------------------------
# joint-distribution text files (axis header + flattened tensor)
# --------------------------------------------------------------------------

def load_joint(path: str) -> JointDistribution:
    """Read a joint from text: a header line of alternating axis names and
    sizes (e.g. ``U 2 V 2 W 10 X 2``), then the row-major tensor entries."""
    with open(path, encoding="utf-8") as fh:
        raw = fh.readlines()
    content: list[tuple[int, list[str]]] = []
    for i, line in enumerate(raw, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        content.append((i, stripped.split()))
    if not content:
        raise DistributionError(f"{path}: empty joint file")
    hd_line, header = content[0]
    if len(header) < 2 or len(header) % 2 != 0:
        raise DistributionError(
            f"{path}:{hd_line}: header must alternate axis names and sizes")
    axes = []
    for name, size_tok in zip(header[::2], header[1::2]):
        try:
            size = int(size_tok)
        except ValueError:
            raise DistributionError(
                f"{path}:{hd_line}: axis size {size_tok!r} is not an integer")
        if size < 1:
            raise DistributionError(f"{path}:{hd_line}: axis size must be >= 1")
        axes.append((name, size))
    expected = int(np.prod([s for _, s in axes]))
    values: list[float] = []
    for ln, tokens in content[1:]:
        for tok in tokens:
            try:
                values.append(float(tok))
            except ValueError:
                raise DistributionError(f"{path}:{ln}: non-numeric entry {tok!r}")
        if len(values) > expected:
            raise DistributionError(
                f"{path}:{ln}: too many entries (expected {expected})")
    if len(values) != expected:
        raise DistributionError(
            f"{path}: expected {expected} entries, found {len(values)}")
    arr = np.array(values).reshape([s for _, s in axes])
    if arr.min() < 0:
        raise DistributionError(f"{path}: negative probability {arr.min()}")
    if abs(arr.sum() - 1.0) > 1e-9:
        raise DistributionError(f"{path}: entries sum to {arr.sum()}, not 1")
    return JointDistribution(tuple(axes), arr / arr.sum())


def save_joint(joint: JointDistribution, path: str) -> None:
    header = " ".join(f"{n} {s}" for n, s in joint.axes)
    lead = joint.axes[0][1]
    chunks = joint.probs.reshape(lead, -1)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in chunks:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


# --------------------------------------------------------------------------
# shared helpers
# --------------------------------------------------------------------------

def _config_from(args: argparse.Namespace) -> OptimizationConfig:
    return OptimizationConfig(grid_points=args.grid_points, starts=args.starts,
                              seed=args.seed, tol=args.tol,
                              max_iters=args.max_iters)


def _add_config_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--grid-points", type=int, default=201)
    sub.add_argument("--starts", type=int, default=64)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--tol", type=float, default=1e-7)
    sub.add_argument("--max-iters", type=int, default=2000)


def _worker_count(rows: int) -> int:
    cap = os.environ.get("MB_THREADS")
    if cap is not None:
        workers = int(cap)
        if workers < 1:
            raise ValueError(f"MB_THREADS={cap} must be a positive integer")
    else:
        workers = os.cpu_count() or 1
    return max(1, min(workers, rows))


def _bound_pair(alpha: float, beta: float,
                cfg_fields: tuple) -> tuple[float, float]:
    channel = channels.binary_example(alpha, beta)
    cfg = OptimizationConfig(*cfg_fields)
    inner = marton_sum_rate(channel, cfg).value
    outer = ne_outer_sum_rate(channel, cfg).value
    return inner, outer


def _sweep_row(task: tuple) -> tuple[float, float, float]:
    alpha, beta, cfg_fields = task
    inner, outer = _bound_pair(alpha, beta, cfg_fields)
    return beta, inner, outer


def sweep_csv(alpha: float, betas, config: OptimizationConfig,
              workers: int | None = None) -> str:
    """The sweep as one CSV string (header + one row per beta)."""
    cfg_fields = (config.grid_points, config.starts, config.seed,
                  config.tol, config.max_iters)
    tasks = [(alpha, float(b), cfg_fields) for b in betas]
    n_workers = workers if workers is not None else _worker_count(len(tasks))
    if n_workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            rows = list(pool.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(t) for t in tasks]
    lines = ["beta,inner,outer,gap"]
    for beta, inner, outer in rows:
        lines.append(f"{_fmt(beta)},{_fmt(inner)},{_fmt(outer)},{_fmt(outer - inner)}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _cmd_sum_rate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    has_file = args.channel is not None
    has_pair = args.alpha is not None or args.beta is not None
    if has_file == (args.alpha is not None and args.beta is not None) or \
            (has_pair and (args.alpha is None or args.beta is None)):
        parser.error("provide exactly one channel source: --channel PATH "
                     "or both --alpha and --beta")
    try:
        if has_file:
            channel = channels.load(args.channel)
        else:
            if not (0.0 < args.alpha < 1.0 and 0.0 < args.beta < 1.0):
                parser.error("--alpha and --beta must lie strictly inside (0,1)")
            channel = channels.binary_example(args.alpha, args.beta)
    except (OSError, channels.ChannelFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    cfg = _config_from(args)
    report = channels.validate(channel)
    if not report.valid:
        print(f"error: invalid channel (row-sum residual {report.row_sum_residual:g})",
              file=sys.stderr)
        return 1
    inner = marton_sum_rate(channel, cfg)
    outer = ne_outer_sum_rate(channel, cfg)
    gap = outer.value - inner.value
    if args.format == "csv":
        print("inner,outer,gap")
        print(f"{_fmt(inner.value)},{_fmt(outer.value)},{_fmt(gap)}")
        return 0
    print(f"inner (Marton sum rate):      {_fmt(inner.value)}")
    print(f"outer (Nair-El Gamal):        {_fmt(outer.value)}")
    print(f"gap (outer - inner):          {_fmt(gap)}")
    winner = inner.witness["winner"]
    wres = inner.witness[winner]
    if winner == "term_a":
        print(f"inner witness: time-sharing term, gamma*={wres.witness['gamma']:.6g}, "
              f"p(w)={_vec(wres.witness['p_w'])}, "
              f"p(X=1|w)={_vec(wres.witness['p_x1_given_w'])}")
    else:
        print(f"inner witness: independent-auxiliaries term, map={wres.witness['map']}, "
              f"p(U=1)={wres.witness['p_u1']:.6g}, p(V=1)={wres.witness['p_v1']:.6g}")
    print(f"outer witness: p(x)={_vec(outer.witness['p_x'])}, "
          f"terms={_vec(outer.witness['terms'])}")
    if not report.strictly_positive:
        print("warning: channel violates the strict positivity hypothesis; "
              "the two-term inner formula is stated under that hypothesis")
    print(f"note: inner {inner.diagnostics['caveat']}")
    return 0


def _cmd_sweep(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.steps < 1:
        parser.error("--steps must be >= 1")
    if not (0.0 < args.alpha < 1.0):
        parser.error("--alpha must lie strictly inside (0,1)")
    if not (0.0 < args.beta_min <= args.beta_max < 1.0):
        parser.error("beta range must satisfy 0 < beta-min <= beta-max < 1")
    betas = np.linspace(args.beta_min, args.beta_max, args.steps)
    try:
        workers = _worker_count(len(betas))
    except ValueError as exc:
        parser.error(str(exc))
    csv = sweep_csv(args.alpha, betas, _config_from(args), workers)
    if args.out == "-":
        sys.stdout.write(csv)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(csv)
    return 0


def _cmd_verify(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.trials < 1:
        parser.error("--trials must be >= 1")
    suite = SUITES[args.suite]
    report = suite(args.trials, args.seed)
    for line in report.lines():
        print(line)
    return 0 if report.ok else 1


def _cmd_reduce(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    try:
        joint = load_joint(getattr(args, "in"))
        channel = channels.load(args.channel)
    except (OSError, DistributionError, channels.ChannelFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        outcome = reduce_w(joint, channel)
    except (DistributionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    save_joint(outcome.result, args.out)
    print(f"status: {outcome.status}")
    print(f"W support: {joint.support_size('W')} -> {outcome.support_sizes['W']}")
    print(f"{'quantity':<12} {'before':>18} {'after':>18} {'difference':>12}")
    for name, (before, after) in outcome.preserved.items():
        print(f"{name:<12} {before:>18.12f} {after:>18.12f} {after - before:>+12.3e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="martonbc",
        description="Inner/outer sum-rate bounds for two-receiver broadcast channels")
    subs = parser.add_subparsers(dest="command", required=True)

    p_sum = subs.add_parser("sum-rate", help="bounds and gap for one channel")
    p_sum.add_argument("--channel", help="channel file path")
    p_sum.add_argument("--alpha", type=float)
    p_sum.add_argument("--beta", type=float)
    p_sum.add_argument("--format", choices=("text", "csv"), default="text")
    _add_config_flags(p_sum)

    p_sweep = subs.add_parser("sweep", help="gap curve over a beta range (CSV)")
    p_sweep.add_argument("--alpha", type=float, required=True)
    p_sweep.add_argument("--beta-min", type=float, required=True)
    p_sweep.add_argument("--beta-max", type=float, required=True)
    p_sweep.add_argument("--steps", type=int, required=True)
    p_sweep.add_argument("--out", required=True, help="output path or - for stdout")
    _add_config_flags(p_sweep)

    p_verify = subs.add_parser("verify", help="randomized property suites")
    p_verify.add_argument("suite", choices=sorted(SUITES))
    p_verify.add_argument("--trials", type=int, required=True)
    p_verify.add_argument("--seed", type=int, default=0)

    p_reduce = subs.add_parser("reduce", help="support reductions")
    p_reduce.add_argument("axis", choices=("w",), help="axis to reduce")
    p_reduce.add_argument("--in", required=True, help="joint distribution file")
    p_reduce.add_argument("--channel", required=True, help="channel file")
    p_reduce.add_argument("--out", required=True, help="reduced joint output path")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"sum-rate": _cmd_sum_rate, "sweep": _cmd_sweep,
                "verify": _cmd_verify, "reduce": _cmd_reduce}
    return handlers[args.command](args, parser)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
