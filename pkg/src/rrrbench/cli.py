"""Command line: run, score, bbv, perfplot, synth.

Exit status: 0 success and compliant, 1 ran but non-compliant, 2 usage or
configuration error, 3 execution failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .bbv import BBVParseError, distance_matrix, normalize_l1, parse_bb
from .executor import AffinityPolicy, ExecutionError, LogFormatError, RunLog, execute, read_runlog, write_runlog
from .metrics import ScoringError, energy_report, read_power_csv, rrr_metrics, score_suite
from .perfseries import SampleError, parse_samples, resample_to_instructions
from .plots import PlotError, perf_overlay_svg, recurrence_image, render_raw_report, timeplot_svg
from .scheduler import RRR, RRRParams, ScheduleError, make_homogeneous_schedule, make_rrr_schedule
from .suite import ConfigError, SuiteConfig, load_suite
from .synth import KINDS, synth_main

EXIT_OK, EXIT_NONCOMPLIANT, EXIT_USAGE, EXIT_EXEC = 0, 1, 2, 3

log = logging.getLogger("rrrbench")


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def emit_reports(runlog: RunLog, cfg: SuiteConfig, out: Path, power: Path | None = None) -> bool:
    """Write report, scores and plots for a log; returns the compliance flag."""
    score = score_suite(runlog, cfg)
    rrr = None
    if runlog.mode == RRR:
        rrr = rrr_metrics(runlog, cfg)
        (out / "rrr_slowdown.csv").write_text(rrr.slowdown_csv(), encoding="utf-8")
        (out / "rrr_metrics.json").write_text(rrr.to_json(), encoding="utf-8")
    energy = None
    if power is not None:
        energy = energy_report(read_power_csv(power), runlog, score, cfg)
    payload = score.to_dict()
    if energy is not None:
        payload["energy"] = vars(energy)
    (out / "scores.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    render_raw_report(score, None, rrr, out / "report.txt", host=runlog.host, params=runlog.params, energy=energy)
    timeplot_svg(runlog, out / "timeplot.svg")
    return score.compliant


# -- subcommands -----------------------------------------------------------


def cmd_run(args: argparse.Namespace) -> int:
    if args.mode == "rate" and (args.inc is not None or args.step is not None):
        raise UsageError("--inc/--step apply only to --mode rrr")
    cfg = load_suite(args.suite)
    if args.benchmarks:
        try:
            cfg = cfg.subset([b.strip() for b in args.benchmarks.split(",") if b.strip()])
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
    if args.mode == "rate":
        sched = make_homogeneous_schedule(cfg.N, args.copies)
    else:
        sched = make_rrr_schedule(cfg.N, args.copies, RRRParams(args.inc or 1, args.step or 1))
    affinity = AffinityPolicy()
    if args.pin:
        affinity = AffinityPolicy.pin(args.pin)
        try:
            affinity.check(args.copies)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "schedule.csv").write_text(sched.to_csv(cfg.ids), encoding="utf-8")
    runlog = execute(sched, cfg, args.iterations, affinity, out)
    write_runlog(runlog, out / "runlog.csv")
    compliant = emit_reports(runlog, cfg, out, args.power)
    print(f"{cfg.suite_name}: {args.mode} M={args.copies} R={args.iterations} -> {out}")
    return EXIT_OK if compliant else EXIT_NONCOMPLIANT


def cmd_score(args: argparse.Namespace) -> int:
    runlog = read_runlog(args.log)
    cfg = load_suite(args.suite)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    compliant = emit_reports(runlog, cfg, out, args.power)
    return EXIT_OK if compliant else EXIT_NONCOMPLIANT


def cmd_bbv(args: argparse.Namespace) -> int:
    trace = parse_bb(args.trace, args.interval)
    if not args.raw_counts:
        trace = normalize_l1(trace)
    D = distance_matrix(trace)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.trace).stem
    if args.format == "csv":
        (out / f"{stem}.csv").write_text(D.to_csv(), encoding="utf-8")
    else:
        recurrence_image(D, out / f"{stem}.{args.format}", args.format)
    return EXIT_OK


def cmd_perfplot(args: argparse.Namespace) -> int:
    series = resample_to_instructions(parse_samples(args.samples), args.interval)
    matrix = None
    if args.bbv:
        matrix = distance_matrix(normalize_l1(parse_bb(args.bbv, args.interval)))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    perf_overlay_svg(series, matrix, out / "overlay.svg", smooth=args.smooth)
    (out / "series.csv").write_text(series.to_csv(), encoding="utf-8")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    return synth_main(args.kind, args.units, args.out, args.mib)


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rrrbench", description="Rate / rolling round-robin benchmark harness.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="execute a suite in rate or rrr mode")
    r.add_argument("--suite", required=True, help="suite TOML file")
    r.add_argument("--mode", choices=["rate", "rrr"], default="rate", help="homogeneous rate or rolling round-robin")
    r.add_argument("--copies", type=_positive_int, default=1, help="number of concurrent copies M (default 1)")
    r.add_argument("--inc", type=_positive_int, default=None, help="rrr: per-copy start offset stride (default 1)")
    r.add_argument("--step", type=_positive_int, default=None, help="rrr: within-copy roster increment (default 1)")
    r.add_argument("--iterations", type=_positive_int, default=3, help="iterations R (default 3)")
    r.add_argument("--pin", type=_int_list, default=None, help="comma-separated logical core per copy")
    r.add_argument("--benchmarks", default=None, help="comma-separated subset of benchmark ids, in run order")
    r.add_argument("--power", type=Path, default=None, help="optional t_s,watts CSV on the harness clock")
    r.add_argument("--out", required=True, help="output directory")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("score", help="re-score a stored run log")
    s.add_argument("--log", required=True, help="runlog.csv (JSON sidecar alongside)")
    s.add_argument("--suite", required=True, help="suite TOML file")
    s.add_argument("--power", type=Path, default=None, help="optional t_s,watts CSV")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_score)

    b = sub.add_parser("bbv", help="BBV self-similarity matrix and recurrence image")
    b.add_argument("--trace", required=True, help="SimPoint-style .bb file")
    b.add_argument("--out", required=True, help="output directory")
    b.add_argument("--format", choices=["pgm", "svg", "csv"], default="pgm", help="output format (default pgm)")
    b.add_argument("--interval", type=_positive_int, default=10_000_000, help="instructions per interval")
    b.add_argument("--raw-counts", action="store_true", help="skip per-interval L1 normalization")
    b.set_defaults(func=cmd_bbv)

    pp = sub.add_parser("perfplot", help="top-down series on an instruction axis, optional BBV overlay")
    pp.add_argument("--samples", required=True, help="cumulative counter CSV")
    pp.add_argument("--interval", type=_positive_int, required=True, help="instructions per interval")
    pp.add_argument("--bbv", default=None, help="optional .bb trace to overlay")
    pp.add_argument("--smooth", type=_positive_int, default=1, help="moving-average width in intervals")
    pp.add_argument("--out", required=True, help="output directory")
    pp.set_defaults(func=cmd_perfplot)

    y = sub.add_parser("synth", help="run one synthetic benchmark kernel")
    y.add_argument("--kind", choices=KINDS, required=True)
    y.add_argument("--units", type=int, required=True, help="work units (> 0)")
    y.add_argument("--out", required=True, help="checksum output file")
    y.add_argument("--mib", type=_positive_int, default=16, help="stream buffer size in MiB")
    y.set_defaults(func=cmd_synth)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, ScheduleError, LogFormatError, ScoringError,
            BBVParseError, SampleError, PlotError) as exc:
        print(f"rrrbench {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ExecutionError as exc:
        print(f"rrrbench {args.command}: execution failed: {exc}", file=sys.stderr)
        return EXIT_EXEC
    except OSError as exc:
        print(f"rrrbench {args.command}: {exc}", file=sys.stderr)
        return EXIT_EXEC


if __name__ == "__main__":
    sys.exit(main())
