"""Scores, multi-copy statistics, multiprogram metrics and energy integration.

Conventions (echoed into every report header):

* ratio = copies * reference_time / selected_time (rate), reference / selected (single copy)
* selected_time is the median of the iteration times, the lower middle one for even counts
* copy statistics use the sample standard deviation (n - 1) and linearly
  interpolated quartiles
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .executor import RunEvent, RunLog
from .scheduler import HOMOGENEOUS
from .suite import SuiteConfig

CONVENTIONS = (
    "ratio = copies*ref/selected; selected = median of iterations (lower median for even R); "
    "stddev = sample (n-1); quartiles = linear interpolation"
)


EXHIBITION_LABEL = "exhibition — not a compliant score"


class ScoringError(ValueError):
    pass


# -- primitives ------------------------------------------------------------


def geomean(ratios: Sequence[float]) -> float:
    if len(ratios) == 0:
        raise ScoringError("geomean of an empty list")
    if any(not (r > 0) for r in ratios):
        raise ScoringError(f"geomean needs positive values, got {list(ratios)}")
    return math.exp(math.fsum(math.log(r) for r in ratios) / len(ratios))


def spec_ratio(ref_s: float, selected_s: float, copies: int = 1, mode: str = "rate") -> float:
    if ref_s <= 0 or selected_s <= 0 or copies < 1:
        raise ScoringError(f"spec_ratio needs positive inputs (ref={ref_s}, selected={selected_s}, copies={copies})")
    if mode == "speed":
        return ref_s / selected_s
    return copies * ref_s / selected_s


def lower_median(values: Sequence[float]) -> float:
    if not values:
        raise ScoringError("median of an empty list")
    s = sorted(values)
    return s[(len(s) - 1) // 2]


@dataclass(frozen=True)
class CopyStats:
    n: int
    min_s: float
    max_s: float
    mean_s: float
    stddev_s: float
    cv: float
    q1_s: float
    median_s: float
    q3_s: float


def copy_stats(times_s: Sequence[float]) -> CopyStats:
    x = np.asarray(times_s, dtype=float)
    if x.size == 0:
        raise ScoringError("copy_stats of an empty list")
    mean = float(x.mean())
    sd = float(x.std(ddof=1)) if x.size > 1 else 0.0
    q1, med, q3 = (float(v) for v in np.quantile(x, [0.25, 0.5, 0.75], method="linear"))
    return CopyStats(
        n=int(x.size),
        min_s=float(x.min()),
        max_s=float(x.max()),
        mean_s=mean,
        stddev_s=sd,
        cv=sd / mean if mean != 0 else 0.0,
        q1_s=q1,
        median_s=med,
        q3_s=q3,
    )


# -- log digestion ---------------------------------------------------------


@dataclass
class _Span:
    elapsed_ns: int = 0
    start_ns: int | None = None
    end_ns: int | None = None

    def add(self, e: RunEvent) -> None:
        self.elapsed_ns += e.end_ns - e.start_ns
        self.start_ns = e.start_ns if self.start_ns is None else min(self.start_ns, e.start_ns)
        self.end_ns = e.end_ns if self.end_ns is None else max(self.end_ns, e.end_ns)


def _spans(runlog: RunLog) -> dict[str, dict[int, dict[int, _Span]]]:
    """bench -> iteration -> copy -> summed workload time and covering window."""
    out: dict[str, dict[int, dict[int, _Span]]] = {}
    for e in runlog.events:
        out.setdefault(e.bench_id, {}).setdefault(e.iteration, {}).setdefault(e.copy, _Span()).add(e)
    return out


def _check_log(runlog: RunLog, cfg: SuiteConfig) -> dict[str, dict[int, dict[int, _Span]]]:
    known = set(cfg.ids)
    unknown = [b for b in runlog.roster if b not in known]
    if unknown:
        raise ScoringError(f"log roster has benchmarks unknown to the suite: {unknown}")
    spans = _spans(runlog)
    for b in runlog.roster:
        if b not in spans:
            raise ScoringError(f"benchmark {b!r} missing from log")
    stray = set(spans) - set(runlog.roster)
    if stray:
        raise ScoringError(f"log events for benchmarks outside its roster: {sorted(stray)}")
    return spans


# -- suite score -----------------------------------------------------------


@dataclass
class BenchmarkScore:
    bench_id: str
    iteration_times_s: list[float]
    selected_time_s: float
    ratio: float
    copy_times_s: list[float]
    stats: CopyStats
    complete: bool
    validated: bool


@dataclass
class SuiteScore:
    suite_name: str
    mode: str
    M: int
    R: int
    benchmarks: list[BenchmarkScore]
    overall: float
    compliant: bool
    issues: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "suite_name": self.suite_name,
            "mode": self.mode,
            "copies": self.M,
            "iterations": self.R,
            "conventions": CONVENTIONS,
            "overall_geomean": self.overall,
            "compliant": self.compliant,
            "issues": self.issues,
            "benchmarks": [asdict(b) for b in self.benchmarks],
        }


def score_suite(runlog: RunLog, cfg: SuiteConfig) -> SuiteScore:
    """Per-benchmark ratios and their geometric mean.

    Homogeneous logs time each iteration as the phase window (latest copy end
    minus earliest copy start).  RRR logs have no shared phases, so an
    iteration's time is the slowest copy's summed workload time.
    """
    spans = _check_log(runlog, cfg)
    M, R = runlog.M, runlog.iterations
    issues = list(runlog.warnings)
    scores = []
    for b in runlog.roster:
        bench = cfg.benchmark(b)
        per_it = spans[b]
        it_times = []
        for it in sorted(per_it):
            copies = per_it[it]
            if runlog.mode == HOMOGENEOUS:
                ns = max(s.end_ns for s in copies.values()) - min(s.start_ns for s in copies.values())
            else:
                ns = max(s.elapsed_ns for s in copies.values())
            it_times.append(ns / 1e9)
        selected = lower_median(it_times)
        if selected <= 0:
            raise ScoringError(f"benchmark {b!r} has zero elapsed time")
        copy_ids = sorted({c for copies in per_it.values() for c in copies})
        copy_times = [
            lower_median([per_it[it][c].elapsed_ns / 1e9 for it in per_it if c in per_it[it]])
            for c in copy_ids
        ]
        events = [e for e in runlog.events if e.bench_id == b]
        expected = M * R * len(bench.workloads)
        complete = len(events) == expected and len(per_it) == R
        validated = all(e.exit_ok and e.validation == "pass" for e in events)
        if not complete:
            issues.append(f"{b}: {len(events)} events, expected {expected}")
        if not validated:
            bad = sum(1 for e in events if not (e.exit_ok and e.validation == "pass"))
            issues.append(f"{b}: {bad} event(s) failed or did not validate")
        scores.append(
            BenchmarkScore(
                bench_id=b,
                iteration_times_s=it_times,
                selected_time_s=selected,
                ratio=spec_ratio(bench.reference_time_s, selected, M, "rate"),
                copy_times_s=copy_times,
                stats=copy_stats(copy_times),
                complete=complete,
                validated=validated,
            )
        )
    compliant = all(s.complete and s.validated for s in scores)
    return SuiteScore(
        suite_name=runlog.suite_name,
        mode=runlog.mode,
        M=M,
        R=R,
        benchmarks=scores,
        overall=geomean([s.ratio for s in scores]),
        compliant=compliant,
        issues=issues,
    )


# -- multiprogram (RRR) metrics -------------------------------------------


def multiprogram_aggregates(slowdowns: Sequence[float]) -> dict[str, float]:
    """ANTT, harmonic-mean speedup and min/max fairness of a set of slowdowns."""
    s = [float(v) for v in slowdowns]
    if not s or any(not (v > 0) for v in s):
        raise ScoringError("slowdowns must be a non-empty list of positive values")
    return {
        "antt": math.fsum(s) / len(s),
        "hmean_speedup": len(s) / math.fsum(s),
        "fairness": min(s) / max(s),
    }


@dataclass
class MultiprogramReport:
    roster: list[str]
    copies: list[int]
    slowdown: list[list[float]]  # [bench][copy]
    antt: float
    stp: float
    stp_per_rotation: list[float]
    hmean_speedup: float
    fairness: float
    label: str = EXHIBITION_LABEL

    def to_json(self) -> str:
        return json.dumps(
            {
                "label": self.label,
                "antt": self.antt,
                "stp": self.stp,
                "stp_per_rotation": self.stp_per_rotation,
                "hmean_speedup": self.hmean_speedup,
                "fairness": self.fairness,
                "definitions": {
                    "slowdown": "contended elapsed / solo_time_s (median over rotations)",
                    "antt": "mean slowdown",
                    "stp": "time-averaged sum of 1/slowdown over resident programs, per rotation, averaged",
                    "hmean_speedup": "harmonic mean of 1/slowdown",
                    "fairness": "min slowdown / max slowdown",
                },
            },
            indent=2,
            sort_keys=True,
        ) + "\n"

    def slowdown_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bench_id", *[f"copy{c}" for c in self.copies]])
        for b, row in zip(self.roster, self.slowdown):
            w.writerow([b, *[repr(v) for v in row]])
        return buf.getvalue()


def rrr_metrics(runlog: RunLog, cfg: SuiteConfig) -> MultiprogramReport:
    spans = _check_log(runlog, cfg)
    copies = sorted({e.copy for e in runlog.events})
    matrix = []
    for b in runlog.roster:
        solo = cfg.benchmark(b).solo_s
        row = []
        for c in copies:
            times = [spans[b][it][c].elapsed_ns for it in spans[b] if c in spans[b][it]]
            if not times:
                raise ScoringError(f"benchmark {b!r} never ran on copy {c}")
            t = lower_median(times) / 1e9
            if t <= 0:
                raise ScoringError(f"benchmark {b!r} on copy {c} has zero elapsed time")
            row.append(t / solo)
        matrix.append(row)
    agg = multiprogram_aggregates([v for row in matrix for v in row])

    # STP per rotation: integral over the rotation window of sum(1/s) for
    # resident programs, divided by the window length.
    stp_rot = []
    iterations = sorted({e.iteration for e in runlog.events})
    for it in iterations:
        window = [e for e in runlog.events if e.iteration == it]
        span_ns = max(e.end_ns for e in window) - min(e.start_ns for e in window)
        if span_ns <= 0:
            raise ScoringError(f"rotation {it} has zero span")
        acc = 0.0
        for b in runlog.roster:
            solo_ns = cfg.benchmark(b).solo_s * 1e9
            for c, sp in spans[b].get(it, {}).items():
                if sp.elapsed_ns <= 0:
                    raise ScoringError(f"benchmark {b!r} on copy {c} has zero elapsed time")
                s = sp.elapsed_ns / solo_ns
                acc += sp.elapsed_ns / s
        stp_rot.append(acc / span_ns)
    return MultiprogramReport(
        roster=list(runlog.roster),
        copies=copies,
        slowdown=matrix,
        antt=agg["antt"],
        stp=math.fsum(stp_rot) / len(stp_rot),
        stp_per_rotation=stp_rot,
        hmean_speedup=agg["hmean_speedup"],
        fairness=agg["fairness"],
    )


# -- energy ----------------------------------------------------------------


def integrate_energy(samples: Sequence[tuple[float, float]], span: tuple[float, float]) -> float:
    """Trapezoidal energy (J) of (seconds, watts) samples clipped to ``span``."""
    if len(samples) < 2:
        raise ScoringError("need at least two power samples")
    t = np.array([s[0] for s in samples], dtype=float)
    p = np.array([s[1] for s in samples], dtype=float)
    if np.any(np.diff(t) <= 0):
        raise ScoringError("power sample timestamps must be strictly increasing")
    t0, t1 = span
    if not (t[0] <= t0 <= t1 <= t[-1]):
        raise ScoringError(f"span {span} outside sampled range [{t[0]}, {t[-1]}]")
    inner = (t > t0) & (t < t1)
    ts = np.concatenate(([t0], t[inner], [t1]))
    ps = np.concatenate(([np.interp(t0, t, p)], p[inner], [np.interp(t1, t, p)]))
    return float(np.sum((ts[1:] - ts[:-1]) * (ps[1:] + ps[:-1]) / 2.0))


def read_power_csv(path: str | Path) -> list[tuple[float, float]]:
    """Read ``t_s,watts`` rows (header required)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    try:
        return [(float(r["t_s"]), float(r["watts"])) for r in rows]
    except (KeyError, ValueError) as exc:
        raise ScoringError(f"{path}: expected columns t_s,watts: {exc}") from None


@dataclass
class EnergyReport:
    energy_j: float
    energy_ratio: float | None
    perf_per_watt: float


def energy_report(samples: Sequence[tuple[float, float]], runlog: RunLog, score: SuiteScore,
                  cfg: SuiteConfig) -> EnergyReport:
    """Energy over the whole run span, idle tails included.

    Sample timestamps are seconds on the harness clock (event ``start_ns`` / 1e9).
    """
    t0 = min(e.start_ns for e in runlog.events) / 1e9
    t1 = max(e.end_ns for e in runlog.events) / 1e9
    joules = integrate_energy(samples, (t0, t1))
    refs = [cfg.benchmark(b).reference_energy_j for b in runlog.roster]
    ratio = None
    if joules > 0 and all(r is not None for r in refs):
        # reference energy covers one copy of one iteration
        ratio = runlog.iterations * runlog.M * math.fsum(refs) / joules
    watts = joules / (t1 - t0) if t1 > t0 else 0.0
    return EnergyReport(
        energy_j=joules,
        energy_ratio=ratio,
        perf_per_watt=score.overall / watts if watts > 0 else 0.0,
    )
