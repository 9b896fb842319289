"""Builders shared by the test modules."""

from __future__ import annotations

from pathlib import Path

from rrrbench.executor import RunEvent, RunLog
from rrrbench.scheduler import HOMOGENEOUS, Schedule
from rrrbench.synth import render_output, run_kernel
from rrrbench.suite import BenchmarkSpec, SuiteConfig, ToleranceRule, WorkloadSpec


def suite_toml(tmp: Path, benches: list[tuple[str, str, int]], name: str = "t") -> Path:
    """Write a synth-backed suite; ``benches`` holds (id, kind, units)."""
    (tmp / "golden").mkdir(parents=True, exist_ok=True)
    parts = [f'suite_name = "{name}"\n']
    for bid, kind, units in benches:
        golden = tmp / "golden" / f"{bid}.out"
        golden.write_text(render_output(run_kernel(kind, units, 1)), encoding="utf-8")
        parts.append(
            f"""
[[benchmark]]
id = "{bid}"
command = ["{{python}}", "-m", "rrrbench", "synth"]
reference_time_s = 1.0
solo_time_s = 0.1

[benchmark.validation]
mode = "exact"

[[benchmark.workload]]
name = "ref"
args = ["--kind", "{kind}", "--units", "{units}", "--out", "out.txt", "--mib", "1"]
golden_outputs = [{{ file = "out.txt", path = "golden/{bid}.out" }}]
"""
        )
    path = tmp / "suite.toml"
    path.write_text("".join(parts), encoding="utf-8")
    return path


def plain_suite(ids: list[str], refs: list[float] | None = None, solos: list[float] | None = None) -> SuiteConfig:
    """In-memory suite for metric tests (no files behind it)."""
    refs = refs or [1.0] * len(ids)
    roster = []
    for i, b in enumerate(ids):
        roster.append(
            BenchmarkSpec(
                id=b,
                command=("true",),
                workloads=(WorkloadSpec("ref"),),
                reference_time_s=refs[i],
                solo_time_s=solos[i] if solos else None,
                validation=ToleranceRule(),
            )
        )
    return SuiteConfig("plain", tuple(roster))


def log_from_schedule(sched: Schedule, ids: list[str], duration_s, R: int = 1, gap_ns: int = 0) -> RunLog:
    """Simulate a run: ``duration_s(bench_id, copy, iteration)`` gives each event's length.

    Homogeneous phases start together once the previous phase is done; RRR
    copies run back to back.
    """
    events = []
    if sched.mode == HOMOGENEOUS:
        t = 0
        for s in range(sched.N):
            for it in range(1, R + 1):
                ends = []
                for c in range(sched.M):
                    b = ids[sched.sequence(c)[s]]
                    d = int(round(duration_s(b, c, it) * 1e9))
                    events.append(RunEvent(c, b, "ref", it, t, t + d, True, "pass"))
                    ends.append(t + d)
                t = max(ends) + gap_ns
    else:
        for c in range(sched.M):
            t = 0
            for it in range(1, R + 1):
                for bi in sched.sequence(c):
                    b = ids[bi]
                    d = int(round(duration_s(b, c, it) * 1e9))
                    events.append(RunEvent(c, b, "ref", it, t, t + d, True, "pass"))
                    t += d + gap_ns
    events.sort(key=lambda e: (e.start_ns, e.copy))
    params = {"inc": sched.params.inc, "step": sched.params.step} if sched.params else {}
    return RunLog("plain", sched.mode, sched.M, R, list(ids), events, {"os": "test"}, params)
