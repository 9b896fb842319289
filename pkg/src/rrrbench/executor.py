"""Run a schedule as real child processes and record a complete event log.

One worker thread per copy walks that copy's slot sequence.  Workers never
touch shared state; finished events are handed to the coordinator through a
queue, and only the coordinator builds the RunLog.  In homogeneous rate mode
the workers meet at a barrier after every (position, iteration) phase.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import platform
import queue
import shutil
import subprocess
import sys
import threading
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping

from .scheduler import HOMOGENEOUS, RRR, Schedule
from .suite import BenchmarkSpec, SuiteConfig, WorkloadSpec
from .validator import compare_outputs

log = logging.getLogger(__name__)

LOG_FORMAT = "rrrbench-runlog/1"
CSV_FIELDS = ["copy", "bench_id", "workload", "iteration", "start_ns", "end_ns", "exit_ok", "validation", "output_dir"]


class ExecutionError(RuntimeError):
    """The run could not be carried out (bad executable, staging failure)."""


class LogFormatError(ValueError):
    """A stored RunLog is malformed or truncated."""


@dataclass(frozen=True)
class RunEvent:
    copy: int
    bench_id: str
    workload: str
    iteration: int
    start_ns: int
    end_ns: int
    exit_ok: bool
    validation: str  # pass | fail | skipped
    output_dir: str = ""

    @property
    def elapsed_s(self) -> float:
        return (self.end_ns - self.start_ns) / 1e9


@dataclass
class RunLog:
    suite_name: str
    mode: str
    M: int
    iterations: int
    roster: list[str]
    events: list[RunEvent] = field(default_factory=list)
    host: dict[str, str] = field(default_factory=dict)
    params: dict[str, int] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def wall_span_ns(self) -> int:
        if not self.events:
            return 0
        return max(e.end_ns for e in self.events) - min(e.start_ns for e in self.events)


@dataclass(frozen=True)
class AffinityPolicy:
    kind: str = "none"  # none | pin
    core_of_copy: Mapping[int, int] | None = None

    @classmethod
    def pin(cls, cores: list[int]) -> AffinityPolicy:
        return cls("pin", {c: core for c, core in enumerate(cores)})

    def check(self, M: int) -> None:
        if self.kind == "none":
            return
        if self.kind != "pin":
            raise ValueError(f"unknown affinity kind {self.kind!r}")
        cores = self.core_of_copy or {}
        missing = [c for c in range(M) if c not in cores]
        if missing:
            raise ValueError(f"pin list does not cover copies {missing}")
        used = [cores[c] for c in range(M)]
        if len(set(used)) != len(used):
            raise ValueError(f"pin list repeats a core: {used}")


def host_metadata() -> dict[str, str]:
    uname = platform.uname()
    return {
        "os": f"{uname.system} {uname.release}",
        "machine": uname.machine,
        "cpu": platform.processor() or uname.machine,
        "logical_cpus": str(os.cpu_count()),
        "python": platform.python_version(),
    }


# -- command handling ------------------------------------------------------


def _substitute(token: str, copy: int, rundir: Path) -> str:
    return (
        token.replace("{python}", sys.executable)
        .replace("{copy}", str(copy))
        .replace("{rundir}", str(rundir))
    )


def build_command(bench: BenchmarkSpec, workload: WorkloadSpec, copy: int, rundir: Path) -> list[str]:
    return [_substitute(t, copy, rundir) for t in (*bench.command, *workload.args)]


def resolve_executable(exe: str) -> str | None:
    if os.sep in exe or (os.altsep and os.altsep in exe):
        return exe if os.path.isfile(exe) and os.access(exe, os.X_OK) else None
    return shutil.which(exe)


def stage(workload: WorkloadSpec, rundir: Path) -> None:
    if rundir.exists():
        shutil.rmtree(rundir)
    rundir.mkdir(parents=True)
    for src in workload.input_files:
        shutil.copy2(src, rundir / src.name)


def _corrupt(workload: WorkloadSpec, rundir: Path) -> None:
    for name, _ in workload.golden_outputs:
        target = rundir / name
        if target.exists():
            with open(target, "a", encoding="utf-8") as fh:
                fh.write("corrupted 1\n")


def run_one(
    copy: int,
    bench: BenchmarkSpec,
    workload: WorkloadSpec,
    dir: str | Path,
    iteration: int = 1,
    core: int | None = None,
    t0_ns: int = 0,
    fault: str | None = None,
) -> RunEvent:
    """Run one workload in an already staged directory and validate its outputs.

    The timed span covers spawn to reap only.  A spawn failure yields an
    event with ``exit_ok=False`` and validation ``skipped``.
    """
    rundir = Path(dir)
    cmd = build_command(bench, workload, copy, rundir)
    if fault == "crash":
        cmd = [sys.executable, "-c", "raise SystemExit(3)"]
    exit_ok = False
    with open(rundir / "stdout.txt", "wb") as out, open(rundir / "stderr.txt", "wb") as err:
        start = time.monotonic_ns()
        try:
            proc = subprocess.Popen(cmd, cwd=rundir, stdout=out, stderr=err, stdin=subprocess.DEVNULL)
        except OSError as exc:
            end = time.monotonic_ns()
            err.write(f"spawn failed: {exc}\n".encode())
            proc = None
        if proc is not None:
            if core is not None:
                try:
                    os.sched_setaffinity(proc.pid, {core})
                except (AttributeError, OSError) as exc:
                    log.warning("copy %d: could not pin pid %d to core %d: %s", copy, proc.pid, core, exc)
            rc = proc.wait()
            end = time.monotonic_ns()
            exit_ok = rc == 0
    if fault == "corrupt":
        _corrupt(workload, rundir)
    if exit_ok:
        report = compare_outputs(rundir, workload.golden_outputs, bench.validation)
        (rundir / "validation.json").write_text(report.to_json() + "\n", encoding="utf-8")
        validation = report.status
    else:
        validation = "skipped"
    return RunEvent(
        copy=copy,
        bench_id=bench.id,
        workload=workload.name,
        iteration=iteration,
        start_ns=start - t0_ns,
        end_ns=end - t0_ns,
        exit_ok=exit_ok,
        validation=validation,
        output_dir=str(rundir),
    )


# -- coordinator -----------------------------------------------------------

_DONE = object()


def execute(
    sched: Schedule,
    cfg: SuiteConfig,
    iterations: int = 3,
    affinity: AffinityPolicy | None = None,
    out_root: str | Path = "out",
    faults: Mapping[tuple[int, str], str] | None = None,
) -> RunLog:
    """Execute every slot of ``sched`` ``iterations`` times.

    Homogeneous mode runs position by position, each position ``iterations``
    times, with all copies meeting at a barrier after every phase.  RRR mode
    has each copy repeat its full rotation ``iterations`` times with no
    synchronisation.  ``faults`` maps (copy, bench_id) to "crash" or
    "corrupt" and exists for testing failure isolation.
    """
    if sched.N != cfg.N:
        raise ExecutionError(f"schedule has N={sched.N} but suite roster has {cfg.N} benchmarks")
    if iterations < 1:
        raise ExecutionError(f"iterations must be >= 1, got {iterations}")
    affinity = affinity or AffinityPolicy()
    affinity.check(sched.M)
    faults = dict(faults or {})
    out_root = Path(out_root)

    for bench in cfg.roster:
        for wl in bench.workloads:
            exe = build_command(bench, wl, 0, out_root)[0]
            if resolve_executable(exe) is None:
                raise ExecutionError(f"benchmark {bench.id!r}: executable not found: {exe}")

    warnings: list[str] = []
    cores: dict[int, int] = {}
    if affinity.kind == "pin":
        usable = os.sched_getaffinity(0) if hasattr(os, "sched_getaffinity") else set()
        wanted = dict(affinity.core_of_copy or {})
        if not hasattr(os, "sched_setaffinity"):
            warnings.append("affinity unsupported on this host; run proceeds unpinned")
        elif not set(wanted.values()) <= usable:
            bad = sorted(set(wanted.values()) - usable)
            warnings.append(f"cores {bad} unavailable (usable: {sorted(usable)}); run proceeds unpinned")
        else:
            cores = wanted
    for w in warnings:
        log.warning(w)

    try:
        (out_root / "run").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ExecutionError(f"cannot create {out_root}: {exc}") from None

    ids = cfg.ids
    R = iterations
    barrier = threading.Barrier(sched.M) if sched.mode == HOMOGENEOUS else None
    handoff: queue.Queue = queue.Queue()
    t0 = time.monotonic_ns()

    def slot(copy: int, bench_index: int, it: int) -> None:
        bench = cfg.roster[bench_index]
        for wl in bench.workloads:
            rundir = out_root / "run" / bench.id / wl.name / f"copy{copy:03d}.iter{it}"
            stage(wl, rundir)
            ev = run_one(copy, bench, wl, rundir, it, cores.get(copy), t0, faults.get((copy, bench.id)))
            handoff.put(ev)

    def worker(copy: int) -> None:
        seq = sched.sequence(copy)
        try:
            if sched.mode == HOMOGENEOUS:
                for b in seq:
                    for it in range(1, R + 1):
                        slot(copy, b, it)
                        barrier.wait()
            else:
                for it in range(1, R + 1):
                    for b in seq:
                        slot(copy, b, it)
        except threading.BrokenBarrierError:
            pass
        except Exception as exc:  # staging I/O and similar: abort the run
            if barrier is not None:
                barrier.abort()
            handoff.put(exc)
        finally:
            handoff.put(_DONE)

    threads = [threading.Thread(target=worker, args=(c,), name=f"copy{c}", daemon=True) for c in range(sched.M)]
    for t in threads:
        t.start()
    events: list[RunEvent] = []
    errors: list[BaseException] = []
    done = 0
    while done < sched.M:
        item = handoff.get()
        if item is _DONE:
            done += 1
        elif isinstance(item, BaseException):
            errors.append(item)
        else:
            events.append(item)
    for t in threads:
        t.join()
    if errors:
        raise ExecutionError(f"run aborted: {errors[0]}") from errors[0]

    events.sort(key=lambda e: (e.start_ns, e.copy))
    params = {"inc": sched.params.inc, "step": sched.params.step} if sched.mode == RRR and sched.params else {}
    return RunLog(
        suite_name=cfg.suite_name,
        mode=sched.mode,
        M=sched.M,
        iterations=R,
        roster=ids,
        events=events,
        host=host_metadata(),
        params=params,
        warnings=warnings,
    )


def check_barriers(runlog: RunLog) -> bool:
    """True if no homogeneous phase started before the previous one ended."""
    if runlog.mode != HOMOGENEOUS:
        return True
    pos = {b: i for i, b in enumerate(runlog.roster)}
    phases: dict[tuple[int, int], list[RunEvent]] = {}
    for e in runlog.events:
        phases.setdefault((pos[e.bench_id], e.iteration), []).append(e)
    order = sorted(phases)
    for a, b in zip(order, order[1:]):
        if max(e.end_ns for e in phases[a]) > min(e.start_ns for e in phases[b]):
            return False
    return True


# -- serialization ---------------------------------------------------------


def write_runlog(runlog: RunLog, csv_path: str | Path) -> Path:
    """Write the event CSV and a JSON sidecar (same stem, ``.json``)."""
    csv_path = Path(csv_path)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for e in runlog.events:
            row = asdict(e)
            row["exit_ok"] = int(e.exit_ok)
            w.writerow(row)
    meta = {
        "format": LOG_FORMAT,
        "suite_name": runlog.suite_name,
        "mode": runlog.mode,
        "copies": runlog.M,
        "iterations": runlog.iterations,
        "roster": runlog.roster,
        "params": runlog.params,
        "host": runlog.host,
        "warnings": runlog.warnings,
        "events": len(runlog.events),
    }
    sidecar = csv_path.with_suffix(".json")
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return sidecar


def read_runlog(csv_path: str | Path) -> RunLog:
    csv_path = Path(csv_path)
    sidecar = csv_path.with_suffix(".json")
    try:
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
        rows = list(csv.DictReader(open(csv_path, newline="", encoding="utf-8")))
    except (OSError, json.JSONDecodeError) as exc:
        raise LogFormatError(f"cannot read run log {csv_path}: {exc}") from None
    if meta.get("format") != LOG_FORMAT:
        raise LogFormatError(f"{sidecar}: unsupported format {meta.get('format')!r}")
    events = []
    for n, row in enumerate(rows, start=2):
        try:
            events.append(
                RunEvent(
                    copy=int(row["copy"]),
                    bench_id=row["bench_id"],
                    workload=row["workload"],
                    iteration=int(row["iteration"]),
                    start_ns=int(row["start_ns"]),
                    end_ns=int(row["end_ns"]),
                    exit_ok=row["exit_ok"] == "1",
                    validation=row["validation"],
                    output_dir=row.get("output_dir") or "",
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise LogFormatError(f"{csv_path}: malformed row {n}: {exc}") from None
        if events[-1].end_ns < events[-1].start_ns or events[-1].validation not in ("pass", "fail", "skipped"):
            raise LogFormatError(f"{csv_path}: invalid event at row {n}")
    if "events" in meta and meta["events"] != len(events):
        raise LogFormatError(f"{csv_path}: truncated, expected {meta['events']} events, found {len(events)}")
    keys = {(e.copy, e.bench_id, e.workload, e.iteration) for e in events}
    if len(keys) != len(events):
        raise LogFormatError(f"{csv_path}: duplicate (copy, bench, workload, iteration) events")
    return RunLog(
        suite_name=meta["suite_name"],
        mode=meta["mode"],
        M=int(meta["copies"]),
        iterations=int(meta["iterations"]),
        roster=list(meta["roster"]),
        events=events,
        host=dict(meta.get("host", {})),
        params=dict(meta.get("params", {})),
        warnings=list(meta.get("warnings", [])),
    )


def first_events(runlog: RunLog) -> dict[int, RunEvent]:
    """Earliest event of each copy."""
    out: dict[int, RunEvent] = {}
    for e in runlog.events:
        if e.copy not in out or e.start_ns < out[e.copy].start_ns:
            out[e.copy] = e
    return out
