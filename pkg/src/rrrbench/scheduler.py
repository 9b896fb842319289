"""Deterministic schedules for homogeneous rate and Rolling Round-Robin rate runs.

Both modes assign every copy every roster entry exactly once per pass.
Homogeneous rate runs the same benchmark on all copies at once, with a
barrier between positions.  RRR rotates each copy's start point by ``inc``
and lets copies drift apart freely.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

HOMOGENEOUS = "rate"
RRR = "rrr"


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class ScheduleSlot:
    copy: int
    seq: int
    bench_index: int


@dataclass(frozen=True)
class RRRParams:
    inc: int = 1
    step: int = 1

    def __post_init__(self) -> None:
        if self.inc < 1 or self.step < 1:
            raise ScheduleError(f"inc and step must be positive integers (inc={self.inc}, step={self.step})")


@dataclass(frozen=True)
class Schedule:
    mode: str
    M: int
    N: int
    slots: tuple[ScheduleSlot, ...]
    params: RRRParams | None = None

    @property
    def barriers(self) -> tuple[int, ...]:
        """Seq positions followed by a barrier (homogeneous mode only)."""
        if self.mode == HOMOGENEOUS:
            return tuple(range(self.N - 1))
        return ()

    def sequence(self, copy: int) -> list[int]:
        """Roster indices executed by ``copy`` in order."""
        return [s.bench_index for s in self.slots if s.copy == copy]

    def to_csv(self, ids: Sequence[str] | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["copy", "seq", "bench_id"])
        for s in self.slots:
            w.writerow([s.copy, s.seq, ids[s.bench_index] if ids is not None else s.bench_index])
        return buf.getvalue()


def _check_sizes(N: int, M: int) -> None:
    if N < 1 or M < 1:
        raise ScheduleError(f"roster size and copy count must be >= 1 (N={N}, M={M})")


def make_homogeneous_schedule(N: int, M: int) -> Schedule:
    _check_sizes(N, M)
    slots = tuple(ScheduleSlot(c, s, s) for c in range(M) for s in range(N))
    return Schedule(HOMOGENEOUS, M, N, slots)


def make_rrr_schedule(N: int, M: int, params: RRRParams | None = None) -> Schedule:
    """Copy ``c`` runs roster index ``(c*inc + s*step) mod N`` at position ``s``."""
    params = params or RRRParams()
    _check_sizes(N, M)
    if math.gcd(params.step, N) != 1:
        raise ScheduleError(
            f"step={params.step} shares a factor with N={N} (gcd={math.gcd(params.step, N)}); "
            f"each copy would visit only {N // math.gcd(params.step, N)} of {N} benchmarks"
        )
    slots = tuple(
        ScheduleSlot(c, s, (c * params.inc + s * params.step) % N)
        for c in range(M)
        for s in range(N)
    )
    return Schedule(RRR, M, N, slots, params)


def schedule_diversity(sched: Schedule) -> list[int]:
    """Number of distinct benchmarks running at each seq position across copies."""
    seen: list[set[int]] = [set() for _ in range(sched.N)]
    for s in sched.slots:
        seen[s.seq].add(s.bench_index)
    return [len(x) for x in seen]


def is_latin_rectangle(sched: Schedule) -> bool:
    if len(sched.slots) != sched.M * sched.N:
        return False
    full = set(range(sched.N))
    for c in range(sched.M):
        if sorted(sched.sequence(c)) != sorted(full):
            return False
    counts = Counter(s.bench_index for s in sched.slots)
    return all(counts[b] == sched.M for b in full)
