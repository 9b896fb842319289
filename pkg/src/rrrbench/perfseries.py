"""Counter-sample ingestion, top-down level-1 breakdowns, instruction-axis resampling.

Sample CSV (header required; one row per sample, cumulative counters)::

    instructions,cycles,slots_total,slots_retiring,slots_frontend,slots_badspec
    0,0,0,0,0,0
    1000000000,500000000,4000000000,...

``instructions`` and ``cycles`` are mandatory.  The four slot columns are
optional but must appear together.  Extra columns (e.g. a timestamp) are
ignored.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

SLOT_FIELDS = ("slots_total", "slots_retiring", "slots_frontend", "slots_badspec")


class SampleError(ValueError):
    pass


@dataclass(frozen=True)
class CounterSample:
    instructions: int
    cycles: int
    slots_total: int | None = None
    slots_retiring: int | None = None
    slots_frontend: int | None = None
    slots_badspec: int | None = None

    @property
    def has_slots(self) -> bool:
        return self.slots_total is not None


@dataclass(frozen=True)
class TopDownBreakdown:
    ipc: float
    frontend: float | None = None
    badspec: float | None = None
    retiring: float | None = None
    backend: float | None = None

    def clamped(self) -> TopDownBreakdown:
        c = lambda v: None if v is None else min(1.0, max(0.0, v))  # noqa: E731
        return TopDownBreakdown(self.ipc, c(self.frontend), c(self.badspec), c(self.retiring), c(self.backend))


@dataclass(frozen=True)
class AlignedSeries:
    interval_instructions: int
    start_instructions: int
    instructions: tuple[int, ...]  # per-interval deltas
    cycles: tuple[int, ...]
    breakdown: tuple[TopDownBreakdown, ...]
    has_topdown: bool

    def __len__(self) -> int:
        return len(self.breakdown)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["interval", "instructions", "cycles", "ipc", "frontend", "badspec", "retiring", "backend"])
        for i, (n, c, b) in enumerate(zip(self.instructions, self.cycles, self.breakdown)):
            fmt = lambda v: "" if v is None else f"{v:.6f}"  # noqa: E731
            w.writerow([i, n, c, f"{b.ipc:.6f}", fmt(b.frontend), fmt(b.badspec), fmt(b.retiring), fmt(b.backend)])
        return buf.getvalue()


def _as_count(raw: str, col: str, row: int) -> int:
    try:
        v = float(raw)
    except (TypeError, ValueError):
        raise SampleError(f"row {row}: column {col!r} is not a number: {raw!r}") from None
    if not math.isfinite(v) or v < 0 or v != int(v):
        raise SampleError(f"row {row}: column {col!r} must be a non-negative integer count, got {raw!r}")
    return int(v)


def parse_samples_text(text: str) -> list[CounterSample]:
    reader = csv.DictReader(io.StringIO(text))
    cols = set(reader.fieldnames or [])
    for need in ("instructions", "cycles"):
        if need not in cols:
            raise SampleError(f"missing mandatory column {need!r}")
    present = [f for f in SLOT_FIELDS if f in cols]
    if present and len(present) != len(SLOT_FIELDS):
        raise SampleError(f"slot columns must appear together; missing {sorted(set(SLOT_FIELDS) - set(present))}")
    slots = bool(present)
    out: list[CounterSample] = []
    for row_no, row in enumerate(reader, start=2):
        kw = {f: _as_count(row[f], f, row_no) for f in ("instructions", "cycles")}
        if slots:
            kw.update({f: _as_count(row[f], f, row_no) for f in SLOT_FIELDS})
        s = CounterSample(**kw)
        if slots and max(s.slots_retiring, s.slots_frontend, s.slots_badspec) > s.slots_total:
            raise SampleError(f"row {row_no}: slot category exceeds slots_total")
        if out:
            prev = out[-1]
            for f in kw:
                if getattr(s, f) < getattr(prev, f):
                    raise SampleError(f"row {row_no}: cumulative column {f!r} decreases")
        out.append(s)
    return out


def parse_samples(path: str | Path) -> list[CounterSample]:
    return parse_samples_text(Path(path).read_text(encoding="utf-8"))


def topdown_level1(
    d_instructions: float,
    d_cycles: float,
    d_total: float | None = None,
    d_retiring: float | None = None,
    d_frontend: float | None = None,
    d_badspec: float | None = None,
) -> TopDownBreakdown:
    """IPC and level-1 slot fractions of one window; backend is the residual."""
    if d_cycles <= 0:
        raise ValueError("cycle delta must be positive")
    ipc = d_instructions / d_cycles
    if d_total is None:
        return TopDownBreakdown(ipc)
    if d_total <= 0:
        raise ValueError("slots_total delta must be positive")
    fe = d_frontend / d_total
    bs = d_badspec / d_total
    ret = d_retiring / d_total
    return TopDownBreakdown(ipc, fe, bs, ret, 1.0 - fe - bs - ret)


def _interp_int(x: int, xs: Sequence[int], ys: Sequence[int]) -> int:
    """Cumulative counter value at instruction count ``x`` (linear, rounded)."""
    j = int(np.searchsorted(xs, x, side="left"))
    if j < len(xs) and xs[j] == x:
        # plateaus in instructions: take the last sample at this x
        while j + 1 < len(xs) and xs[j + 1] == x:
            j += 1
        return ys[j]
    x0, x1, y0, y1 = xs[j - 1], xs[j], ys[j - 1], ys[j]
    # exact rational interpolation, rounded half-up
    num = (y1 - y0) * (x - x0)
    den = x1 - x0
    return y0 + (2 * num + den) // (2 * den)


def resample_to_instructions(samples: Sequence[CounterSample], interval_instructions: int) -> AlignedSeries:
    """Cut the stream at multiples of ``interval_instructions`` past the first sample.

    Cumulative counters are interpolated linearly at the boundaries and kept
    as integers, so per-interval deltas sum exactly to the stream totals.
    The final interval may be short.
    """
    if len(samples) < 2:
        raise SampleError("need at least two samples")
    if interval_instructions <= 0:
        raise SampleError("interval must be positive")
    xs = [s.instructions for s in samples]
    first, last = xs[0], xs[-1]
    total = last - first
    if total <= 0:
        raise SampleError("instruction count does not advance")
    K = -(-total // interval_instructions)  # ceil
    bounds = [first + k * interval_instructions for k in range(K)] + [last]
    fields = ["cycles"] + (list(SLOT_FIELDS) if samples[0].has_slots else [])
    cum = {}
    for f in fields:
        ys = [getattr(s, f) for s in samples]
        cum[f] = [ys[0]] + [_interp_int(b, xs, ys) for b in bounds[1:-1]] + [ys[-1]]
    d = {f: [cum[f][k + 1] - cum[f][k] for k in range(K)] for f in fields}
    d_instr = [bounds[k + 1] - bounds[k] for k in range(K)]
    breakdown = []
    for k in range(K):
        try:
            if samples[0].has_slots:
                b = topdown_level1(d_instr[k], d["cycles"][k], d["slots_total"][k], d["slots_retiring"][k],
                                   d["slots_frontend"][k], d["slots_badspec"][k])
            else:
                b = topdown_level1(d_instr[k], d["cycles"][k])
        except ValueError as exc:
            raise SampleError(f"interval {k}: {exc}") from None
        breakdown.append(b)
    return AlignedSeries(
        interval_instructions=interval_instructions,
        start_instructions=first,
        instructions=tuple(d_instr),
        cycles=tuple(d["cycles"]),
        breakdown=tuple(breakdown),
        has_topdown=samples[0].has_slots,
    )


def moving_average(values: Sequence[float], width: int) -> list[float]:
    """Centered moving average; ``width`` <= 1 returns the input unchanged."""
    if width <= 1:
        return list(values)
    half = width // 2
    out = []
    for i in range(len(values)):
        window = values[max(0, i - half): i + half + 1]
        out.append(math.fsum(window) / len(window))
    return out
