"""Basic-block-vector traces and their interval self-similarity matrix.

Input is the SimPoint/Valgrind frequency-vector text format, one interval
per line::

    T:45:1024 :189:99 :7:3

i.e. a leading ``T`` followed by ``:<block-id>:<count>`` groups.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

DEFAULT_INTERVAL = 10_000_000
_GROUP = re.compile(r":(\d+):(\d+)")


class BBVParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None) -> None:
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


@dataclass(frozen=True)
class BBVector:
    counts: dict[int, float]
    interval_instructions: int = DEFAULT_INTERVAL

    def total(self) -> float:
        return sum(self.counts.values())


@dataclass(frozen=True)
class BBVTrace:
    vectors: tuple[BBVector, ...]
    source: str = ""
    normalized: bool = False

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def interval_instructions(self) -> int:
        return self.vectors[0].interval_instructions


@dataclass(frozen=True)
class DistanceMatrix:
    values: np.ndarray = field(repr=False)
    normalization: str = "raw"  # raw | unit-max

    @property
    def T(self) -> int:
        return self.values.shape[0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for row in self.values:
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def parse_bb_text(text: str, source: str = "", interval_instructions: int = DEFAULT_INTERVAL) -> BBVTrace:
    vectors = []
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not line.startswith("T"):
            raise BBVParseError(f"expected a line starting with 'T', got {raw!r}", n)
        counts: dict[int, float] = {}
        for tok in line[1:].split():
            m = _GROUP.fullmatch(tok)
            if m is None:
                raise BBVParseError(f"malformed group {tok!r} (want :<block-id>:<count>, non-negative)", n)
            block, count = int(m.group(1)), int(m.group(2))
            if block in counts:
                raise BBVParseError(f"block id {block} repeated", n)
            counts[block] = count
        if not any(counts.values()):
            raise BBVParseError("interval has no nonzero counts", n)
        vectors.append(BBVector(counts, interval_instructions))
    if not vectors:
        raise BBVParseError("empty trace")
    return BBVTrace(tuple(vectors), source)


def parse_bb(path: str | Path, interval_instructions: int = DEFAULT_INTERVAL) -> BBVTrace:
    path = Path(path)
    return parse_bb_text(path.read_text(encoding="utf-8"), str(path), interval_instructions)


def normalize_l1(trace: BBVTrace) -> BBVTrace:
    out = []
    for i, v in enumerate(trace.vectors):
        total = v.total()
        if total <= 0:
            raise ValueError(f"interval {i} has zero total count")
        out.append(replace(v, counts={k: c / total for k, c in v.counts.items()}))
    return replace(trace, vectors=tuple(out), normalized=True)


def _columns(trace: BBVTrace) -> np.ndarray:
    keys = sorted({k for v in trace.vectors for k in v.counts})
    col = {k: i for i, k in enumerate(keys)}
    X = np.zeros((len(trace), len(keys)))
    for r, v in enumerate(trace.vectors):
        for k, c in v.counts.items():
            X[r, col[k]] = c
    return X


def distance_matrix(trace: BBVTrace) -> DistanceMatrix:
    """Pairwise Euclidean distances over the union of block ids.

    Row differences are taken directly rather than via the Gram identity, so
    identical intervals come out exactly 0.
    """
    X = _columns(trace)
    T = X.shape[0]
    D = np.zeros((T, T))
    for i in range(T - 1):
        d = np.sqrt(np.einsum("ij,ij->i", X[i + 1:] - X[i], X[i + 1:] - X[i]))
        D[i, i + 1:] = d
        D[i + 1:, i] = d
    return DistanceMatrix(D, "raw")


def to_unit_max(D: DistanceMatrix) -> DistanceMatrix:
    peak = float(D.values.max()) if D.values.size else 0.0
    if peak <= 0:
        return replace(D, normalization="unit-max")
    return DistanceMatrix(D.values / peak, "unit-max")


def write_bb(trace: BBVTrace, path: str | Path) -> None:
    lines = []
    for v in trace.vectors:
        lines.append("T" + " ".join(f":{k}:{int(c)}" for k, c in v.counts.items()))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
