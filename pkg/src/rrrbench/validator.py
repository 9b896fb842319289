"""Golden-output comparison under exact or numeric tolerance rules."""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .suite import ToleranceRule

# Decimal or scientific literal; deliberately excludes inf/nan spellings.
_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


@dataclass(frozen=True)
class Mismatch:
    file: str
    line: int | None
    token: int | None
    expected: str
    actual: str
    reason: str


@dataclass
class ValidationReport:
    mismatches: list[Mismatch] = field(default_factory=list)
    compared_files: int = 0

    @property
    def status(self) -> str:
        return "pass" if not self.mismatches else "fail"

    def to_json(self) -> str:
        return json.dumps(
            {
                "status": self.status,
                "compared_files": self.compared_files,
                "mismatches": [asdict(m) for m in self.mismatches],
            },
            indent=2,
            sort_keys=True,
        )


def tokenize_numeric_line(line: str) -> list[tuple[str, bool, float | None]]:
    out = []
    for tok in line.split():
        if _NUMBER.fullmatch(tok):
            out.append((tok, True, float(tok)))
        else:
            out.append((tok, False, None))
    return out


def _filtered(lines: Iterable[str], prefixes: Sequence[str]) -> list[tuple[int, str]]:
    return [
        (n, line)
        for n, line in enumerate(lines, start=1)
        if not any(line.startswith(p) for p in prefixes)
    ]


def _within(actual: float, golden: float, rule: ToleranceRule) -> bool:
    diff = abs(actual - golden)
    return diff <= rule.abstol or diff <= rule.reltol * abs(golden)


def _compare_text(name: str, golden: str, actual: str, rule: ToleranceRule, out: list[Mismatch]) -> None:
    g_lines = _filtered(golden.splitlines(), rule.skip_line_prefixes)
    a_lines = _filtered(actual.splitlines(), rule.skip_line_prefixes)
    if len(g_lines) != len(a_lines):
        out.append(Mismatch(name, None, None, f"{len(g_lines)} lines", f"{len(a_lines)} lines", "line-count"))
        return
    for (gn, gl), (_, al) in zip(g_lines, a_lines):
        if rule.mode == "exact":
            if gl != al:
                out.append(Mismatch(name, gn, None, gl, al, "line"))
            continue
        g_tok = tokenize_numeric_line(gl)
        a_tok = tokenize_numeric_line(al)
        if len(g_tok) != len(a_tok):
            out.append(Mismatch(name, gn, None, gl, al, "token-count"))
            continue
        for i, ((gs, gnum, gv), (as_, anum, av)) in enumerate(zip(g_tok, a_tok)):
            if gnum and anum:
                if not _within(av, gv, rule):
                    out.append(Mismatch(name, gn, i, gs, as_, "tolerance"))
            elif gs != as_:
                out.append(Mismatch(name, gn, i, gs, as_, "token"))


def compare_outputs(
    actual_dir: str | Path,
    golden: Sequence[tuple[str, str | Path]],
    rule: ToleranceRule,
) -> ValidationReport:
    """Compare each golden file against the same-named file in ``actual_dir``.

    Exact mode compares lines byte-for-byte (after dropping skipped lines);
    numeric mode compares token by token, numbers within
    ``abstol`` OR ``reltol * |golden|``.
    """
    actual_dir = Path(actual_dir)
    report = ValidationReport()
    for name, golden_path in golden:
        try:
            g_bytes = Path(golden_path).read_bytes()
        except OSError:
            report.mismatches.append(Mismatch(name, None, None, str(golden_path), "", "io"))
            continue
        a_path = actual_dir / name
        if not a_path.exists():
            report.mismatches.append(Mismatch(name, None, None, "present", "missing", "missing-file"))
            continue
        try:
            a_bytes = a_path.read_bytes()
        except OSError:
            report.mismatches.append(Mismatch(name, None, None, "", str(a_path), "io"))
            continue
        report.compared_files += 1
        if rule.mode == "exact" and not rule.skip_line_prefixes:
            if g_bytes != a_bytes:
                _compare_text(name, g_bytes.decode("utf-8", "replace"), a_bytes.decode("utf-8", "replace"),
                              rule, report.mismatches)
                if not report.mismatches or report.mismatches[-1].file != name:
                    # differ only in line endings or a trailing newline
                    report.mismatches.append(Mismatch(name, None, None, "", "", "bytes"))
            continue
        _compare_text(name, g_bytes.decode("utf-8", "replace"), a_bytes.decode("utf-8", "replace"),
                      rule, report.mismatches)
    return report
