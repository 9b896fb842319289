"""Suite configuration model: benchmarks, workloads, golden outputs, tolerances.

A suite is one TOML file.  Relative paths inside it resolve against the
directory holding the file, so a suite directory can be moved as a unit.

    suite_name = "synth"

    [[benchmark]]
    id = "syn.spin"
    command = ["{python}", "-m", "rrrbench", "synth"]
    reference_time_s = 2.0
    solo_time_s = 0.5            # optional, defaults to reference_time_s
    reference_energy_j = 300.0   # optional

    [benchmark.validation]
    mode = "numeric"             # "exact" | "numeric"
    abstol = 0.0
    reltol = 1e-9
    skip_line_prefixes = ["#"]

    [[benchmark.workload]]
    name = "ref"
    args = ["--kind", "spin", "--units", "200000", "--out", "spin.out"]
    input_files = []
    golden_outputs = [{ file = "spin.out", path = "golden/syn.spin.ref.out" }]

The order of ``[[benchmark]]`` tables is the roster order used by the
round-robin scheduler.
"""

from __future__ import annotations

import math
import os
import shlex
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import tomli_w

__all__ = [
    "ConfigError",
    "ToleranceRule",
    "WorkloadSpec",
    "BenchmarkSpec",
    "SuiteConfig",
    "load_suite",
    "dump_suite",
    "save_suite",
    "roster_index",
    "bundled_suite_path",
]


class ConfigError(ValueError):
    """Raised for malformed or invalid suite configuration."""


@dataclass(frozen=True)
class ToleranceRule:
    mode: str = "exact"
    abstol: float = 0.0
    reltol: float = 0.0
    skip_line_prefixes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.mode not in ("exact", "numeric"):
            raise ConfigError(f"validation.mode must be 'exact' or 'numeric', got {self.mode!r}")
        for name in ("abstol", "reltol"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ConfigError(f"validation.{name} must be finite and non-negative, got {value!r}")
        if self.mode == "exact" and (self.abstol != 0 or self.reltol != 0):
            raise ConfigError("validation.abstol/reltol must be 0 in exact mode")


@dataclass(frozen=True)
class WorkloadSpec:
    name: str
    args: tuple[str, ...] = ()
    input_files: tuple[Path, ...] = ()
    golden_outputs: tuple[tuple[str, Path], ...] = ()


@dataclass(frozen=True)
class BenchmarkSpec:
    id: str
    command: tuple[str, ...]
    workloads: tuple[WorkloadSpec, ...]
    reference_time_s: float
    solo_time_s: float | None = None
    reference_energy_j: float | None = None
    validation: ToleranceRule = field(default_factory=ToleranceRule)

    @property
    def solo_s(self) -> float:
        return self.reference_time_s if self.solo_time_s is None else self.solo_time_s


@dataclass(frozen=True)
class SuiteConfig:
    suite_name: str
    roster: tuple[BenchmarkSpec, ...]

    @property
    def N(self) -> int:
        return len(self.roster)

    @property
    def ids(self) -> list[str]:
        return [b.id for b in self.roster]

    def benchmark(self, bench_id: str) -> BenchmarkSpec:
        return self.roster[roster_index(self, bench_id)]

    def subset(self, ids: list[str]) -> SuiteConfig:
        """Restrict the roster to ``ids``, in the order given."""
        if not ids:
            raise ConfigError("benchmark subset is empty")
        if len(set(ids)) != len(ids):
            raise ConfigError(f"benchmark subset repeats an id: {ids}")
        return replace(self, roster=tuple(self.benchmark(i) for i in ids))


def roster_index(cfg: SuiteConfig, bench_id: str) -> int:
    for i, bench in enumerate(cfg.roster):
        if bench.id == bench_id:
            return i
    raise KeyError(f"unknown benchmark id {bench_id!r}")


def bundled_suite_path() -> Path:
    """Path of the synthetic mini-suite shipped with the package."""
    return Path(__file__).parent / "data" / "synth" / "synth.toml"


# -- loading ---------------------------------------------------------------


def _positive(value: Any, where: str, optional: bool = False) -> float | None:
    if value is None:
        if optional:
            return None
        raise ConfigError(f"{where} is required")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise ConfigError(f"{where} must be positive, got {value!r}")
    return value


def _str_list(value: Any, where: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ConfigError(f"{where} must be a list of strings")
    return tuple(value)


def _resolve(base: Path, raw: Any, where: str) -> Path:
    if not isinstance(raw, str):
        raise ConfigError(f"{where} must be a path string")
    path = Path(raw)
    if not path.is_absolute():
        path = base / path
    path = path.resolve()
    if not path.is_file():
        raise ConfigError(f"{where}: file not found: {path}")
    return path


def _parse_tolerance(raw: Any, where: str) -> ToleranceRule:
    if raw is None:
        return ToleranceRule()
    if not isinstance(raw, dict):
        raise ConfigError(f"{where} must be a table")
    try:
        return ToleranceRule(
            mode=raw.get("mode", "exact"),
            abstol=float(raw.get("abstol", 0.0)),
            reltol=float(raw.get("reltol", 0.0)),
            skip_line_prefixes=_str_list(raw.get("skip_line_prefixes", []), f"{where}.skip_line_prefixes"),
        )
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _parse_workload(raw: Any, base: Path, where: str) -> WorkloadSpec:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where} must be a table")
    name = raw.get("name")
    if not isinstance(name, str) or not name:
        raise ConfigError(f"{where}.name must be a non-empty string")
    inputs = tuple(
        _resolve(base, p, f"{where}.input_files[{i}]")
        for i, p in enumerate(raw.get("input_files", []))
    )
    goldens = []
    seen = set()
    for i, g in enumerate(raw.get("golden_outputs", [])):
        gw = f"{where}.golden_outputs[{i}]"
        if not isinstance(g, dict) or not isinstance(g.get("file"), str):
            raise ConfigError(f"{gw} must be a table with 'file' and 'path'")
        if g["file"] in seen:
            raise ConfigError(f"{gw}: duplicate golden filename {g['file']!r}")
        seen.add(g["file"])
        goldens.append((g["file"], _resolve(base, g.get("path"), f"{gw}.path")))
    return WorkloadSpec(
        name=name,
        args=_str_list(raw.get("args", []), f"{where}.args"),
        input_files=inputs,
        golden_outputs=tuple(goldens),
    )


def _parse_benchmark(raw: Any, base: Path, idx: int) -> BenchmarkSpec:
    where = f"benchmark[{idx}]"
    if not isinstance(raw, dict):
        raise ConfigError(f"{where} must be a table")
    bench_id = raw.get("id")
    if not isinstance(bench_id, str) or not bench_id:
        raise ConfigError(f"{where}.id must be a non-empty string")
    where = f"benchmark {bench_id!r}"
    command = raw.get("command")
    if isinstance(command, str):
        command = shlex.split(command)
    if not command:
        raise ConfigError(f"{where}.command is required")
    command = _str_list(command, f"{where}.command")
    workloads = raw.get("workload", [])
    if not isinstance(workloads, list) or not workloads:
        raise ConfigError(f"{where}: at least one [[benchmark.workload]] is required")
    parsed = tuple(_parse_workload(w, base, f"{where}.workload[{i}]") for i, w in enumerate(workloads))
    names = [w.name for w in parsed]
    if len(set(names)) != len(names):
        raise ConfigError(f"{where}: duplicate workload name")
    return BenchmarkSpec(
        id=bench_id,
        command=command,
        workloads=parsed,
        reference_time_s=_positive(raw.get("reference_time_s"), f"{where}.reference_time_s"),
        solo_time_s=_positive(raw.get("solo_time_s"), f"{where}.solo_time_s", optional=True),
        reference_energy_j=_positive(raw.get("reference_energy_j"), f"{where}.reference_energy_j", optional=True),
        validation=_parse_tolerance(raw.get("validation"), f"{where}.validation"),
    )


def parse_suite(data: dict[str, Any], base: Path) -> SuiteConfig:
    name = data.get("suite_name")
    if not isinstance(name, str) or not name:
        raise ConfigError("suite_name must be a non-empty string")
    raw_roster = data.get("benchmark", [])
    if not isinstance(raw_roster, list) or not raw_roster:
        raise ConfigError("suite must define at least one [[benchmark]]")
    roster = tuple(_parse_benchmark(b, base, i) for i, b in enumerate(raw_roster))
    seen: set[str] = set()
    for bench in roster:
        if bench.id in seen:
            raise ConfigError(f"duplicate benchmark id {bench.id!r}")
        seen.add(bench.id)
    return SuiteConfig(suite_name=name, roster=roster)


def load_suite(path: str | os.PathLike) -> SuiteConfig:
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: parse error: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_suite(data, path.resolve().parent)


# -- serialization ---------------------------------------------------------


def _rel(path: Path, base: Path) -> str:
    try:
        return os.path.relpath(path, base)
    except ValueError:  # different drive on Windows
        return str(path)


def dump_suite(cfg: SuiteConfig, base: str | os.PathLike) -> str:
    """Serialize to TOML text with paths relative to ``base``."""
    base = Path(base).resolve()
    benches = []
    for b in cfg.roster:
        entry: dict[str, Any] = {
            "id": b.id,
            "command": list(b.command),
            "reference_time_s": b.reference_time_s,
        }
        if b.solo_time_s is not None:
            entry["solo_time_s"] = b.solo_time_s
        if b.reference_energy_j is not None:
            entry["reference_energy_j"] = b.reference_energy_j
        entry["validation"] = {
            "mode": b.validation.mode,
            "abstol": b.validation.abstol,
            "reltol": b.validation.reltol,
            "skip_line_prefixes": list(b.validation.skip_line_prefixes),
        }
        entry["workload"] = [
            {
                "name": w.name,
                "args": list(w.args),
                "input_files": [_rel(p, base) for p in w.input_files],
                "golden_outputs": [{"file": f, "path": _rel(p, base)} for f, p in w.golden_outputs],
            }
            for w in b.workloads
        ]
        benches.append(entry)
    return tomli_w.dumps({"suite_name": cfg.suite_name, "benchmark": benches})


def save_suite(cfg: SuiteConfig, path: str | os.PathLike) -> None:
    path = Path(path)
    path.write_text(dump_suite(cfg, path.parent), encoding="utf-8")
