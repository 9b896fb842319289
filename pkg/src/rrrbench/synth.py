"""Deterministic synthetic benchmarks used as a stand-in workload corpus.

Each kind performs exactly ``units`` loop iterations of fixed integer and
floating-point work and writes a small checksum file.  Nothing depends on
time, the host, or a random seed, so the output is byte-identical everywhere
and golden files can be checked in.
"""

from __future__ import annotations

import sys
from pathlib import Path

KINDS = ("spin", "stream", "mixed")
FORMAT_TAG = "# rrrbench-synth v1"

_MASK = (1 << 64) - 1
_LCG_A = 6364136223846793005
_LCG_C = 1442695040888963407
_STRIDE = 4160  # 65 cache lines; defeats simple next-line prefetch
_PHASES = 8


class _State:
    __slots__ = ("x", "acc", "buf", "pos", "chk")

    def __init__(self, mib: int) -> None:
        self.x = 0x9E3779B97F4A7C15
        self.acc = 0.0
        self.buf = bytearray(mib << 20) if mib > 0 else bytearray(1)
        self.pos = 0
        self.chk = 0xCBF29CE484222325


def _spin(st: _State, units: int) -> None:
    x, acc = st.x, st.acc
    for _ in range(units):
        x = (x * _LCG_A + _LCG_C) & _MASK
        acc += (x >> 40) * 5.960464477539063e-08  # 2**-24
    st.x, st.acc = x, acc


def _stream(st: _State, units: int) -> None:
    buf, n, pos, chk, acc = st.buf, len(st.buf), st.pos, st.chk, st.acc
    for i in range(units):
        pos += _STRIDE
        if pos >= n:
            pos -= n
        v = (buf[pos] + i + 1) & 0xFF
        buf[pos] = v
        chk = ((chk ^ v) * 0x100000001B3) & _MASK
        acc += v * 0.00390625
    st.pos, st.chk, st.acc = pos, chk, acc


def run_kernel(kind: str, units: int, mib: int = 16) -> dict[str, str]:
    if kind not in KINDS:
        raise ValueError(f"unknown synthetic kind {kind!r}; expected one of {KINDS}")
    if units <= 0:
        raise ValueError(f"work units must be positive, got {units}")
    st = _State(mib if kind != "spin" else 0)
    if kind == "spin":
        _spin(st, units)
    elif kind == "stream":
        _stream(st, units)
    else:
        # alternate spin and stream phases; remainder goes to the last phase
        chunk, rest = divmod(units, _PHASES)
        for p in range(_PHASES):
            n = chunk + (rest if p == _PHASES - 1 else 0)
            if n:
                (_spin if p % 2 == 0 else _stream)(st, n)
    checksum = (st.x ^ st.chk) & _MASK
    return {
        "kind": kind,
        "units": str(units),
        "checksum": f"{checksum:016x}",
        "mean": f"{st.acc / units:.12f}",
    }


def render_output(result: dict[str, str]) -> str:
    lines = [FORMAT_TAG] + [f"{k} {v}" for k, v in result.items()]
    return "\n".join(lines) + "\n"


def synth_main(kind: str, work_units: int, out_file: str | Path, mib: int = 16) -> int:
    """Run one synthetic benchmark and write its checksum file.

    Returns a process exit status: 0 ok, 2 bad arguments, 1 output not writable.
    """
    try:
        result = run_kernel(kind, work_units, mib)
    except ValueError as exc:
        print(f"synth: {exc}", file=sys.stderr)
        return 2
    try:
        Path(out_file).write_text(render_output(result), encoding="utf-8")
    except OSError as exc:
        print(f"synth: cannot write {out_file}: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    """Entry point for ``rrrbench synth`` that avoids importing the analysis stack."""
    import argparse

    p = argparse.ArgumentParser(prog="rrrbench synth")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--units", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mib", type=int, default=16)
    args = p.parse_args(argv)
    return synth_main(args.kind, args.units, args.out, args.mib)
