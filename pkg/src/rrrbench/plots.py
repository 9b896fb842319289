"""Timeplots, recurrence images, perf overlays and the raw text report.

Every emitter is a pure function of its inputs: no timestamps, no RNG, fixed
float formatting.  Running one twice on the same inputs gives identical bytes.
"""

from __future__ import annotations

import base64
import hashlib
import re
import struct
import zlib
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .bbv import DistanceMatrix, to_unit_max
from .executor import RunLog
from .metrics import CONVENTIONS, EXHIBITION_LABEL, CopyStats, EnergyReport, MultiprogramReport, SuiteScore
from .perfseries import AlignedSeries, moving_average
from .svg import SVG

TIMEPLOT_TAG = "rrrbench-timeplot v1"
RECURRENCE_TAG = "rrrbench-recurrence v1"
OVERLAY_TAG = "rrrbench-perf-overlay v1"
REPORT_TAG = "# rrrbench raw report v1"

# tab20, reordered so neighbours contrast
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5", "#c49c94",
    "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5",
)


class PlotError(ValueError):
    pass


def color_of(bench_id: str) -> str:
    h = int.from_bytes(hashlib.sha256(bench_id.encode("utf-8")).digest()[:8], "big")
    return PALETTE[h % len(PALETTE)]


def _write(out: str | Path, data: str | bytes) -> Path:
    out = Path(out)
    if isinstance(data, str):
        out.write_text(data, encoding="utf-8")
    else:
        out.write_bytes(data)
    return out


# -- timeplot --------------------------------------------------------------


def timeplot_svg(runlog: RunLog, out: str | Path, width: float = 1000.0) -> Path:
    """One bar per event: x is seconds since the first start, y is the copy."""
    if not runlog.events:
        raise PlotError("cannot plot an empty run log")
    left, right, top = 70.0, 20.0, 40.0
    M = max(runlog.M, max(e.copy for e in runlog.events) + 1)
    row = max(3.0, min(18.0, 480.0 / M))
    t_min = min(e.start_ns for e in runlog.events)
    t_max = max(e.end_ns for e in runlog.events)
    span_s = max((t_max - t_min) / 1e9, 1e-9)
    plot_w = width - left - right
    scale = plot_w / span_s  # px per second
    legend_rows = (len(runlog.roster) + 3) // 4
    height = top + M * row + 40 + legend_rows * 16 + 10

    svg = SVG(width, height, TIMEPLOT_TAG)
    svg.el("g", None, data_scale_px_per_s=repr(scale), data_mode=runlog.mode)
    title = f"{runlog.suite_name}: {runlog.mode}, {runlog.M} copies, {runlog.iterations} iteration(s)"
    if runlog.params:
        title += ", " + ", ".join(f"{k}={v}" for k, v in sorted(runlog.params.items()))
    svg.text(left, 20, title, 13.0)
    for c in range(M):
        y = top + c * row
        # idle background; bars are drawn on top of it
        svg.rect(left, y, plot_w, row * 0.9, "#eeeeee")
        if M <= 32 or c % max(1, M // 16) == 0:
            svg.text(4, y + row * 0.75, f"copy {c}", min(11.0, row))
    for e in sorted(runlog.events, key=lambda e: (e.copy, e.start_ns)):
        x = left + (e.start_ns - t_min) / 1e9 * scale
        w = (e.end_ns - e.start_ns) / 1e9 * scale
        stroke = None if e.exit_ok and e.validation == "pass" else "#000000"
        svg.rect(
            x, top + e.copy * row, w, row * 0.9, color_of(e.bench_id),
            stroke=stroke,
            data_copy=e.copy, data_bench=e.bench_id, data_workload=e.workload,
            data_iteration=e.iteration, data_start_ns=e.start_ns, data_end_ns=e.end_ns,
        )
    axis_y = top + M * row + 4
    svg.line(left, axis_y, left + plot_w, axis_y)
    for k in range(6):
        x = left + plot_w * k / 5
        svg.line(x, axis_y, x, axis_y + 4)
        svg.text(x - 10, axis_y + 16, f"{span_s * k / 5:.2f}s", 10.0)
    ly = axis_y + 34
    for i, b in enumerate(runlog.roster):
        lx = left + (i % 4) * (plot_w / 4)
        yy = ly + (i // 4) * 16
        svg.rect(lx, yy - 9, 10, 10, color_of(b))
        svg.text(lx + 14, yy, b, 11.0, data_legend=b)
    return _write(out, svg.render())


# -- recurrence images -----------------------------------------------------


def recurrence_pixels(D: DistanceMatrix) -> np.ndarray:
    """8-bit image, row 0 at the top; interval 0 sits at the lower-left corner.

    Brightness is 255 * (1 - unit-max distance), rounded half up.
    """
    U = to_unit_max(D).values
    px = np.floor(255.0 * (1.0 - U) + 0.5).astype(np.uint8)
    return px[::-1, :].copy()


def pixel_at(img: np.ndarray, i: int, j: int) -> int:
    """Pixel for interval pair (i, j) in an image from :func:`recurrence_pixels`."""
    return int(img[img.shape[0] - 1 - i, j])


def encode_pgm(img: np.ndarray, comment: str = RECURRENCE_TAG) -> bytes:
    h, w = img.shape
    return f"P5\n# {comment}\n{w} {h}\n255\n".encode("ascii") + img.astype(np.uint8).tobytes()


def read_pgm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        fields.append(data[pos:end])
        pos = end
    if fields[0] != b"P5" or fields[3] != b"255":
        raise PlotError(f"{path}: not an 8-bit binary PGM")
    w, h = int(fields[1]), int(fields[2])
    raster = data[pos + 1: pos + 1 + w * h]
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w)


def encode_png_gray(img: np.ndarray) -> bytes:
    h, w = img.shape

    def chunk(kind: bytes, body: bytes) -> bytes:
        return struct.pack(">I", len(body)) + kind + body + struct.pack(">I", zlib.crc32(kind + body) & 0xFFFFFFFF)

    raw = b"".join(b"\x00" + img[r].astype(np.uint8).tobytes() for r in range(h))
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", struct.pack(">IIBBBBB", w, h, 8, 0, 0, 0, 0))
        + chunk(b"IDAT", zlib.compress(raw, 9))
        + chunk(b"IEND", b"")
    )


def _raster_image(svg: SVG, img: np.ndarray, x: float, y: float, size: float) -> None:
    uri = "data:image/png;base64," + base64.b64encode(encode_png_gray(img)).decode("ascii")
    svg.el("image", x=float(x), y=float(y), width=float(size), height=float(size),
           preserveAspectRatio="none", style="image-rendering:pixelated", href=uri)


def recurrence_image(D: DistanceMatrix, out: str | Path, format: str = "pgm") -> Path:
    img = recurrence_pixels(D)
    if format == "pgm":
        return _write(out, encode_pgm(img))
    if format == "svg":
        size = 512.0
        svg = SVG(size + 20, size + 20, RECURRENCE_TAG)
        _raster_image(svg, img, 10, 10, size)
        return _write(out, svg.render())
    raise PlotError(f"unknown image format {format!r}")


# -- perf overlay ----------------------------------------------------------


def perf_overlay_svg(
    series: AlignedSeries,
    matrix: DistanceMatrix | None,
    out: str | Path,
    smooth: int = 1,
    width: float = 640.0,
) -> Path:
    """Recurrence raster (optional) stacked above IPC / frontend / backend panels.

    All panels share the instruction axis; values are drawn as steps per
    interval.
    """
    T = len(series)
    if T == 0:
        raise PlotError("empty series")
    if matrix is not None and matrix.T != T:
        raise PlotError(f"interval count mismatch: matrix has {matrix.T}, series has {T}")
    left, right = 60.0, 20.0
    plot_w = width - left - right
    panel_h = 110.0
    y = 30.0
    total_instr = sum(series.instructions)
    panels = [("ipc", [b.ipc for b in series.breakdown], "#1f77b4")]
    if series.has_topdown:
        panels.append(("frontend", [b.clamped().frontend for b in series.breakdown], "#17becf"))
        panels.append(("backend", [b.clamped().backend for b in series.breakdown], "#e377c2"))
    height = y + (plot_w + 20 if matrix is not None else 0) + len(panels) * (panel_h + 20) + 40
    svg = SVG(width, height, OVERLAY_TAG)
    svg.text(left, 18, f"{T} intervals of {series.interval_instructions} instructions", 12.0)
    if matrix is not None:
        _raster_image(svg, recurrence_pixels(matrix), left, y, plot_w)
        y += plot_w + 20

    bounds = [0]
    for n in series.instructions:
        bounds.append(bounds[-1] + n)
    xs = [left + plot_w * b / total_instr for b in bounds]
    for name, values, color in panels:
        vals = moving_average(values, smooth)
        vmax = max(vals) if name == "ipc" else 1.0
        vmax = vmax if vmax > 0 else 1.0
        svg.rect(left, y, plot_w, panel_h, "#ffffff", stroke="#999999")
        svg.text(4, y + 12, name, 11.0)
        svg.text(left - 34, y + 10, f"{vmax:.2f}", 9.0)
        pts = []
        for k, v in enumerate(vals):
            py = y + panel_h * (1.0 - v / vmax)
            pts += [(xs[k], py), (xs[k + 1], py)]
        svg.polyline(pts, color, data_metric=name, stroke_width=1.5)
        y += panel_h + 20
    svg.text(left, y + 4, f"instructions (0 .. {total_instr})", 10.0)
    return _write(out, svg.render())


# -- raw report ------------------------------------------------------------


def _stats_line(s: CopyStats) -> str:
    return (
        f"  copies: n={s.n} min={s.min_s:.6f} max={s.max_s:.6f} mean={s.mean_s:.6f} "
        f"stddev={s.stddev_s:.6f} cv={s.cv:.6f} q1={s.q1_s:.6f} median={s.median_s:.6f} q3={s.q3_s:.6f}"
    )


def format_raw_report(
    score: SuiteScore,
    stats: Mapping[str, CopyStats] | None = None,
    rrr: MultiprogramReport | None = None,
    *,
    host: Mapping[str, str] | None = None,
    params: Mapping[str, int] | None = None,
    energy: EnergyReport | None = None,
) -> str:
    stats = stats or {b.bench_id: b.stats for b in score.benchmarks}
    lines = [
        REPORT_TAG,
        f"suite: {score.suite_name}",
        f"mode: {score.mode}",
        f"copies: {score.M}",
        f"iterations: {score.R}",
    ]
    if params:
        lines.append("params: " + " ".join(f"{k}={v}" for k, v in sorted(params.items())))
    for k, v in sorted((host or {}).items()):
        lines.append(f"host.{k}: {v}")
    lines.append(f"conventions: {CONVENTIONS}")
    lines.append("")
    for b in score.benchmarks:
        lines.append(f"== {b.bench_id} ==")
        lines.append("  iterations_s: " + " ".join(f"{t:.6f}" for t in b.iteration_times_s))
        lines.append(f"  selected_s: {b.selected_time_s:.6f}")
        lines.append(f"  ratio: {b.ratio:.3f}")
        lines.append(_stats_line(stats[b.bench_id]))
        lines.append(f"  status: {'ok' if b.complete and b.validated else 'NON-COMPLIANT'}")
    lines.append("")
    lines.append("== summary ==")
    lines.append(f"geomean: {score.overall:.3f}")
    lines.append(f"compliant: {'yes' if score.compliant else 'no'}")
    for issue in score.issues:
        lines.append(f"issue: {issue}")
    if energy is not None:
        lines.append(f"energy_j: {energy.energy_j:.3f}")
        if energy.energy_ratio is not None:
            lines.append(f"energy_ratio: {energy.energy_ratio:.3f}")
        lines.append(f"perf_per_watt: {energy.perf_per_watt:.6f}")
    if rrr is not None:
        lines.append("")
        lines.append(f"== RRR candidate metrics ({EXHIBITION_LABEL}) ==")
        lines.append(f"ANTT: {rrr.antt:.6f}")
        lines.append(f"STP: {rrr.stp:.6f}")
        lines.append(f"hmean_speedup: {rrr.hmean_speedup:.6f}")
        lines.append(f"fairness: {rrr.fairness:.6f}")
    return "\n".join(lines) + "\n"


def render_raw_report(
    score: SuiteScore,
    stats: Mapping[str, CopyStats] | None,
    rrr: MultiprogramReport | None,
    out: str | Path,
    **kw,
) -> Path:
    return _write(out, format_raw_report(score, stats, rrr, **kw))


def polyline_values(svg_text: str, metric: str) -> list[tuple[float, float]]:
    """Points of the named metric polyline in an overlay SVG (used by tests and tooling)."""
    m = re.search(r'<polyline points="([^"]*)"[^>]*data-metric="%s"' % re.escape(metric), svg_text)
    if m is None:
        raise PlotError(f"no polyline for {metric!r}")
    return [tuple(float(v) for v in p.split(",")) for p in m.group(1).split()]


def timeplot_rects(svg_text: str) -> list[dict[str, str]]:
    """Event bars of a timeplot SVG as attribute dicts."""
    out = []
    for m in re.finditer(r"<rect ([^>]*data-copy=[^>]*)/>", svg_text):
        out.append(dict(re.findall(r'([\w-]+)="([^"]*)"', m.group(1))))
    return out


__all__: Sequence[str] = [
    "color_of", "timeplot_svg", "recurrence_pixels", "pixel_at", "encode_pgm", "read_pgm",
    "recurrence_image", "perf_overlay_svg", "format_raw_report", "render_raw_report",
]
