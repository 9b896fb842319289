"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also repeated in the terminal summary.
"""

import csv
import math
import random
import statistics
import time
from math import gcd
from pathlib import Path

import numpy as np

from conftest import ACCEPTANCE_LINES
from rrrbench.bbv import BBVector, BBVTrace, distance_matrix, normalize_l1, parse_bb_text
from rrrbench.cli import main as cli_main
from rrrbench.executor import check_barriers, first_events, read_runlog
from rrrbench.metrics import copy_stats, geomean, integrate_energy, multiprogram_aggregates, score_suite
from rrrbench.perfseries import CounterSample, resample_to_instructions, topdown_level1
from rrrbench.plots import format_raw_report, read_pgm, recurrence_image, timeplot_svg
from rrrbench.scheduler import RRRParams, make_homogeneous_schedule, make_rrr_schedule
from rrrbench.suite import ToleranceRule, bundled_suite_path, load_suite
from rrrbench.validator import compare_outputs

from _helpers import log_from_schedule, plain_suite

FIXTURES = Path(__file__).parent / "fixtures"


def verdict(n: int, name: str, ok: bool, detail: str = "") -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {name}" + (f" ({detail})" if detail else "")
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_c01_rrr_rotation_fixture():
    t = time.perf_counter()
    s = make_rrr_schedule(3, 3, RRRParams(inc=1, step=1))
    got = [s.sequence(c) for c in range(3)]
    dt = time.perf_counter() - t
    verdict(1, "RRR rotation fixture", got == [[0, 1, 2], [1, 2, 0], [2, 0, 1]] and dt < 1e-3,
            f"{got}, {dt * 1e3:.3f} ms")


def test_c02_latin_rectangle_property():
    rng = random.Random(2026)
    t = time.perf_counter()
    bad = []
    for _ in range(500):
        N = rng.randint(1, 20)
        M = rng.randint(1, 64)
        inc = rng.randint(1, 50)
        step = rng.choice([k for k in range(1, 2 * N + 2) if gcd(k, N) == 1])
        s = make_rrr_schedule(N, M, RRRParams(inc, step))
        rows_ok = all(sorted(s.sequence(c)) == list(range(N)) for c in range(M))
        counts = [0] * N
        for slot in s.slots:
            counts[slot.bench_index] += 1
        if not (rows_ok and counts == [M] * N):
            bad.append((N, M, inc, step))
    dt = time.perf_counter() - t
    verdict(2, "Latin-rectangle property", not bad and dt < 1.0, f"500 cases, {len(bad)} bad, {dt:.3f} s")


def test_c03_end_to_end_synthetic(tmp_path):
    suite = bundled_suite_path()
    cfg = load_suite(suite)
    M, R = 4, 3
    problems = []
    t = time.perf_counter()
    for mode in ("rate", "rrr"):
        out = tmp_path / mode
        rc = cli_main(["run", "--suite", str(suite), "--mode", mode, "--copies", str(M),
                       "--iterations", str(R), "--out", str(out)])
        if rc != 0:
            problems.append(f"{mode}: exit {rc}")
            continue
        log = read_runlog(out / "runlog.csv")
        expected = M * R * sum(len(b.workloads) for b in cfg.roster)
        if len(log.events) != expected:
            problems.append(f"{mode}: {len(log.events)} events, expected {expected}")
        if not all(e.exit_ok and e.validation == "pass" for e in log.events):
            problems.append(f"{mode}: validation failures")
        for name in ("timeplot.svg", "report.txt", "scores.json"):
            if not (out / name).is_file():
                problems.append(f"{mode}: missing {name}")
        if mode == "rate" and not check_barriers(log):
            problems.append("rate: barrier violated")
        if mode == "rrr":
            inc = log.params.get("inc", 1)
            for c, e in first_events(log).items():
                if e.bench_id != cfg.ids[(c * inc) % cfg.N]:
                    problems.append(f"rrr: copy {c} started with {e.bench_id}")
    dt = time.perf_counter() - t
    verdict(3, "end-to-end synthetic run", not problems and dt < 60,
            f"{dt:.1f} s" + ("; " + "; ".join(problems) if problems else ""))


def _random_log(rng, ids, sched):
    base = {b: rng.uniform(0.5, 5) for b in ids}
    return log_from_schedule(sched, ids, lambda b, c, it: base[b] * rng.uniform(0.9, 1.1), R=3)


def test_c04_reference_machine_invariance():
    rng = random.Random(4)
    ids = [f"b{i}" for i in range(8)]
    refs = [rng.uniform(10, 1000) for _ in ids]
    sched = make_homogeneous_schedule(len(ids), 4)
    A, B = _random_log(rng, ids, sched), _random_log(rng, ids, sched)
    t = time.perf_counter()
    base = score_suite(A, plain_suite(ids, refs)).overall / score_suite(B, plain_suite(ids, refs)).overall
    worst = 0.0
    for k in (0.1, 3, 1000):
        scaled = [k * r for r in refs]
        r = score_suite(A, plain_suite(ids, scaled)).overall / score_suite(B, plain_suite(ids, scaled)).overall
        worst = max(worst, abs(r - base) / base)
    dt = time.perf_counter() - t
    verdict(4, "reference-machine invariance", worst <= 1e-12 and dt < 1.0, f"max rel change {worst:.2e}, {dt:.3f} s")


def _brute(xs):
    n = len(xs)
    mean = math.fsum(xs) / n
    sd = math.sqrt(math.fsum((x - mean) ** 2 for x in xs) / (n - 1)) if n > 1 else 0.0
    s = sorted(xs)

    def q(p):
        h = (n - 1) * p
        lo = int(math.floor(h))
        hi = min(lo + 1, n - 1)
        return s[lo] + (h - lo) * (s[hi] - s[lo])

    return [mean, sd, s[0], s[-1], q(0.25), q(0.5), q(0.75)]


def test_c05_statistics_oracle():
    rng = random.Random(5)
    t = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        xs = [rng.uniform(0.001, 1000) for _ in range(rng.randint(2, 64))]
        s = copy_stats(xs)
        got = [s.mean_s, s.stddev_s, s.min_s, s.max_s, s.q1_s, s.median_s, s.q3_s]
        for g, w in zip(got, _brute(xs)):
            worst = max(worst, abs(g - w) / max(abs(w), 1e-300))
    fx = copy_stats([2, 4, 4, 4, 5, 5, 7, 9])
    dt = time.perf_counter() - t
    ok = worst <= 1e-9 and fx.mean_s == 5 and abs(fx.stddev_s - 2.138089935299395) < 1e-12 and dt < 1.0
    verdict(5, "statistics oracle", ok, f"max rel err {worst:.2e}, stddev {fx.stddev_s:.6f}, {dt:.3f} s")


def test_c06_geomean_fixtures():
    t = time.perf_counter()
    rng = random.Random(6)
    vals = [2.0, 8.0, 4.0]
    perm_ok = True
    for _ in range(100):
        rng.shuffle(vals)
        perm_ok &= abs(geomean(vals) - 4) <= 4e-12
    ok = abs(geomean([1, 4]) - 2) <= 2e-12 and abs(geomean([2, 8, 4]) - 4) <= 4e-12 and perm_ok
    dt = time.perf_counter() - t
    verdict(6, "geomean fixtures", ok and dt < 1.0, f"{dt * 1e3:.2f} ms")


def _sparse_trace(rng, T, blocks, per):
    vecs = []
    for _ in range(T):
        ids = rng.sample(range(blocks), rng.randint(1, per))
        vecs.append(BBVector({k: rng.randint(1, 10**6) for k in ids}))
    return normalize_l1(BBVTrace(tuple(vecs)))


def test_c07_bbv_metric_properties(tmp_path):
    rng = random.Random(7)
    t = time.perf_counter()
    D = distance_matrix(_sparse_trace(rng, 200, 3000, 60)).values
    sym = bool(np.array_equal(D, D.T))
    diag = bool(np.all(np.diag(D) == 0.0))
    tri_bad = 0
    for _ in range(1000):
        i, j, k = rng.randrange(200), rng.randrange(200), rng.randrange(200)
        if D[i, k] > D[i, j] + D[j, k] + 1e-9:
            tri_bad += 1
    sqrt2 = distance_matrix(normalize_l1(parse_bb_text("T:1:7\nT:2:3\n"))).values[0, 1]
    const = distance_matrix(normalize_l1(parse_bb_text("T:1:4 :9:2\n" * 200)))
    zero = bool(np.all(const.values == 0.0))
    img = read_pgm(recurrence_image(const, tmp_path / "const.pgm"))
    bright = img.shape == (200, 200) and bool(np.all(img == 255))
    dt = time.perf_counter() - t
    ok = sym and diag and tri_bad == 0 and abs(sqrt2 - math.sqrt(2)) <= 1e-12 and zero and bright and dt < 5
    verdict(7, "BBV metric properties", ok,
            f"sym={sym} diag={diag} triangle_violations={tri_bad} sqrt2_err={abs(sqrt2 - math.sqrt(2)):.1e} "
            f"constant_bright={bright}, {dt:.2f} s")


def test_c08_sparse_vs_dense_oracle():
    rng = random.Random(8)
    t = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        tr = _sparse_trace(rng, rng.randint(1, 30), 500, 25)
        keys = sorted({k for v in tr.vectors for k in v.counts})
        dense = [[v.counts.get(k, 0.0) for k in keys] for v in tr.vectors]
        D = distance_matrix(tr).values
        for i, a in enumerate(dense):
            for j, b in enumerate(dense):
                want = math.sqrt(math.fsum((x - y) ** 2 for x, y in zip(a, b)))
                worst = max(worst, abs(D[i, j] - want))
    dt = time.perf_counter() - t
    verdict(8, "sparse-vs-dense oracle", worst <= 1e-9 and dt < 5, f"max abs err {worst:.2e}, {dt:.2f} s")


def test_c09_topdown_fixtures():
    t = time.perf_counter()
    rows = list(csv.DictReader(open(FIXTURES / "topdown_tables.csv")))
    off = []
    for r in rows:
        total = sum(float(r[k]) for k in ("frontend", "backend", "lost", "retiring"))
        if abs(total - 1.0) > 0.02 + 1e-9:
            off.append(f"{r['benchmark']} sums to {total:.2f}")
    b = topdown_level1(312, 100, 100, 37, 34, 5)
    residual_ok = abs(b.backend - 0.24) < 1e-12
    dt = time.perf_counter() - t
    verdict(9, "top-down fixtures", not off and residual_ok and dt < 1.0,
            f"{len(rows)} rows, stockfish backend={b.backend:.2f}" + ("; " + "; ".join(off) if off else ""))


def test_c10_resampling_conservation():
    rng = random.Random(10)
    t = time.perf_counter()
    bad = 0
    for _ in range(100):
        i, c = rng.randint(0, 10**6), rng.randint(0, 10**6)
        pts = [CounterSample(i, c)]
        for _ in range(rng.randint(1, 50)):
            di = rng.randint(1, 10**7)
            i += di
            c += rng.randint(max(1, di // 8), 4 * di)
            pts.append(CounterSample(i, c))
        s = resample_to_instructions(pts, rng.randint(10**4, 10**7))
        if sum(s.instructions) != pts[-1].instructions - pts[0].instructions or \
                sum(s.cycles) != pts[-1].cycles - pts[0].cycles:
            bad += 1
    # two phases: IPC 4 for 2e9 instructions, then IPC 1; samples every 1e8 cycles
    pts, i, c = [CounterSample(0, 0)], 0, 0
    for ipc in (4, 1):
        for _ in range(2_000_000_000 // (ipc * 100_000_000)):
            i, c = i + ipc * 100_000_000, c + 100_000_000
            pts.append(CounterSample(i, c))
    s = resample_to_instructions(pts, 50_000_000)
    half = len(s) // 2
    ipc1 = [x.ipc for x in s.breakdown[:half]]
    ipc2 = [x.ipc for x in s.breakdown[half:]]
    phase_ok = all(abs(v - 4) <= 0.08 for v in ipc1) and all(abs(v - 1) <= 0.02 for v in ipc2)
    dt = time.perf_counter() - t
    verdict(10, "resampling conservation", bad == 0 and phase_ok and dt < 2,
            f"{bad} non-conserving streams, IPC {statistics.mean(ipc1):.3f} then {statistics.mean(ipc2):.3f}, "
            f"{dt:.2f} s")


def test_c11_energy_fixtures():
    t = time.perf_counter()
    const = integrate_energy([(0, 100), (10, 100)], (0, 10))
    ramp = integrate_energy([(0, 0), (10, 100)], (0, 10))
    clipped = integrate_energy([(0, 0), (10, 100)], (2, 4))
    dt = time.perf_counter() - t
    ok = const == 1000.0 and ramp == 500.0 and abs(clipped - 60.0) <= 1e-12 and dt < 1e-3
    verdict(11, "energy fixtures", ok, f"{const} J, {ramp} J, clipped {clipped} J, {dt * 1e3:.3f} ms")


def _rand_output(rng):
    lines = []
    for _ in range(rng.randint(0, 15)):
        toks = [f"{rng.uniform(-1e4, 1e4):.{rng.randint(0, 10)}g}" if rng.random() < 0.6
                else rng.choice(["step", "=", "NaN", "res:", "ok", "-"]) for _ in range(rng.randint(0, 8))]
        lines.append(" ".join(toks))
    return "\n".join(lines) + "\n"


def test_c12_validator_properties(tmp_path):
    rng = random.Random(12)
    t = time.perf_counter()
    refl_bad = 0
    for n in range(100):
        p = tmp_path / f"f{n}.txt"
        p.write_text(_rand_output(rng))
        for rule in (ToleranceRule("exact"), ToleranceRule("numeric", 0.0, 0.0)):
            if compare_outputs(tmp_path, [(p.name, p)], rule).status != "pass":
                refl_bad += 1
    mono_bad = 0
    g, a = tmp_path / "g.txt", tmp_path / "a.txt"
    for _ in range(1000):
        gv = rng.uniform(-1e3, 1e3)
        g.write_text(f"{gv!r}\n")
        a.write_text(f"{gv + rng.uniform(-1, 1) * 10 ** rng.randint(-6, 1)!r}\n")
        at, rt = rng.uniform(0, 1e-2), rng.uniform(0, 1e-3)
        tight = compare_outputs(tmp_path, [("a.txt", g)], ToleranceRule("numeric", at, rt)).status
        loose = compare_outputs(tmp_path, [("a.txt", g)],
                                ToleranceRule("numeric", at + rng.uniform(0, 1), rt + rng.uniform(0, 1))).status
        if tight == "pass" and loose != "pass":
            mono_bad += 1
    g.write_text("1.000\n")
    a.write_text("1.0004\n")
    fixture = compare_outputs(tmp_path, [("a.txt", g)], ToleranceRule("numeric", 0.0, 1e-3)).status
    dt = time.perf_counter() - t
    verdict(12, "validator properties", refl_bad == 0 and mono_bad == 0 and fixture == "pass" and dt < 2,
            f"reflexivity failures {refl_bad}, monotonicity failures {mono_bad}, fixture {fixture}, {dt:.2f} s")


def test_c13_rendering_determinism(tmp_path):
    ids = ["x", "y", "z"]
    cfg = plain_suite(ids, solos=[1, 1, 1])
    log = log_from_schedule(make_rrr_schedule(3, 4, RRRParams(2, 1)), ids,
                            lambda b, c, it: 1.0 + 0.1 * c + 0.01 * it, R=3)
    D = distance_matrix(_sparse_trace(random.Random(13), 50, 400, 30))
    t = time.perf_counter()
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        d.mkdir()
        timeplot_svg(log, d / "t.svg")
        recurrence_image(D, d / "r.pgm")
        (d / "report.txt").write_text(format_raw_report(score_suite(log, cfg), host=log.host, params=log.params))
        outs.append([(d / n).read_bytes() for n in ("t.svg", "r.pgm", "report.txt")])
    dt = time.perf_counter() - t
    verdict(13, "rendering determinism", outs[0] == outs[1] and dt < 2, f"{dt:.3f} s")


def test_c14_rrr_metrics_identities():
    t = time.perf_counter()
    eq = multiprogram_aggregates([1.7] * 6)
    fx = multiprogram_aggregates([1.0, 2.0])
    dt = time.perf_counter() - t
    ok = (eq["fairness"] == 1.0 and abs(eq["antt"] - 1.7) <= 1e-15 and fx["fairness"] == 0.5
          and fx["antt"] == 1.5 and abs(fx["hmean_speedup"] - 2 / 3) <= 1e-15 and dt < 1e-3)
    verdict(14, "RRR metrics identities", ok,
            f"fairness {fx['fairness']}, ANTT {fx['antt']}, hmean {fx['hmean_speedup']:.6f}, {dt * 1e3:.3f} ms")
