"""Benchmark harness for homogeneous rate and rolling round-robin rate runs,
with scoring, validation, BBV recurrence and top-down perf-series analysis."""

__version__ = "0.1.0"
