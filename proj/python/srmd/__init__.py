"""Sparse random mode decomposition of time series."""

from ._srmd import (
    DEFAULT_SEED,
    Config,
    Decomposition,
    SrmdError,
    benchmark_config,
    benchmarks,
    dbscan,
    decompose,
    generate_benchmark,
    read_signal,
    represent,
    run_benchmark,
    solve_bpdn,
    solve_l1_ball,
    solve_lasso,
)

__all__ = [
    "DEFAULT_SEED",
    "Config",
    "Decomposition",
    "SrmdError",
    "benchmark_config",
    "benchmarks",
    "dbscan",
    "decompose",
    "generate_benchmark",
    "read_signal",
    "represent",
    "run_benchmark",
    "solve_bpdn",
    "solve_l1_ball",
    "solve_lasso",
]
