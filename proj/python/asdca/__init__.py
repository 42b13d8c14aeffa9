"""Accelerated mini-batch stochastic dual coordinate ascent."""

from ._core import (
    Dataset,
    Loss,
    Problem,
    compute_theta,
    dominating_factor,
    examples_processed_table,
    generate_synthetic,
    iteration_cost,
    iteration_table,
    load_libsvm,
    parse_libsvm,
    recommend,
    run,
    serialize_libsvm,
    solve_reference,
    verify_theorem1,
)

__all__ = [
    "Dataset",
    "Loss",
    "Problem",
    "compute_theta",
    "dominating_factor",
    "examples_processed_table",
    "generate_synthetic",
    "iteration_cost",
    "iteration_table",
    "load_libsvm",
    "parse_libsvm",
    "recommend",
    "run",
    "serialize_libsvm",
    "solve_reference",
    "verify_theorem1",
]
