"""Randomized coordinate descent with volume sampling."""

import json

from ._rcdvs import (
    Error,
    Objective,
    acceleration_ratio,
    b_tau,
    elementary_symmetric,
    expected_step_matrix,
    gen_huber,
    gen_quadratic,
    modulus_quadratic,
    quadratic,
    reference_min,
    ridge,
    run_experiment,
    separable,
    smoothed_norm,
    solve,
    sparse2_sample,
    sum_principal_minors,
    volume_probabilities,
    volume_sample,
)


def experiment_table(**kwargs):
    """run_experiment with JSON output, decoded."""
    kwargs["format"] = "json"
    return json.loads(run_experiment(**kwargs))


__all__ = [
    "Error",
    "Objective",
    "acceleration_ratio",
    "b_tau",
    "elementary_symmetric",
    "expected_step_matrix",
    "experiment_table",
    "gen_huber",
    "gen_quadratic",
    "modulus_quadratic",
    "quadratic",
    "reference_min",
    "ridge",
    "run_experiment",
    "separable",
    "smoothed_norm",
    "solve",
    "sparse2_sample",
    "sum_principal_minors",
    "volume_probabilities",
    "volume_sample",
]
