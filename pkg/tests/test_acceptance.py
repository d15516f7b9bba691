"""Acceptance suite: each criterion from the registry must pass.

The shared session-scoped cache keeps the expensive spectra (wide-box 2D
solves, the refined-grid companion, the homotopy ladder) computed once.
"""

import json

import pytest

from tracelab.acceptance import CRITERIA


def _run(cid, artifacts):
    result = CRITERIA[cid](artifacts)
    assert result.passed, (
        f"criterion {cid} ({result.name}) failed:\n"
        + json.dumps(result.details, indent=2, default=str)
    )
    return result


def test_criterion_01_harmonic_benchmark(artifacts):
    _run(1, artifacts)


def test_criterion_02_airy_benchmark(artifacts):
    _run(2, artifacts)


def test_criterion_03_coupling_scaling(artifacts):
    _run(3, artifacts)


def test_criterion_04_trace_bound_chain(artifacts):
    _run(4, artifacts)


def test_criterion_05_log_volume_lemma(artifacts):
    _run(5, artifacts)


def test_criterion_06_path_integral_consistency(artifacts):
    _run(6, artifacts)


def test_criterion_07_distinct_exponent_power(artifacts):
    result = _run(7, artifacts)
    assert abs(result.details["fitted_power"] - 2.5) <= 0.15


def test_criterion_08_equal_exponent_log_law(artifacts):
    result = _run(8, artifacts)
    assert result.details["ratio_trending_to_1"]


def test_criterion_09_prefactor_adjudication(artifacts):
    result = _run(9, artifacts)
    assert result.details["verdict"] == "sliced"


def test_criterion_10_dirichlet_homotopy(artifacts):
    result = _run(10, artifacts)
    assert result.details["final_gap"] < 0.05


def test_criterion_11_tauberian_numerics(artifacts):
    _run(11, artifacts)


def test_criterion_12_constant_cross_checks(artifacts):
    _run(12, artifacts)
