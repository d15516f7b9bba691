import numpy as np
import pytest

from tracelab.spectra import Spectrum


def test_validation():
    with pytest.raises(ValueError):
        Spectrum(np.array([2.0, 1.0]))  # not ascending
    with pytest.raises(ValueError):
        Spectrum(np.array([-1.0, 2.0]))  # not positive
    with pytest.raises(ValueError):
        Spectrum(np.array([]))


def test_counting_and_truncation():
    s = Spectrum(np.array([1.0, 2.0, 3.0, 5.0]))
    assert s.counting([0.5, 2.0, 10.0]).tolist() == [0.0, 2.0, 4.0]
    t = s.truncated(3.0)
    assert t.k == 3
    with pytest.raises(ValueError):
        s.truncated(0.5)


def test_csv_round_trip(tmp_path):
    s = Spectrum(np.array([1.5, 2.5]), convergence=np.array([1e-6, 2e-6]))
    path = tmp_path / "spec.csv"
    s.write_csv(path)
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "index,eigenvalue,convergence_estimate"
    assert float(rows[1].split(",")[1]) == 1.5


def test_summary_fields():
    s = Spectrum(np.array([1.0, 4.0]), reliability_cutoff=3.0)
    summary = s.summary()
    assert summary["k"] == 2
    assert summary["reliability_cutoff"] == 3.0
    assert summary["lowest"] == 1.0
