import pytest

from tracelab.acceptance import ArtifactCache


@pytest.fixture(scope="session")
def artifacts():
    """Shared cache so expensive spectra are computed once per session."""
    return ArtifactCache()
