import numpy as np
import pytest

from nmkdv import fixtures


@pytest.fixture(autouse=True)
def nmkdv_home(tmp_path, monkeypatch):
    """Keeps config and journal writes inside the test's temp directory."""
    home = tmp_path / "home"
    monkeypatch.setenv("NMKDV_HOME", str(home))
    return home


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def radiation():
    return fixtures.radiation_scattering()


@pytest.fixture(scope="session")
def one_pole():
    return fixtures.one_pole()


@pytest.fixture(scope="session")
def perturbed():
    return fixtures.perturbed_datum()
