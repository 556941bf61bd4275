import json
from importlib import resources

import numpy as np
import pytest

from gdmkit.gdm import CIVector
from gdmkit.model import build_model, default_model


def packaged_model(name):
    text = resources.files("gdmkit.models").joinpath(f"{name}.json").read_text()
    return build_model(json.loads(text))


def random_civector(K, N, seed, complex_=True):
    from math import comb

    rng = np.random.default_rng(seed)
    c = rng.normal(size=comb(K, N))
    if complex_:
        c = c + 1j * rng.normal(size=c.size)
    return CIVector(c / np.linalg.norm(c), N, K)


@pytest.fixture(scope="session")
def model():
    return default_model()


@pytest.fixture(scope="session")
def crossing_model():
    return packaged_model("crossing")


@pytest.fixture(scope="session")
def dimer():
    return packaged_model("hubbard_dimer")


@pytest.fixture
def free_chain():
    """Four sites, no nuclei, no interaction."""
    return build_model({"n_sites": 4, "interaction": {"type": "none", "strength": 0.0}, "perturbation_seed": 5})


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for line in results:
            terminalreporter.write_line(line)
