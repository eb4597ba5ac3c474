"""Shared pytest fixtures for catgate tests."""

from pathlib import Path

import numpy as np
import pytest
from dotenv import load_dotenv

from catgate.channels.gate import GateParams
from catgate.fock.core import DensityOperator
from catgate.states.factory import CatQubitSpec, SqueezerModel

# Load .env from the repo root so CATGATE_* overrides apply to every test
load_dotenv(Path(__file__).resolve().parents[2] / ".env")


def _random_density(rng: np.random.Generator, cutoff: int, rank: int = 3) -> DensityOperator:
    """Random mixed state of the given rank on |0>..|cutoff>."""
    d = cutoff + 1
    amps = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    mat = amps @ amps.conj().T
    mat = 0.5 * (mat + mat.conj().T)
    return DensityOperator(cutoff, mat / np.real(np.trace(mat)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_density():
    """Return a factory for random density operators."""
    return _random_density


@pytest.fixture
def reference_spec():
    """Cat qubit with alpha = 0.92 at the default cutoff."""
    return CatQubitSpec(alpha=0.92, cutoff=20)


@pytest.fixture
def reference_gate():
    """T = 0.9, xi = 0.83, ideal detectors."""
    return GateParams(T=0.9, xi=0.83, cutoff=20)


@pytest.fixture
def reference_squeezer():
    return SqueezerModel(s=0.5, h=1.05)
