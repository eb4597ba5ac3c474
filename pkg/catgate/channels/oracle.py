"""Explicit two-mode beamsplitter simulation of loss and photon subtraction.

Slow reference for the Kraus fast path in ``catgate.channels.gate``. The
beamsplitter conserves total photon number, so for inputs supported on
n <= N the truncated two-mode unitary is exact.
"""

import logging
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from catgate.channels.gate import ChannelOutput, normalize_branch
from catgate.exceptions import ConfigError
from catgate.fock.core import DensityOperator, annihilation

logger = logging.getLogger(__name__)


@lru_cache(maxsize=16)
def beamsplitter_unitary(T: float, cutoff: int, convention: int = 1) -> np.ndarray:
    """U = exp(theta (a^dagger b - a b^dagger)), cos(theta) = sqrt(T).

    ``convention=-1`` flips the sign of theta (the mirrored phase choice).
    """
    if convention not in (1, -1):
        raise ConfigError(f"convention must be +1 or -1, got {convention}")
    if not 0.0 < T <= 1.0:
        raise ConfigError(f"transmissivity must be in (0, 1], got {T}")
    a = annihilation(cutoff).matrix
    eye = np.eye(cutoff + 1)
    mode_a = np.kron(a, eye)
    mode_b = np.kron(eye, a)
    theta = convention * np.arccos(np.sqrt(T))
    generator = theta * (mode_a.conj().T @ mode_b - mode_a @ mode_b.conj().T)
    unitary = expm(generator)
    unitary.flags.writeable = False
    logger.debug(f"Built beamsplitter unitary T={T}, cutoff={cutoff}, convention={convention:+d}")
    return unitary


def _mix_with_vacuum(rho: DensityOperator, T: float, convention: int) -> np.ndarray:
    d = rho.cutoff + 1
    vac = np.zeros((d, d), dtype=np.complex128)
    vac[0, 0] = 1.0
    unitary = beamsplitter_unitary(T, rho.cutoff, convention)
    joint = np.kron(rho.matrix, vac)
    return unitary @ joint @ unitary.conj().T


def _trace_out_b(matrix: np.ndarray, cutoff: int) -> np.ndarray:
    d = cutoff + 1
    return np.einsum("abcb->ac", matrix.reshape(d, d, d, d))


def oracle_loss(rho: DensityOperator, transmission: float, convention: int = 1) -> DensityOperator:
    """Loss as a beamsplitter with a vacuum ancilla that is then discarded."""
    if transmission == 1.0:
        return rho
    sigma = _mix_with_vacuum(rho, transmission, convention)
    return DensityOperator(rho.cutoff, _trace_out_b(sigma, rho.cutoff), normalized=rho.normalized)


def oracle_subtract_good(
    rho: DensityOperator,
    T: float,
    eta: float = 1.0,
    convention: int = 1,
) -> ChannelOutput:
    """Tr_B[b U (rho x |0><0|) U^dagger b^dagger], preceded by a loss eta."""
    if rho.modes != 1:
        raise ConfigError("oracle_subtract_good takes a single-mode state")
    if eta < 1.0:
        rho = oracle_loss(rho, eta, convention)
    sigma = _mix_with_vacuum(rho, T, convention)
    click = np.kron(np.eye(rho.cutoff + 1), annihilation(rho.cutoff).matrix)
    heralded = click @ sigma @ click.conj().T
    return normalize_branch(rho.cutoff, _trace_out_b(heralded, rho.cutoff))
