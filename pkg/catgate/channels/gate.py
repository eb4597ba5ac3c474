"""Conditional photon-subtraction gate.

Beamsplitter convention: a -> sqrt(T) a + sqrt(1-T) b, b -> sqrt(T) b - sqrt(1-T) a,
with the ancilla b in vacuum. Tracing out the reflected mode after the ideal
click b gives the good branch

    E_good(rho) = (1-T) * Loss_T(a rho a^dagger),

and a faulty (uncorrelated) click leaves only the pure loss Loss_T. A
homodyne loss eta before the beamsplitter is folded in using
a Loss_eta(rho) a^dagger = eta Loss_eta(a rho a^dagger), so the good branch
becomes eta (1-T) Loss_{T eta}(a rho a^dagger) and the bad branch Loss_{T eta}.
The explicit two-mode simulation lives in ``catgate.channels.oracle``.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Optional

import numpy as np
from scipy.special import gammaln

from catgate.exceptions import AnnihilatedInputError, ConfigError
from catgate.fock.core import (
    ZERO_NORM,
    Arm,
    DensityOperator,
    FockKet,
    annihilation,
)

logger = logging.getLogger(__name__)

Method = Literal["kraus", "oracle"]


# ---------------------------------------------------------------------------
# Parameters and outputs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GateParams:
    """Device model: transmissivity T, modal purity xi, APD and homodyne efficiencies."""
    T: float
    xi: float = 1.0
    kappa: float = 1.0
    eta: float = 1.0
    cutoff: int = 20

    def __post_init__(self):
        if not 0.0 < self.T < 1.0:
            raise ConfigError(f"transmissivity T must be in (0, 1), got {self.T}")
        if not 0.0 <= self.xi <= 1.0:
            raise ConfigError(f"modal purity xi must be in [0, 1], got {self.xi}")
        if not 0.0 < self.kappa <= 1.0:
            raise ConfigError(f"APD efficiency kappa must be in (0, 1], got {self.kappa}")
        if not 0.0 < self.eta <= 1.0:
            raise ConfigError(f"homodyne efficiency eta must be in (0, 1], got {self.eta}")
        if self.cutoff < 1:
            raise ConfigError(f"cutoff must be >= 1, got {self.cutoff}")

    @property
    def effective_kappa(self) -> float:
        """APD efficiency after the kappa/eta substitution."""
        return self.kappa / self.eta


@dataclass(frozen=True)
class ChannelOutput:
    """Normalized branch output plus the unnormalized trace (heralding weight).

    ``state`` is None when the input was annihilated (weight below ZERO_NORM).
    """
    state: Optional[DensityOperator]
    weight: float

    @property
    def annihilated(self) -> bool:
        return self.state is None


# ---------------------------------------------------------------------------
# Kraus tables
# ---------------------------------------------------------------------------

def _read_only(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@lru_cache(maxsize=64)
def loss_kraus(t: float, cutoff: int) -> np.ndarray:
    """Pure-loss Kraus operators A_k, stacked as (k, n_out, n_in).

    A_k|n> = sqrt(C(n, k)) t^{(n-k)/2} (1-t)^{k/2} |n-k>.
    """
    if not 0.0 < t <= 1.0:
        raise ConfigError(f"transmission must be in (0, 1], got {t}")
    d = cutoff + 1
    if t == 1.0:
        return _read_only(np.eye(d, dtype=np.complex128)[None, :, :])
    ops = np.zeros((d, d, d), dtype=np.complex128)
    for k in range(d):
        n = np.arange(k, d)
        log_binom = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
        ops[k, n - k, n] = np.exp(
            0.5 * log_binom + 0.5 * (n - k) * np.log(t) + 0.5 * k * np.log1p(-t)
        )
    return _read_only(ops)


@lru_cache(maxsize=64)
def good_kraus(T: float, eta: float, cutoff: int) -> np.ndarray:
    """sqrt(eta (1-T)) A_k(T eta) a: the heralded branch, unnormalized."""
    a = annihilation(cutoff).matrix
    ops = np.sqrt(eta * (1.0 - T)) * (loss_kraus(T * eta, cutoff) @ a)
    return _read_only(ops)


def bad_kraus(T: float, eta: float, cutoff: int) -> np.ndarray:
    return loss_kraus(T * eta, cutoff)


def apply_channel(matrix: np.ndarray, kraus: np.ndarray) -> np.ndarray:
    """sum_k K_k M K_k^dagger for any square operator M (Hermitian or not)."""
    return np.sum(kraus @ matrix @ np.conj(np.transpose(kraus, (0, 2, 1))), axis=0)


def normalize_branch(cutoff: int, matrix: np.ndarray, modes: int = 1) -> ChannelOutput:
    weight = float(np.real(np.trace(matrix)))
    if weight < ZERO_NORM:
        return ChannelOutput(state=None, weight=max(weight, 0.0))
    state = DensityOperator(cutoff, matrix / weight, modes=modes)
    return ChannelOutput(state=state, weight=weight)


def _require_single_mode(rho: DensityOperator) -> None:
    if rho.modes != 1:
        raise ConfigError("single-mode channel applied to a two-mode state; use gate_on_arm")


# ---------------------------------------------------------------------------
# Single-mode channels
# ---------------------------------------------------------------------------

def loss_channel(rho: DensityOperator, transmission: float) -> DensityOperator:
    """Pure loss: mixes the mode with vacuum on a beamsplitter of given transmission."""
    _require_single_mode(rho)
    if transmission == 1.0:
        return rho
    out = apply_channel(rho.matrix, loss_kraus(transmission, rho.cutoff))
    return DensityOperator(rho.cutoff, out, normalized=rho.normalized)


def subtract_good(
    rho: DensityOperator,
    T: float,
    eta: float = 1.0,
    method: Method = "kraus",
) -> ChannelOutput:
    """Heralded photon subtraction on a beamsplitter of transmissivity T.

    Args:
        rho: Normalized single-mode input.
        T: Beamsplitter transmissivity in (0, 1).
        eta: Homodyne efficiency, applied as a loss before the beamsplitter.
        method: "kraus" for the single-mode fast path, "oracle" for the
            explicit two-mode beamsplitter simulation.

    Returns:
        ChannelOutput whose weight is the unnormalized trace; state is None
        when nothing can be subtracted (e.g. vacuum input).
    """
    _require_single_mode(rho)
    if not 0.0 < T < 1.0:
        raise ConfigError(f"transmissivity T must be in (0, 1), got {T}")
    if method == "oracle":
        from catgate.channels.oracle import oracle_subtract_good

        return oracle_subtract_good(rho, T, eta=eta)
    if method != "kraus":
        raise ConfigError(f"unknown subtraction method {method!r}")
    out = apply_channel(rho.matrix, good_kraus(T, eta, rho.cutoff))
    return normalize_branch(rho.cutoff, out)


def subtract_bad(rho: DensityOperator, T: float, eta: float = 1.0) -> ChannelOutput:
    """Faulty trigger: the click carries no information, the signal only loses light."""
    _require_single_mode(rho)
    if not 0.0 < T <= 1.0:
        raise ConfigError(f"transmissivity T must be in (0, 1], got {T}")
    return ChannelOutput(state=loss_channel(rho, T * eta), weight=1.0)


def subtract_ideal(rho: DensityOperator) -> DensityOperator:
    """a rho a^dagger normalized: the T -> 1 limit of the good branch."""
    _require_single_mode(rho)
    a = annihilation(rho.cutoff).matrix
    out = normalize_branch(rho.cutoff, a @ rho.matrix @ a.conj().T)
    if out.annihilated:
        raise AnnihilatedInputError("photon subtraction annihilated the input")
    return out.state


def gate_branches(rho: DensityOperator, p: GateParams) -> tuple[ChannelOutput, ChannelOutput]:
    if rho.cutoff != p.cutoff:
        raise ConfigError(f"cutoff mismatch: state {rho.cutoff}, gate {p.cutoff}")
    return subtract_good(rho, p.T, p.eta), subtract_bad(rho, p.T, p.eta)


def _mix(good: ChannelOutput, bad: ChannelOutput, xi: float, cutoff: int, modes: int) -> DensityOperator:
    if xi > 0.0 and good.annihilated:
        raise AnnihilatedInputError(
            f"good branch annihilated the input (weight {good.weight:.3e}) while xi = {xi}"
        )
    if xi == 0.0:
        return bad.state
    if xi == 1.0:
        return good.state
    mixed = xi * good.state.matrix + (1.0 - xi) * bad.state.matrix
    return DensityOperator(cutoff, mixed, modes=modes)


def gate(rho: DensityOperator, p: GateParams) -> DensityOperator:
    """xi * normalized good branch + (1 - xi) * normalized bad branch."""
    good, bad = gate_branches(rho, p)
    return _mix(good, bad, p.xi, rho.cutoff, modes=1)


def success_probability(rho: DensityOperator, p: GateParams) -> float:
    """Relative heralding rate kappa_eff * Tr[E_good(rho)], kappa_eff = kappa/eta."""
    kappa_eff = p.effective_kappa
    if kappa_eff > 1.0:
        raise ConfigError(f"kappa/eta = {kappa_eff:.4f} exceeds 1; the substitution is invalid")
    good = subtract_good(rho, p.T, p.eta)
    return kappa_eff * good.weight


def double_subtraction(rho0: DensityOperator, p0: GateParams, p1: GateParams) -> DensityOperator:
    """Two gates in sequence: squeezed vacuum -> squeezed photon -> subtracted squeezed photon."""
    return gate(gate(rho0, p0), p1)


# ---------------------------------------------------------------------------
# One arm of a two-mode state
# ---------------------------------------------------------------------------

def _ket_branch(psi2: FockKet, kraus: np.ndarray, arm: Arm) -> ChannelOutput:
    grid = psi2.amplitude_matrix()
    if arm == "A":
        images = kraus @ grid
    elif arm == "B":
        images = grid @ np.transpose(kraus, (0, 2, 1))
    else:
        raise ConfigError(f"arm must be 'A' or 'B', got {arm!r}")
    vectors = images.reshape(images.shape[0], -1)
    matrix = vectors.T @ vectors.conj()
    return normalize_branch(psi2.cutoff, matrix, modes=2)


def gate_on_arm_branches(
    psi2: FockKet, p: GateParams, arm: Arm = "B"
) -> tuple[ChannelOutput, ChannelOutput]:
    """(I x E_good)(|psi><psi|) and (I x E_bad)(|psi><psi|), each branch-normalized."""
    if psi2.modes != 2 or not psi2.normalized:
        raise ConfigError("gate_on_arm needs a normalized two-mode ket")
    if psi2.cutoff != p.cutoff:
        raise ConfigError(f"cutoff mismatch: state {psi2.cutoff}, gate {p.cutoff}")
    good = _ket_branch(psi2, good_kraus(p.T, p.eta, p.cutoff), arm)
    bad = _ket_branch(psi2, bad_kraus(p.T, p.eta, p.cutoff), arm)
    return good, bad


def gate_on_arm(psi2: FockKet, p: GateParams, arm: Arm = "B") -> DensityOperator:
    """chi = (I x E)(|psi><psi|) with the gate acting on ``arm``."""
    good, bad = gate_on_arm_branches(psi2, p, arm)
    return _mix(good, bad, p.xi, psi2.cutoff, modes=2)
