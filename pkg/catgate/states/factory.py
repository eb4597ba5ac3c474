"""Constructors for every physical state the gate characterization uses.

Coherent states and cat-state qubits (real amplitude alpha), squeezed vacuum
and squeezed single photon, thermal states, the phenomenological (s, h)
squeezer model, and the entangled cat-pair inputs with their targets.
"""

import logging
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln
from scipy.stats import poisson

from catgate.config import settings
from catgate.exceptions import ConfigError, PhysicalityError, TruncationError
from catgate.fock.core import (
    TAIL_TOL,
    DensityOperator,
    FockKet,
    ModeOperator,
    annihilation,
    apply_operator,
    check_truncation,
    ket_from_amplitudes,
    tensor,
)

logger = logging.getLogger(__name__)

CatLabel = Literal["+", "-"]
BellKind = Literal["phi_plus", "psi_plus", "general"]


# ---------------------------------------------------------------------------
# Parameter records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlochPoint:
    """Bloch-sphere coordinates of |psi_{theta,phi}>; theta may be signed."""
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.theta) and np.isfinite(self.phi)):
            raise ConfigError("Bloch angles must be finite")
        if abs(self.theta) > np.pi + 1e-12:
            raise ConfigError(f"theta must lie in [-pi, pi], got {self.theta}")

    def flipped(self) -> "BlochPoint":
        """The ideal gate output |psi_{-theta,phi}>."""
        return BlochPoint(-self.theta, self.phi)


@dataclass(frozen=True)
class SqueezerModel:
    """Phenomenological source: squeezing s = exp(-2r) and parasite gain h."""
    s: float
    h: float = 1.0
    gamma: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.s <= 1.0:
            raise ConfigError(f"squeezing factor s must be in (0, 1], got {self.s}")
        if self.h < 1.0:
            raise ConfigError(f"parasite gain h must be >= 1, got {self.h}")

    @classmethod
    def from_gamma(cls, s: float, gamma: float) -> "SqueezerModel":
        """h = cosh(gamma r) with r = -ln(s)/2."""
        r = -0.5 * np.log(s)
        return cls(s=s, h=float(np.cosh(gamma * r)), gamma=gamma)

    @classmethod
    def from_variances(cls, v_x: float, v_p: float) -> "SqueezerModel":
        """Invert V_x = (hs+h-1)/2, V_p = (h/s+h-1)/2."""
        if v_x <= 0 or v_p <= 0:
            raise ConfigError(f"variances must be positive, got ({v_x}, {v_p})")
        s = (2.0 * v_x + 1.0) / (2.0 * v_p + 1.0)
        h = (2.0 * v_x + 1.0) / (1.0 + s)
        return cls(s=min(s, 1.0), h=max(h, 1.0))

    @property
    def variances(self) -> tuple[float, float]:
        s, h = self.s, self.h
        return (h * s + h - 1.0) / 2.0, (h / s + h - 1.0) / 2.0


@dataclass(frozen=True)
class CatQubitSpec:
    """Coherent amplitude alpha (real, > 0) and the working Fock cutoff."""
    alpha: float
    cutoff: int = 20

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError(
                f"alpha must be > 0, got {self.alpha}: at alpha=0 |alpha> and |-alpha> coincide "
                "and the odd cat has zero norm"
            )
        if self.cutoff < 1:
            raise ConfigError(f"cutoff must be >= 1, got {self.cutoff}")

    @property
    def n_plus(self) -> float:
        return 1.0 / np.sqrt(2.0 * (1.0 + np.exp(-2.0 * self.alpha ** 2)))

    @property
    def n_minus(self) -> float:
        return 1.0 / np.sqrt(2.0 * (1.0 - np.exp(-2.0 * self.alpha ** 2)))

    def norm_constant(self, label: CatLabel) -> float:
        return self.n_plus if label == "+" else self.n_minus

    def c(self, mu: CatLabel, nu: CatLabel) -> float:
        """c_{mu nu} = N_mu^2 / N_nu^2."""
        return self.norm_constant(mu) ** 2 / self.norm_constant(nu) ** 2


def opposite(label: CatLabel) -> CatLabel:
    return "-" if label == "+" else "+"


def required_cutoff(alpha: float, minimum: Optional[int] = None) -> int:
    """Smallest cutoff whose top two levels hold < TAIL_TOL/10 of |alpha>."""
    cutoff = settings.DEFAULT_CUTOFF if minimum is None else minimum
    mean = alpha ** 2
    while poisson.sf(cutoff - 2, mean) >= TAIL_TOL / 10.0:
        cutoff += 1
    return cutoff


def _padded_dimension(cutoff: int) -> int:
    return 2 * cutoff + 20


def _squeeze_matrix(r: float, dim: int) -> np.ndarray:
    """S(r) = exp(r/2 (a^2 - a^dagger^2)) on a dim-level space."""
    a = annihilation(dim - 1).matrix
    generator = 0.5 * r * (a @ a - a.T @ a.T)
    return expm(generator)


def _truncate_ket(full: np.ndarray, cutoff: int, label: str) -> FockKet:
    probs = np.abs(full) ** 2
    tail = float(probs[cutoff - 1:].sum())
    if tail >= TAIL_TOL:
        raise TruncationError(
            f"{label} needs a larger cutoff than {cutoff}: top-level weight {tail:.3e}"
        )
    return ket_from_amplitudes(cutoff, full[: cutoff + 1])


# ---------------------------------------------------------------------------
# Single-mode kets
# ---------------------------------------------------------------------------

def fock(n: int, cutoff: int) -> FockKet:
    if not 0 <= n <= cutoff:
        raise ConfigError(f"photon number {n} outside [0, {cutoff}]")
    amps = np.zeros(cutoff + 1, dtype=np.complex128)
    amps[n] = 1.0
    return FockKet(cutoff, amps)


def vacuum(cutoff: int) -> FockKet:
    return fock(0, cutoff)


def coherent(alpha: float, cutoff: int) -> FockKet:
    """c_n = exp(-alpha^2/2) alpha^n / sqrt(n!) for real alpha."""
    n = np.arange(cutoff + 1)
    if alpha == 0:
        return vacuum(cutoff)
    magnitude = np.exp(-0.5 * alpha ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1))
    sign = np.where((alpha < 0) & (n % 2 == 1), -1.0, 1.0)
    ket = FockKet(cutoff, sign * magnitude, normalized=False)
    check_truncation(ket, f"coherent state alpha={alpha}")
    return ket_from_amplitudes(cutoff, ket.amplitudes)


def cat(spec: CatQubitSpec, point: BlochPoint) -> FockKet:
    """|psi_{theta,phi}> ~ cos(theta/2)|alpha> + e^{i phi} sin(theta/2)|-alpha>."""
    plus = coherent(spec.alpha, spec.cutoff).amplitudes
    minus = coherent(-spec.alpha, spec.cutoff).amplitudes
    amps = (
        np.cos(point.theta / 2.0) * plus
        + np.exp(1j * point.phi) * np.sin(point.theta / 2.0) * minus
    )
    return ket_from_amplitudes(spec.cutoff, amps)


def parity_cat(spec: CatQubitSpec, label: CatLabel) -> FockKet:
    """|+> (even) or |-> (odd) with exact parity."""
    plus = coherent(spec.alpha, spec.cutoff).amplitudes
    minus = coherent(-spec.alpha, spec.cutoff).amplitudes
    amps = plus + minus if label == "+" else plus - minus
    return ket_from_amplitudes(spec.cutoff, amps)


def squeezed_vacuum(s: float, cutoff: int) -> FockKet:
    """S(r)|0> with s = exp(-2r); Var(x) = s/2, Var(p) = 1/(2s)."""
    if not 0.0 < s <= 1.0:
        raise ConfigError(f"squeezing factor s must be in (0, 1], got {s}")
    r = -0.5 * np.log(s)
    full = _squeeze_matrix(r, _padded_dimension(cutoff))[:, 0]
    return _truncate_ket(full, cutoff, f"squeezed vacuum s={s}")


def squeezed_photon(s: float, cutoff: int) -> FockKet:
    """S(r)|1>, the ideal photon-subtracted squeezed vacuum."""
    if not 0.0 < s <= 1.0:
        raise ConfigError(f"squeezing factor s must be in (0, 1], got {s}")
    r = -0.5 * np.log(s)
    full = _squeeze_matrix(r, _padded_dimension(cutoff))[:, 1]
    return _truncate_ket(full, cutoff, f"squeezed photon s={s}")


# ---------------------------------------------------------------------------
# Mixed Gaussian states
# ---------------------------------------------------------------------------

def _thermal_diagonal(nbar: float, dim: int) -> np.ndarray:
    n = np.arange(dim)
    if nbar == 0:
        diag = np.zeros(dim)
        diag[0] = 1.0
        return diag
    return (nbar ** n) / (nbar + 1.0) ** (n + 1)


def thermal(nbar: float, cutoff: int) -> DensityOperator:
    if nbar < 0:
        raise ConfigError(f"mean photon number must be >= 0, got {nbar}")
    diag = _thermal_diagonal(nbar, cutoff + 1)
    rho = DensityOperator(cutoff, np.diag(diag), normalized=False)
    check_truncation(rho, f"thermal state nbar={nbar}")
    return rho.normalize()


def gaussian_model_state(model: SqueezerModel, cutoff: int) -> DensityOperator:
    """Squeezed thermal state with V_x = (hs+h-1)/2 and V_p = (h/s+h-1)/2."""
    v_x, v_p = model.variances
    product = 4.0 * v_x * v_p
    if product < 1.0 - 1e-12:
        raise PhysicalityError(f"V_x V_p = {product / 4:.6f} < 1/4 is unphysical")
    nbar = 0.5 * (np.sqrt(max(product, 1.0)) - 1.0)
    r_eff = 0.25 * np.log(v_p / v_x)

    dim = _padded_dimension(cutoff)
    diag = _thermal_diagonal(nbar, dim)
    diag /= diag.sum()
    squeeze = _squeeze_matrix(r_eff, dim)
    full = (squeeze * diag) @ squeeze.conj().T

    tail = float(np.real(np.trace(full)) - np.real(np.trace(full[: cutoff - 1, : cutoff - 1])))
    if tail >= TAIL_TOL:
        raise TruncationError(
            f"squeezer model (s={model.s}, h={model.h}) needs a larger cutoff than {cutoff}: "
            f"top-level weight {tail:.3e}"
        )
    block = full[: cutoff + 1, : cutoff + 1]
    block = 0.5 * (block + block.conj().T)
    rho = DensityOperator(cutoff, block, normalized=False).normalize()
    logger.debug(
        f"Gaussian model state s={model.s}, h={model.h}: V_x={v_x:.4f}, V_p={v_p:.4f}, "
        f"nbar={nbar:.4f}, r={r_eff:.4f}"
    )
    return rho


# ---------------------------------------------------------------------------
# Entangled inputs and targets
# ---------------------------------------------------------------------------

def bell_cat(
    spec: CatQubitSpec,
    kind: BellKind = "phi_plus",
    mu: CatLabel = "+",
    phase: float = 0.0,
) -> FockKet:
    """(|+>|mu> + e^{i phase}|->|nu>)/sqrt(2) with |nu> = |-mu>.

    phi_plus is general(mu='+', 0); psi_plus is general(mu='-', 0).
    """
    if kind == "phi_plus":
        mu, phase = "+", 0.0
    elif kind == "psi_plus":
        mu, phase = "-", 0.0
    elif kind != "general":
        raise ConfigError(f"unknown Bell pair kind {kind!r}")
    if mu not in ("+", "-"):
        raise ConfigError(f"mu must be '+' or '-', got {mu!r}")

    plus = parity_cat(spec, "+")
    minus = parity_cat(spec, "-")
    cats = {"+": plus, "-": minus}
    first = tensor(plus, cats[mu]).amplitudes
    second = tensor(minus, cats[opposite(mu)]).amplitudes
    return ket_from_amplitudes(spec.cutoff, first + np.exp(1j * phase) * second, modes=2)


def omega_target(spec: CatQubitSpec, pair: FockKet, arm: Literal["A", "B"] = "B") -> FockKet:
    """|Omega> = (I x a)|pair> / ||(I x a)|pair>||."""
    if pair.modes != 2 or pair.cutoff != spec.cutoff:
        raise ConfigError("omega_target needs a two-mode pair at the cat qubit cutoff")
    return apply_operator(annihilation(spec.cutoff), pair, arm=arm)


def bit_flip_target(spec: CatQubitSpec, pair: FockKet, arm: Literal["A", "B"] = "B") -> FockKet:
    """Pair with |+> and |-> exchanged on ``arm``: the ideal phase-gate output."""
    plus = parity_cat(spec, "+").amplitudes
    minus = parity_cat(spec, "-").amplitudes
    flip = np.outer(plus, minus.conj()) + np.outer(minus, plus.conj())
    return apply_operator(ModeOperator(spec.cutoff, flip), pair, arm=arm)
