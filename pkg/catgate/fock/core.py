"""Truncated-Fock-space linear algebra.

Kets, density operators and mode operators live on the space spanned by
|0>, ..., |N> for one mode, or its tensor square for two modes (mode A is the
left tensor factor). Every object is immutable after construction; the
operations below are pure functions.

Quadrature convention: x = (a + a^dagger)/sqrt(2), vacuum variance 1/2.
"""

import logging
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

from catgate.exceptions import (
    ConfigError,
    PhysicalityError,
    TruncationError,
    ZeroNormError,
)

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
NORM_TOL = 1e-12
TAIL_TOL = 1e-8
ZERO_NORM = 1e-12

Arm = Literal["A", "B"]


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=np.complex128, copy=True)
    out.flags.writeable = False
    return out


def _dimension(cutoff: int, modes: int) -> int:
    return (cutoff + 1) ** modes


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FockKet:
    """A state vector; index n is the photon number (row-major for two modes)."""
    cutoff: int
    amplitudes: np.ndarray
    modes: int = 1
    normalized: bool = True

    def __post_init__(self):
        if self.cutoff < 1:
            raise ConfigError(f"cutoff must be >= 1, got {self.cutoff}")
        if self.modes not in (1, 2):
            raise ConfigError(f"only one- and two-mode kets are supported, got {self.modes}")
        amps = _frozen(self.amplitudes).reshape(-1)
        amps.flags.writeable = False
        if amps.size != _dimension(self.cutoff, self.modes):
            raise ConfigError(
                f"ket of length {amps.size} does not match cutoff {self.cutoff} "
                f"for {self.modes} mode(s)"
            )
        if not np.all(np.isfinite(amps)):
            raise PhysicalityError("ket amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amps)

        norm2 = self.norm_squared
        if self.normalized and abs(norm2 - 1.0) >= NORM_TOL:
            raise PhysicalityError(f"ket flagged normalized has norm^2 = {norm2:.15f}")
        if not self.normalized and norm2 > 1.0 + NORM_TOL:
            raise PhysicalityError(f"unnormalized ket has norm^2 = {norm2} > 1")

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm_squared(self) -> float:
        return float(np.real(np.vdot(self.amplitudes, self.amplitudes)))

    def amplitude_matrix(self) -> np.ndarray:
        """Two-mode amplitudes as a (d, d) matrix indexed [n_A, n_B]."""
        if self.modes != 2:
            raise ConfigError("amplitude_matrix is defined for two-mode kets only")
        d = self.cutoff + 1
        return self.amplitudes.reshape(d, d)

    def tail_weight(self) -> float:
        """Probability carried by the two highest Fock levels (per mode)."""
        probs = np.abs(self.amplitudes) ** 2
        if self.modes == 1:
            return float(probs[-2:].sum())
        d = self.cutoff + 1
        grid = probs.reshape(d, d)
        return float(max(grid[-2:, :].sum(), grid[:, -2:].sum()))


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, positive semidefinite matrix; trace 1 unless flagged unnormalized.

    Negative eigenvalues within PSD_TOL of zero are clipped and the trace
    restored; anything more negative is a PhysicalityError.
    """
    cutoff: int
    matrix: np.ndarray
    modes: int = 1
    normalized: bool = True

    def __post_init__(self):
        if self.cutoff < 1:
            raise ConfigError(f"cutoff must be >= 1, got {self.cutoff}")
        mat = np.array(self.matrix, dtype=np.complex128, copy=True)
        dim = _dimension(self.cutoff, self.modes)
        if mat.shape != (dim, dim):
            raise ConfigError(
                f"density matrix of shape {mat.shape} does not match cutoff "
                f"{self.cutoff} for {self.modes} mode(s)"
            )
        if not np.all(np.isfinite(mat)):
            raise PhysicalityError("density matrix entries must be finite")

        asym = np.max(np.abs(mat - mat.conj().T))
        if asym >= HERMITIAN_TOL:
            raise PhysicalityError(f"density matrix is not Hermitian (max deviation {asym:.3e})")
        mat = 0.5 * (mat + mat.conj().T)

        eigenvalues = np.linalg.eigvalsh(mat)
        smallest = float(eigenvalues[0])
        if smallest < -PSD_TOL:
            raise PhysicalityError(f"density matrix has eigenvalue {smallest:.3e} < -{PSD_TOL}")
        if smallest < 0.0:
            w, v = np.linalg.eigh(mat)
            trace_before = float(np.sum(w))
            w = np.clip(w, 0.0, None)
            mat = (v * w) @ v.conj().T
            if trace_before > 0.0:
                mat *= trace_before / float(np.sum(w))
            mat = 0.5 * (mat + mat.conj().T)

        if self.normalized:
            trace = float(np.real(np.trace(mat)))
            if abs(trace - 1.0) >= TRACE_TOL:
                raise PhysicalityError(f"density matrix flagged normalized has trace {trace:.12f}")

        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_ket(cls, ket: FockKet) -> "DensityOperator":
        amps = ket.amplitudes
        return cls(
            cutoff=ket.cutoff,
            matrix=np.outer(amps, amps.conj()),
            modes=ket.modes,
            normalized=ket.normalized,
        )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def normalize(self) -> "DensityOperator":
        trace = self.trace
        if trace < ZERO_NORM:
            raise ZeroNormError(f"cannot normalize a density operator with trace {trace:.3e}")
        return DensityOperator(self.cutoff, self.matrix / trace, self.modes, normalized=True)

    def padded(self, cutoff: int) -> "DensityOperator":
        """Embed a single-mode operator in a larger Fock space."""
        if self.modes != 1:
            raise ConfigError("padding is defined for single-mode operators only")
        if cutoff < self.cutoff:
            raise ConfigError(f"cannot pad cutoff {self.cutoff} down to {cutoff}")
        mat = np.zeros((cutoff + 1, cutoff + 1), dtype=np.complex128)
        mat[: self.dim, : self.dim] = self.matrix
        return DensityOperator(cutoff, mat, 1, self.normalized)

    def tail_weight(self) -> float:
        diag = np.real(np.diag(self.matrix))
        if self.modes == 1:
            return float(diag[-2:].sum())
        d = self.cutoff + 1
        grid = diag.reshape(d, d)
        return float(max(grid[-2:, :].sum(), grid[:, -2:].sum()))


@dataclass(frozen=True)
class ModeOperator:
    """A general (not necessarily Hermitian) operator on the truncated space."""
    cutoff: int
    matrix: np.ndarray
    modes: int = 1

    def __post_init__(self):
        mat = _frozen(self.matrix)
        dim = _dimension(self.cutoff, self.modes)
        if mat.shape != (dim, dim):
            raise ConfigError(f"operator of shape {mat.shape} does not match cutoff {self.cutoff}")
        object.__setattr__(self, "matrix", mat)


@dataclass(frozen=True)
class WignerGrid:
    """W(x, p) sampled on a rectangular grid; values[i, j] = W(x[i], p[j])."""
    x: np.ndarray
    p: np.ndarray
    values: np.ndarray

    def integral(self) -> float:
        from scipy.integrate import trapezoid

        return float(trapezoid(trapezoid(self.values, self.p, axis=1), self.x))

    def at(self, x: float, p: float) -> float:
        i = int(np.argmin(np.abs(self.x - x)))
        j = int(np.argmin(np.abs(self.p - p)))
        return float(self.values[i, j])


State = Union[FockKet, DensityOperator]


# ---------------------------------------------------------------------------
# Ladder operators
# ---------------------------------------------------------------------------

def annihilation(cutoff: int) -> ModeOperator:
    """a|n> = sqrt(n)|n-1>, exact on the truncated basis."""
    return ModeOperator(cutoff, np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1))


def number(cutoff: int) -> ModeOperator:
    return ModeOperator(cutoff, np.diag(np.arange(cutoff + 1, dtype=float)))


# ---------------------------------------------------------------------------
# Kets
# ---------------------------------------------------------------------------

def normalize(ket: FockKet) -> FockKet:
    """Rescale a ket to unit norm."""
    norm = np.sqrt(ket.norm_squared)
    if norm < ZERO_NORM:
        raise ZeroNormError(f"cannot normalize a ket of norm {norm:.3e}")
    return FockKet(ket.cutoff, ket.amplitudes / norm, ket.modes, normalized=True)


def ket_from_amplitudes(cutoff: int, amplitudes: np.ndarray, modes: int = 1) -> FockKet:
    """Normalize raw amplitudes into a ket, failing on a zero vector."""
    amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    norm = np.sqrt(np.real(np.vdot(amps, amps)))
    if norm < ZERO_NORM:
        raise ZeroNormError(f"superposition has norm {norm:.3e}")
    return FockKet(cutoff, amps / norm, modes, normalized=True)


def apply_operator(op: ModeOperator, ket: FockKet, arm: Arm = "A") -> FockKet:
    """Normalized image op|ket>; on two-mode kets the operator acts on ``arm``."""
    if op.cutoff != ket.cutoff:
        raise ConfigError(f"cutoff mismatch: operator {op.cutoff}, ket {ket.cutoff}")
    if ket.modes == 1:
        out = op.matrix @ ket.amplitudes
    elif arm == "A":
        out = op.matrix @ ket.amplitude_matrix()
    elif arm == "B":
        out = ket.amplitude_matrix() @ op.matrix.T
    else:
        raise ConfigError(f"arm must be 'A' or 'B', got {arm!r}")
    return ket_from_amplitudes(ket.cutoff, out, ket.modes)


def overlap(a: FockKet, b: FockKet) -> complex:
    """<a|b> for normalized kets."""
    if not (a.normalized and b.normalized):
        raise ConfigError("overlap requires normalized kets")
    if a.dim != b.dim:
        raise ConfigError(f"dimension mismatch: {a.dim} vs {b.dim}")
    value = complex(np.vdot(a.amplitudes, b.amplitudes))
    if abs(value) > 1.0 + PSD_TOL:
        raise PhysicalityError(f"|<a|b>| = {abs(value)} exceeds one")
    return value


def check_truncation(state: State, label: str = "state") -> None:
    """Fail loudly when the top two Fock levels carry more than TAIL_TOL."""
    tail = state.tail_weight()
    if tail >= TAIL_TOL:
        raise TruncationError(
            f"{label} needs a larger cutoff than {state.cutoff}: "
            f"top-level weight {tail:.3e} >= {TAIL_TOL}"
        )


# ---------------------------------------------------------------------------
# Two-mode plumbing
# ---------------------------------------------------------------------------

def tensor(a: State, b: State) -> State:
    """Tensor product of two single-mode objects of equal cutoff."""
    if a.cutoff != b.cutoff:
        raise ConfigError(f"cutoff mismatch: {a.cutoff} vs {b.cutoff}")
    if a.modes != 1 or b.modes != 1:
        raise ConfigError("tensor takes single-mode factors")
    if isinstance(a, FockKet) and isinstance(b, FockKet):
        return FockKet(
            a.cutoff,
            np.kron(a.amplitudes, b.amplitudes),
            modes=2,
            normalized=a.normalized and b.normalized,
        )
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator(
            a.cutoff,
            np.kron(a.matrix, b.matrix),
            modes=2,
            normalized=a.normalized and b.normalized,
        )
    raise ConfigError("tensor factors must both be kets or both be density operators")


def partial_trace(rho2: DensityOperator, mode: Arm = "B") -> DensityOperator:
    """Trace out ``mode`` of a two-mode density operator."""
    if rho2.modes != 2:
        raise ConfigError("partial_trace needs a two-mode density operator")
    d = rho2.cutoff + 1
    if rho2.dim != d * d:
        raise ConfigError(f"dimension {rho2.dim} is not a square of {d}")
    grid = rho2.matrix.reshape(d, d, d, d)
    if mode == "B":
        reduced = np.einsum("abcb->ac", grid)
    elif mode == "A":
        reduced = np.einsum("abad->bd", grid)
    else:
        raise ConfigError(f"mode must be 'A' or 'B', got {mode!r}")
    return DensityOperator(rho2.cutoff, reduced, 1, rho2.normalized)


# ---------------------------------------------------------------------------
# Scalars
# ---------------------------------------------------------------------------

def fidelity_pure(rho: DensityOperator, psi: FockKet) -> float:
    """F = <psi|rho|psi>, clamped to [0, 1]."""
    if not (rho.normalized and psi.normalized):
        raise ConfigError("fidelity requires a normalized state and target")
    if rho.dim != psi.dim:
        raise ConfigError(f"dimension mismatch: {rho.dim} vs {psi.dim}")
    amps = psi.amplitudes
    value = float(np.real(np.vdot(amps, rho.matrix @ amps)))
    if value < -PSD_TOL or value > 1.0 + PSD_TOL:
        raise PhysicalityError(f"fidelity {value} outside [0, 1]")
    return min(max(value, 0.0), 1.0)


def expectation(rho: DensityOperator, op: ModeOperator) -> complex:
    return complex(np.trace(rho.matrix @ op.matrix))


def mean_photon_number(rho: DensityOperator) -> float:
    if rho.modes != 1:
        raise ConfigError("mean_photon_number is defined for single-mode states")
    return float(np.real(expectation(rho, number(rho.cutoff))))


def purity(rho: DensityOperator) -> float:
    return float(np.real(np.trace(rho.matrix @ rho.matrix)))


# ---------------------------------------------------------------------------
# Phase-space rotation
# ---------------------------------------------------------------------------

def rotate(state: State, angle: float) -> State:
    """Apply exp(-i angle n) to a single-mode ket or density operator."""
    if state.modes != 1:
        raise ConfigError("rotate is defined for single-mode states")
    phases = np.exp(-1j * angle * np.arange(state.cutoff + 1))
    if isinstance(state, FockKet):
        return FockKet(state.cutoff, phases * state.amplitudes, 1, state.normalized)
    mat = phases[:, None] * state.matrix * phases.conj()[None, :]
    return DensityOperator(state.cutoff, mat, 1, state.normalized)
