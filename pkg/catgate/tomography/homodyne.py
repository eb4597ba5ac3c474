"""Homodyne measurement simulation: quadrature densities, sampling, histograms.

<m|x_phi> = exp(i m phi) psi_m(x) with psi_m the Hermite functions of the
x = (a + a^dagger)/sqrt(2) convention.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.special import eval_hermite, gammaln

from catgate.config import settings
from catgate.exceptions import ConfigError, TruncationError
from catgate.fock.core import DensityOperator

logger = logging.getLogger(__name__)

DENSITY_TAIL_TOL = 1e-4
PHASE_DECIMALS = 9
QUADRATURE_NODES = 8


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------

def fold_phases(phases: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map phi to [0, pi) using x_{phi+pi} = -x_phi."""
    atol = 10.0 ** -PHASE_DECIMALS
    phases = np.mod(np.asarray(phases, dtype=float), 2.0 * np.pi)
    values = np.asarray(values, dtype=float).copy()
    phases[np.isclose(phases, 2.0 * np.pi, rtol=0.0, atol=atol)] = 0.0
    upper = phases >= np.pi - atol
    phases[upper] -= np.pi
    values[upper] *= -1.0
    phases = np.clip(np.round(phases, PHASE_DECIMALS), 0.0, None)
    return phases, values


@dataclass(frozen=True)
class QuadratureRecord:
    """Homodyne samples (phase, quadrature), phases folded into [0, pi)."""
    phases: np.ndarray
    values: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=float).reshape(-1)
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if phases.shape != values.shape:
            raise ConfigError(f"{phases.size} phases but {values.size} quadrature values")
        if not (np.all(np.isfinite(phases)) and np.all(np.isfinite(values))):
            raise ConfigError("quadrature record contains non-finite values")
        phases, values = fold_phases(phases, values)
        phases.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        return int(self.values.size)

    @property
    def distinct_phases(self) -> np.ndarray:
        return np.unique(self.phases)

    def at_phase(self, phase: float) -> np.ndarray:
        return self.values[np.isclose(self.phases, phase, atol=10.0 ** -PHASE_DECIMALS)]


@dataclass(frozen=True)
class Histogram:
    """Counts of one phase over uniform bins; ``overflow`` counts samples outside the edges."""
    phase: float
    edges: np.ndarray
    counts: np.ndarray
    overflow: int = 0

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.overflow

    @property
    def cells(self) -> np.ndarray:
        """Counts with the overflow cell appended."""
        return np.append(self.counts, self.overflow)


def bin_edges(bins: Optional[int] = None, half_width: Optional[float] = None) -> np.ndarray:
    bins = settings.HISTOGRAM_BINS if bins is None else bins
    half_width = settings.HISTOGRAM_HALF_WIDTH if half_width is None else half_width
    if bins < 2 or half_width <= 0:
        raise ConfigError(f"invalid binning: {bins} bins over +/-{half_width}")
    return np.linspace(-half_width, half_width, bins + 1)


def histogram(
    rec: QuadratureRecord,
    bins: Optional[int] = None,
    half_width: Optional[float] = None,
) -> list[Histogram]:
    edges = bin_edges(bins, half_width)
    hists = []
    for phase in rec.distinct_phases:
        values = rec.at_phase(phase)
        counts, _ = np.histogram(values, bins=edges)
        hists.append(
            Histogram(phase=float(phase), edges=edges, counts=counts, overflow=int(values.size - counts.sum()))
        )
    return hists


# ---------------------------------------------------------------------------
# Quadrature wavefunctions and densities
# ---------------------------------------------------------------------------

def wavefunctions(x: np.ndarray, cutoff: int) -> np.ndarray:
    """psi_n(x) = H_n(x) exp(-x^2/2) / (pi^{1/4} sqrt(2^n n!)), shape (cutoff+1, len(x))."""
    x = np.asarray(x, dtype=float)
    n = np.arange(cutoff + 1)[:, None]
    log_norm = -0.5 * (n * np.log(2.0) + gammaln(n + 1)) - 0.25 * np.log(np.pi)
    return eval_hermite(n, x[None, :]) * np.exp(log_norm - 0.5 * x[None, :] ** 2)


def _phase_vectors(x: np.ndarray, phi: float, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)[:, None]
    return np.exp(1j * n * phi) * wavefunctions(x, cutoff)


def quad_density(rho: DensityOperator, phi: float) -> Callable[[np.ndarray], np.ndarray]:
    """x -> pr(x|phi) = <x_phi|rho|x_phi>, clipped at zero."""
    if rho.modes != 1 or not rho.normalized:
        raise ConfigError("quad_density needs a normalized single-mode state")
    tail = rho.tail_weight()
    if tail > DENSITY_TAIL_TOL:
        raise TruncationError(f"cutoff {rho.cutoff} leaves tail weight {tail:.3e} in the quadrature density")
    matrix = rho.matrix

    def density(x: np.ndarray) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        vecs = _phase_vectors(x, phi, rho.cutoff)
        values = np.real(np.sum(vecs.conj() * (matrix @ vecs), axis=0))
        return np.clip(values, 0.0, None)

    return density


def bin_projectors(phases: Sequence[float], edges: np.ndarray, cutoff: int) -> np.ndarray:
    """Bin-integrated projectors Pi[p, j] = int_bin |x_phi><x_phi| dx, shape (P, B, d, d)."""
    nodes, weights = np.polynomial.legendre.leggauss(QUADRATURE_NODES)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    points = (0.5 * (hi + lo))[:, None] + half[:, None] * nodes[None, :]
    scaled = half[:, None] * weights[None, :]

    d = cutoff + 1
    out = np.empty((len(phases), lo.size, d, d), dtype=np.complex128)
    for i, phi in enumerate(phases):
        vecs = _phase_vectors(points.reshape(-1), phi, cutoff).reshape(d, lo.size, QUADRATURE_NODES)
        out[i] = np.einsum("mbq,nbq,bq->bmn", vecs, vecs.conj(), scaled)
    return out


def binned_probabilities(rho: DensityOperator, phases: Sequence[float], edges: np.ndarray) -> np.ndarray:
    """Probabilities per phase and bin, overflow cell last: shape (P, B+1)."""
    projectors = bin_projectors(phases, edges, rho.cutoff)
    inside = np.real(np.einsum("pbmn,nm->pb", projectors, rho.matrix))
    inside = np.clip(inside, 0.0, None)
    overflow = np.clip(1.0 - inside.sum(axis=1), 0.0, None)
    return np.column_stack([inside, overflow])


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sampling_grid() -> np.ndarray:
    half_width = settings.SAMPLING_HALF_WIDTH
    return np.linspace(-half_width, half_width, settings.SAMPLING_GRID_POINTS)


def _sample_phase(
    rho: DensityOperator, phi: float, n: int, seq: np.random.SeedSequence, grid: np.ndarray
) -> np.ndarray:
    pdf = quad_density(rho, phi)(grid)
    cdf = cumulative_trapezoid(pdf, grid, initial=0.0)
    cdf /= cdf[-1]
    rng = np.random.default_rng(seq)
    return np.interp(rng.random(n), cdf, grid)


def sample(
    rho: DensityOperator,
    phases: Sequence[float],
    n_per_phase: int,
    seed: Optional[int] = None,
) -> QuadratureRecord:
    """Draw i.i.d. quadrature samples at each phase by inverse-CDF sampling.

    Each phase gets its own RNG stream spawned from ``seed``, so the record is
    identical for any MAX_WORKERS setting.

    Args:
        rho: Normalized single-mode state.
        phases: Local-oscillator phases in radians.
        n_per_phase: Samples drawn at every phase.
        seed: Root seed; defaults to settings.DEFAULT_SEED.

    Returns:
        QuadratureRecord with phases folded into [0, pi).
    """
    if n_per_phase < 0:
        raise ConfigError(f"n_per_phase must be >= 0, got {n_per_phase}")
    if len(phases) == 0:
        raise ConfigError("at least one phase is required")
    seed = settings.DEFAULT_SEED if seed is None else seed
    streams = np.random.SeedSequence(seed).spawn(len(phases))
    grid = sampling_grid()

    with ThreadPoolExecutor(max_workers=max(1, settings.MAX_WORKERS)) as executor:
        chunks = list(
            executor.map(
                lambda args: _sample_phase(rho, args[0], n_per_phase, args[1], grid),
                zip(phases, streams),
            )
        )

    all_phases = np.repeat(np.asarray(phases, dtype=float), n_per_phase)
    values = np.concatenate(chunks) if chunks else np.empty(0)
    logger.info(f"Sampled {n_per_phase} quadratures at {len(phases)} phases (seed {seed})")
    return QuadratureRecord(all_phases, values, seed=seed)
