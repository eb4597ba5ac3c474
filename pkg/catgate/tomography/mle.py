"""Iterative maximum-likelihood reconstruction from binned homodyne data.

Each phase contributes a POVM of bin-integrated projectors plus an overflow
element I - sum_j Pi_j, so every sample enters the likelihood. The update is
the diluted R rho R iteration

    rho' = (I + eps R) rho (I + eps R) / tr(...),

with eps halved whenever a step would lower the log-likelihood, so the
recorded log-likelihood never decreases.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from catgate.config import settings
from catgate.exceptions import ConfigError, ConvergenceError
from catgate.fock.core import DensityOperator
from catgate.tomography.homodyne import QuadratureRecord, bin_edges, bin_projectors, histogram

logger = logging.getLogger(__name__)

PROBABILITY_FLOOR = 1e-300
INITIAL_STEP = 10.0
MAX_STEP = 1e3
MIN_STEP = 1e-10


@dataclass
class ReconstructionResult:
    state: DensityOperator
    log_likelihood: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def _povm(rec: QuadratureRecord, cutoff: int, bins: Optional[int], half_width: Optional[float]):
    edges = bin_edges(bins, half_width)
    hists = histogram(rec, bins, half_width)
    phases = [h.phase for h in hists]
    inside = bin_projectors(phases, edges, cutoff)
    overflow = np.eye(cutoff + 1)[None, :, :] - inside.sum(axis=1)
    povm = np.concatenate([inside, overflow[:, None, :, :]], axis=1)
    counts = np.array([h.cells for h in hists], dtype=float)
    return povm, counts


def _probabilities(povm: np.ndarray, rho: np.ndarray) -> np.ndarray:
    probs = np.real(np.einsum("pbmn,nm->pb", povm, rho))
    return np.clip(probs, PROBABILITY_FLOOR, None)


def _log_likelihood(counts: np.ndarray, probs: np.ndarray) -> float:
    mask = counts > 0
    return float(np.sum(counts[mask] * np.log(probs[mask])))


def reconstruct(
    rec: QuadratureRecord,
    cutoff: int,
    iterations: Optional[int] = None,
    bins: Optional[int] = None,
    half_width: Optional[float] = None,
    tolerance: Optional[float] = None,
) -> ReconstructionResult:
    """Maximum-likelihood density matrix for a homodyne record.

    Args:
        rec: Quadrature samples covering at least two distinct phases.
        cutoff: Fock cutoff of the reconstructed state.
        iterations: Iteration cap (settings.MLE_ITERATIONS by default).
        bins: Histogram bins per phase.
        half_width: Histogram range is [-half_width, half_width].
        tolerance: Stop once the relative log-likelihood gain of a step
            falls below this value.

    Returns:
        ReconstructionResult with the state and the log-likelihood trace.
    """
    if rec.size == 0:
        raise ConfigError("cannot reconstruct from an empty quadrature record")
    if rec.distinct_phases.size < 2:
        raise ConfigError("reconstruction needs at least two distinct phases (degenerate phase coverage)")
    iterations = settings.MLE_ITERATIONS if iterations is None else iterations
    tolerance = settings.MLE_TOLERANCE if tolerance is None else tolerance

    povm, counts = _povm(rec, cutoff, bins, half_width)
    weights = counts / counts.sum(axis=1, keepdims=True) / counts.shape[0]
    eye = np.eye(cutoff + 1)

    rho = eye / (cutoff + 1)
    current = _log_likelihood(counts, _probabilities(povm, rho))
    trace = [current]
    step = INITIAL_STEP
    converged = False

    logger.info(
        f"MLE reconstruction: {rec.size} samples, {counts.shape[0]} phases, cutoff {cutoff}"
    )
    for iteration in range(1, iterations + 1):
        probs = _probabilities(povm, rho)
        r_op = np.einsum("pb,pbmn->mn", weights / probs, povm)
        while True:
            update = eye + step * r_op
            candidate = update @ rho @ update.conj().T
            candidate = 0.5 * (candidate + candidate.conj().T)
            candidate /= np.real(np.trace(candidate))
            value = _log_likelihood(counts, _probabilities(povm, candidate))
            if value >= current:
                break
            step *= 0.5
            if step < MIN_STEP:
                break

        if step < MIN_STEP:
            converged = True
            break
        gain = value - current
        if gain < 0:
            raise ConvergenceError(f"log-likelihood decreased at iteration {iteration}")
        rho, current = candidate, value
        trace.append(current)
        step = min(2.0 * step, MAX_STEP)
        if gain <= tolerance * max(1.0, abs(current)):
            converged = True
            break

    if not converged:
        logger.warning(f"MLE stopped at the iteration cap ({iterations}) before reaching tolerance")
    logger.info(f"MLE finished after {len(trace) - 1} iterations, log-likelihood {current:.6f}")
    state = DensityOperator(cutoff, rho)
    return ReconstructionResult(state=state, log_likelihood=trace, iterations=len(trace) - 1, converged=converged)


def mle_reconstruct(
    rec: QuadratureRecord,
    cutoff: int,
    iterations: Optional[int] = None,
    bins: Optional[int] = None,
) -> DensityOperator:
    return reconstruct(rec, cutoff, iterations=iterations, bins=bins).state
