"""Model fitting on homodyne histograms: (s, h) from the source, then xi from the gate.

Both stages maximize a binned multinomial likelihood over the same histogram
cells the tomography uses (uniform bins plus one overflow cell per phase).
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.stats import norm

from catgate.channels.gate import GateParams, gate, gate_branches
from catgate.config import settings
from catgate.exceptions import ConfigError, ConvergenceError, FlatObjectiveError
from catgate.fock.core import DensityOperator
from catgate.states.factory import SqueezerModel, gaussian_model_state
from catgate.tomography.homodyne import (
    Histogram,
    QuadratureRecord,
    bin_edges,
    binned_probabilities,
    histogram,
)

logger = logging.getLogger(__name__)

PROBABILITY_FLOOR = 1e-300
S_BOUNDS = (1e-4, 1.0)
H_BOUNDS = (1.0, 10.0)
XI_TOLERANCE = 1e-4
FLAT_TOLERANCE = 1e-6
MIN_EXPECTED = 5.0


def _cells(hists: Sequence[Histogram]) -> np.ndarray:
    return np.array([h.cells for h in hists], dtype=float)


def _nll(counts: np.ndarray, probs: np.ndarray) -> float:
    return -float(np.sum(counts * np.log(np.clip(probs, PROBABILITY_FLOOR, None))))


def _require_samples(rec: QuadratureRecord) -> None:
    if rec.size == 0:
        raise ConfigError("quadrature record has no samples")


# ---------------------------------------------------------------------------
# Source model
# ---------------------------------------------------------------------------

def gaussian_bin_probabilities(model: SqueezerModel, phases: Sequence[float], edges: np.ndarray) -> np.ndarray:
    """Closed-form binned marginals of the (s, h) model, overflow cell last.

    The model state is a centred Gaussian with V(phi) = V_x cos^2 phi + V_p sin^2 phi.
    """
    v_x, v_p = model.variances
    phases = np.asarray(phases, dtype=float)
    sigma = np.sqrt(v_x * np.cos(phases) ** 2 + v_p * np.sin(phases) ** 2)
    cdf = norm.cdf(edges[None, :] / sigma[:, None])
    inside = np.diff(cdf, axis=1)
    overflow = np.clip(1.0 - inside.sum(axis=1), 0.0, None)
    return np.column_stack([inside, overflow])


def _initial_variances(rec: QuadratureRecord) -> tuple[float, float]:
    """Least-squares fit of V(phi) = V_x cos^2 + V_p sin^2 to per-phase sample variances."""
    phases = rec.distinct_phases
    variances = np.array([np.mean(rec.at_phase(phi) ** 2) for phi in phases])
    design = np.column_stack([np.cos(phases) ** 2, np.sin(phases) ** 2])
    (v_x, v_p), *_ = np.linalg.lstsq(design, variances, rcond=None)
    return float(max(v_x, 1e-3)), float(max(v_p, 1e-3))


def fit_squeezer(
    rec: QuadratureRecord,
    bins: Optional[int] = None,
    half_width: Optional[float] = None,
    fix_h: Optional[float] = None,
) -> SqueezerModel:
    """Fit the phenomenological squeezer (s, h) to pre-gate homodyne data.

    Args:
        rec: Quadrature samples of the source state; phases must cover both quadratures.
        bins: Histogram bins per phase.
        half_width: Histogram range.
        fix_h: Hold h at this value and fit s alone.

    Returns:
        The maximum-likelihood SqueezerModel.
    """
    _require_samples(rec)
    phases = rec.distinct_phases
    if phases.size < 2:
        raise ConfigError("fit_squeezer needs at least two distinct phases")
    edges = bin_edges(bins, half_width)
    counts = _cells(histogram(rec, bins, half_width))

    v_x, v_p = _initial_variances(rec)
    start = SqueezerModel.from_variances(v_x, v_p)
    s0 = float(np.clip(start.s, *S_BOUNDS))
    h0 = float(np.clip(start.h, *H_BOUNDS))
    logger.info(f"fit_squeezer start: V_x={v_x:.4f}, V_p={v_p:.4f} -> s={s0:.4f}, h={h0:.4f}")

    if fix_h is not None:
        def objective_s(s: float) -> float:
            return _nll(counts, gaussian_bin_probabilities(SqueezerModel(s, fix_h), phases, edges))

        res = minimize_scalar(
            objective_s,
            bounds=S_BOUNDS,
            method="bounded",
            options={"xatol": 1e-6, "maxiter": settings.FIT_MAX_ITERATIONS},
        )
        if not res.success:
            raise ConvergenceError(f"s fit did not converge: {res.message}")
        model = SqueezerModel(float(res.x), fix_h)
        logger.info(f"Fitted squeezer with fixed h={fix_h}: s={model.s:.4f}")
        return model

    def objective(params: np.ndarray) -> float:
        s, h = params
        return _nll(counts, gaussian_bin_probabilities(SqueezerModel(s, h), phases, edges))

    res = minimize(
        objective,
        x0=np.array([s0, h0]),
        method="Nelder-Mead",
        bounds=[S_BOUNDS, H_BOUNDS],
        options={"xatol": 1e-6, "fatol": 1e-8, "maxiter": settings.FIT_MAX_ITERATIONS},
    )
    if not res.success:
        raise ConvergenceError(f"(s, h) fit did not converge: {res.message}")
    model = SqueezerModel(float(res.x[0]), float(res.x[1]))
    logger.info(f"Fitted squeezer: s={model.s:.4f}, h={model.h:.4f} (NLL {res.fun:.3f})")
    return model


# ---------------------------------------------------------------------------
# Modal purity
# ---------------------------------------------------------------------------

def fit_xi_from_state(
    rec: QuadratureRecord,
    rho_in: DensityOperator,
    T: float,
    eta: float = 1.0,
    bins: Optional[int] = None,
    half_width: Optional[float] = None,
) -> float:
    """xi maximizing the binned likelihood of gate(rho_in; T, xi, eta).

    The gate is affine in xi, so the bin probabilities are precomputed at
    xi = 1 and xi = 0 and mixed linearly inside the scalar search.
    """
    _require_samples(rec)
    edges = bin_edges(bins, half_width)
    hists = histogram(rec, bins, half_width)
    counts = _cells(hists)
    phases = [h.phase for h in hists]

    params = GateParams(T=T, xi=1.0, eta=eta, cutoff=rho_in.cutoff)
    good, bad = gate_branches(rho_in, params)
    if good.annihilated:
        raise FlatObjectiveError("good branch annihilates the input; xi is not identifiable")
    p_good = binned_probabilities(good.state, phases, edges)
    p_bad = binned_probabilities(bad.state, phases, edges)
    spread = float(np.max(np.abs(p_good - p_bad)))
    if spread < FLAT_TOLERANCE:
        raise FlatObjectiveError(
            f"good and faulty branches predict identical histograms (max difference {spread:.2e})"
        )

    def objective(xi: float) -> float:
        return _nll(counts, xi * p_good + (1.0 - xi) * p_bad)

    res = minimize_scalar(
        objective,
        bounds=(0.0, 1.0),
        method="bounded",
        options={"xatol": XI_TOLERANCE, "maxiter": settings.FIT_MAX_ITERATIONS},
    )
    if not res.success:
        raise ConvergenceError(f"xi fit did not converge: {res.message}")
    xi = float(np.clip(res.x, 0.0, 1.0))
    logger.info(f"Fitted modal purity xi={xi:.4f} (T={T}, eta={eta})")
    return xi


def fit_xi(
    rec: QuadratureRecord,
    m: SqueezerModel,
    T: float,
    eta: float = 1.0,
    cutoff: Optional[int] = None,
    bins: Optional[int] = None,
    half_width: Optional[float] = None,
) -> float:
    """xi for data taken after the gate acted on the fitted source state."""
    cutoff = settings.DEFAULT_CUTOFF if cutoff is None else cutoff
    rho_in = gaussian_model_state(m, cutoff)
    return fit_xi_from_state(rec, rho_in, T, eta=eta, bins=bins, half_width=half_width)


# ---------------------------------------------------------------------------
# Prediction vs data
# ---------------------------------------------------------------------------

@dataclass
class ComparisonReport:
    phases: list[float]
    chi2_per_phase: list[float]
    dof_per_phase: list[int]
    overlap_per_phase: list[float]
    samples_per_phase: list[int] = field(default_factory=list)

    @property
    def mean_chi2(self) -> float:
        return float(np.mean(self.chi2_per_phase))

    @property
    def max_chi2(self) -> float:
        return float(np.max(self.chi2_per_phase))


def _check_binning(hists: Sequence[Histogram]) -> np.ndarray:
    edges = hists[0].edges
    for h in hists[1:]:
        if h.edges.shape != edges.shape or not np.allclose(h.edges, edges):
            raise ConfigError("binning mismatch: histograms use different edges")
    return edges


def predict_and_compare(
    rho_input: DensityOperator,
    p: GateParams,
    observed: Union[QuadratureRecord, Sequence[Histogram]],
    bins: Optional[int] = None,
    half_width: Optional[float] = None,
) -> ComparisonReport:
    """Reduced Pearson chi^2 and histogram overlap of gate(rho_input; p) against data.

    Cells with expected count below 5 are left out; each phase has
    (kept cells - 1) degrees of freedom.
    """
    if isinstance(observed, QuadratureRecord):
        _require_samples(observed)
        hists = histogram(observed, bins, half_width)
    else:
        hists = list(observed)
        if not hists or sum(h.total for h in hists) == 0:
            raise ConfigError("no observed samples to compare against")
    edges = _check_binning(hists)

    predicted = gate(rho_input, p)
    phases = [h.phase for h in hists]
    probs = binned_probabilities(predicted, phases, edges)

    chi2, dofs, overlaps, totals = [], [], [], []
    for hist, prob in zip(hists, probs):
        cells = hist.cells.astype(float)
        total = cells.sum()
        if total == 0:
            raise ConfigError(f"phase {hist.phase:.4f} has no samples")
        expected = total * prob
        keep = expected >= MIN_EXPECTED
        dof = int(keep.sum()) - 1
        if dof < 1:
            raise ConfigError(f"phase {hist.phase:.4f}: too few populated bins for a chi^2 test")
        stat = float(np.sum((cells[keep] - expected[keep]) ** 2 / expected[keep]))
        chi2.append(stat / dof)
        dofs.append(dof)
        overlaps.append(float(np.sum(np.minimum(cells / total, prob))))
        totals.append(int(total))

    report = ComparisonReport(phases, chi2, dofs, overlaps, totals)
    logger.info(
        f"Prediction vs data: mean reduced chi2 {report.mean_chi2:.3f}, max {report.max_chi2:.3f} "
        f"over {len(phases)} phases"
    )
    return report
