"""Entangled-input gate fidelity, cat-qubit adequacy and optimal alpha.

The gate acts on arm B of a cat pair (|+>|mu> + e^{i phi}|->|nu>)/sqrt(2);
the figure of merit is F = <Omega|chi|Omega> with |Omega> the normalized
(I x a)|pair>. The output does not depend on the pair chosen, which
bell_invariance_suite checks both by direct evaluation and through the
block expression built from zeta_xy = E(|x><y|).
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from catgate.channels.gate import (
    GateParams,
    apply_channel,
    bad_kraus,
    gate_on_arm,
    gate_on_arm_branches,
    good_kraus,
    success_probability,
)
from catgate.characterization.bloch import Curve, FidelityMap, bloch_sweep, default_grid
from catgate.exceptions import ConfigError, FlatObjectiveError
from catgate.fock.core import DensityOperator, fidelity_pure
from catgate.states.factory import (
    BellKind,
    BlochPoint,
    CatLabel,
    CatQubitSpec,
    bell_cat,
    bit_flip_target,
    cat,
    omega_target,
    opposite,
    parity_cat,
    required_cutoff,
)

logger = logging.getLogger(__name__)

Branch = Literal["good", "bad"]
Target = Literal["omega", "bit_flip"]

INVARIANCE_TOL = 1e-10
ADEQUACY_MARGIN = 10
ALPHA_BOUNDS = (0.1, 3.0)
ALPHA_SCAN_POINTS = 59
ALPHA_XTOL = 1e-4
FLAT_TOLERANCE = 1e-9
INVARIANCE_MUS: tuple[CatLabel, ...] = ("+", "-")
INVARIANCE_PHASES = (0.0, np.pi / 2, np.pi, 2.1)


def _target(spec: CatQubitSpec, pair, target: Target):
    if target == "omega":
        return omega_target(spec, pair)
    if target == "bit_flip":
        return bit_flip_target(spec, pair)
    raise ConfigError(f"unknown target {target!r}")


# ---------------------------------------------------------------------------
# Entangled-input fidelity
# ---------------------------------------------------------------------------

def entangled_fidelity(
    spec: CatQubitSpec,
    p: GateParams,
    kind: BellKind = "phi_plus",
    mu: CatLabel = "+",
    phase: float = 0.0,
    target: Target = "omega",
) -> float:
    """F = <Omega|(I x E)(|pair><pair|)|Omega> with the gate on arm B."""
    if spec.cutoff != p.cutoff:
        raise ConfigError(f"cutoff mismatch: cat {spec.cutoff}, gate {p.cutoff}")
    psi = bell_cat(spec, kind, mu=mu, phase=phase)
    chi = gate_on_arm(psi, p, arm="B")
    value = fidelity_pure(chi, _target(spec, psi, target))
    logger.debug(f"Entangled fidelity ({kind}, mu={mu}, phase={phase:.3f}, xi={p.xi}): {value:.6f}")
    return value


def branch_fidelities(
    spec: CatQubitSpec,
    p: GateParams,
    kind: BellKind = "phi_plus",
    mu: CatLabel = "+",
    phase: float = 0.0,
    target: Target = "omega",
) -> tuple[float, float]:
    """(F_good, F_bad) of the branch-normalized outputs."""
    psi = bell_cat(spec, kind, mu=mu, phase=phase)
    good, bad = gate_on_arm_branches(psi, p, arm="B")
    omega = _target(spec, psi, target)
    f_good = fidelity_pure(good.state, omega) if not good.annihilated else float("nan")
    return f_good, fidelity_pure(bad.state, omega)


def xi_sweep(spec: CatQubitSpec, p: GateParams, xis: Sequence[float]) -> Curve:
    """F(xi) for the Phi+ pair; F is affine in xi, so both branches are evaluated once."""
    f_good, f_bad = branch_fidelities(spec, p)
    xis = np.asarray(xis, dtype=float)
    if np.any((xis < 0) | (xis > 1)):
        raise ConfigError("xi values must lie in [0, 1]")
    values = xis * f_good + (1.0 - xis) * f_bad
    logger.info(f"xi sweep: F_good={f_good:.4f}, F_bad={f_bad:.4f}, slope={f_good - f_bad:.4f}")
    return Curve("xi", xis, values)


# ---------------------------------------------------------------------------
# Cat-qubit adequacy
# ---------------------------------------------------------------------------

def adequacy_closed_form(alpha: float) -> float:
    """1/2 (1 + tanh 2 alpha^2), the value the normalization algebra gives."""
    return 0.5 * (1.0 + np.tanh(2.0 * alpha ** 2))


def printed_adequacy(alpha: float) -> float:
    """1/2 (1 + tanh alpha^2); kept for side-by-side reporting only."""
    return 0.5 * (1.0 + np.tanh(alpha ** 2))


def adequacy(alpha: float) -> float:
    """|<Psi+|Omega>|^2 from explicit two-mode kets."""
    spec = CatQubitSpec(alpha=alpha, cutoff=required_cutoff(alpha) + ADEQUACY_MARGIN)
    phi_plus = bell_cat(spec, "phi_plus")
    omega = omega_target(spec, phi_plus)
    psi_plus = bell_cat(spec, "psi_plus")
    return float(abs(np.vdot(psi_plus.amplitudes, omega.amplitudes)) ** 2)


def cat_adequacy(alphas: Sequence[float]) -> Curve:
    alphas = np.asarray(alphas, dtype=float)
    if np.any(alphas <= 0):
        raise ConfigError("alpha must be > 0 for the adequacy curve")
    values = np.array([adequacy(a) for a in alphas])
    logger.info(f"Cat adequacy over {alphas.size} amplitudes in [{alphas.min():.3f}, {alphas.max():.3f}]")
    return Curve("alpha", alphas, values)


# ---------------------------------------------------------------------------
# Optimal cat amplitude for a given state
# ---------------------------------------------------------------------------

def odd_cat_fidelity(rho1: DensityOperator, alpha: float) -> float:
    cutoff = max(rho1.cutoff, required_cutoff(alpha))
    target = parity_cat(CatQubitSpec(alpha=alpha, cutoff=cutoff), "-")
    return fidelity_pure(rho1.padded(cutoff), target)


def alpha_scan(rho1: DensityOperator, alphas: Optional[Sequence[float]] = None) -> Curve:
    alphas = np.linspace(*ALPHA_BOUNDS, ALPHA_SCAN_POINTS) if alphas is None else np.asarray(alphas, dtype=float)
    return Curve("alpha", alphas, np.array([odd_cat_fidelity(rho1, a) for a in alphas]))


def optimal_alpha(rho1: DensityOperator, bounds: tuple[float, float] = ALPHA_BOUNDS) -> float:
    """alpha maximizing F(rho1, odd cat(alpha)): grid scan, then a bounded scalar search."""
    if rho1.modes != 1 or not rho1.normalized:
        raise ConfigError("optimal_alpha needs a normalized single-mode state")
    scan = alpha_scan(rho1, np.linspace(*bounds, ALPHA_SCAN_POINTS))
    if np.ptp(scan.values) < FLAT_TOLERANCE:
        raise FlatObjectiveError("fidelity to the odd cat does not depend on alpha")

    i = int(np.argmax(scan.values))
    lo = scan.x[max(i - 1, 0)]
    hi = scan.x[min(i + 1, scan.x.size - 1)]
    res = minimize_scalar(
        lambda a: -odd_cat_fidelity(rho1, a),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": ALPHA_XTOL},
    )
    best = float(res.x) if -res.fun >= scan.values[i] else float(scan.x[i])
    logger.info(f"Optimal odd-cat amplitude alpha*={best:.4f} (F={odd_cat_fidelity(rho1, best):.4f})")
    return best


# ---------------------------------------------------------------------------
# Block expression and invariance
# ---------------------------------------------------------------------------

def zeta_blocks(spec: CatQubitSpec, p: GateParams, branch: Branch = "good") -> dict[tuple[str, str], np.ndarray]:
    """zeta_xy = E_branch(|x><y|) for x, y in {+, -}, unnormalized."""
    if branch == "good":
        kraus = good_kraus(p.T, p.eta, spec.cutoff)
    elif branch == "bad":
        kraus = bad_kraus(p.T, p.eta, spec.cutoff)
    else:
        raise ConfigError(f"branch must be 'good' or 'bad', got {branch!r}")
    cats = {label: parity_cat(spec, label).amplitudes for label in ("+", "-")}
    return {
        (x, y): apply_channel(np.outer(cats[x], cats[y].conj()), kraus)
        for x in ("+", "-")
        for y in ("+", "-")
    }


def appendix_fidelity(
    spec: CatQubitSpec,
    p: GateParams,
    mu: CatLabel = "+",
    phase: float = 0.0,
    branch: Branch = "good",
    target: Target = "omega",
    blocks: Optional[dict] = None,
) -> float:
    """Branch fidelity assembled from the zeta blocks and the closed-form target.

    With arm-B contents m_+ = |mu>, m_- = |nu> and weights a_+ = 1/sqrt(2),
    a_- = e^{i phase}/sqrt(2):  chi~ = sum_xy a_x a_y* |x><y| (x) zeta_{m_x m_y}.
    The target arm-B vectors are w_+ = sqrt(c_{mu nu}) |nu>, w_- = e^{i phase}
    sqrt(c_{nu mu}) |mu> for Omega and w_+ = |nu>, w_- = e^{i phase} |mu> for
    the bit flip, normalized jointly.
    """
    blocks = zeta_blocks(spec, p, branch) if blocks is None else blocks
    nu = opposite(mu)
    cats = {label: parity_cat(spec, label).amplitudes for label in ("+", "-")}
    contents = {"+": mu, "-": nu}
    weights = {"+": 1.0 / np.sqrt(2.0), "-": np.exp(1j * phase) / np.sqrt(2.0)}
    if target == "omega":
        scale = {"+": np.sqrt(spec.c(mu, nu)), "-": np.sqrt(spec.c(nu, mu))}
    elif target == "bit_flip":
        scale = {"+": 1.0, "-": 1.0}
    else:
        raise ConfigError(f"unknown target {target!r}")
    omega = {
        "+": scale["+"] * cats[nu],
        "-": np.exp(1j * phase) * scale["-"] * cats[mu],
    }
    omega_norm = sum(np.real(np.vdot(v, v)) for v in omega.values())

    overlap = 0.0
    trace = 0.0
    for x in ("+", "-"):
        trace += abs(weights[x]) ** 2 * np.real(np.trace(blocks[(contents[x], contents[x])]))
        for y in ("+", "-"):
            block = blocks[(contents[x], contents[y])]
            overlap += weights[x] * np.conj(weights[y]) * np.vdot(omega[x], block @ omega[y])
    return float(np.real(overlap) / (trace * omega_norm))


@dataclass
class InvarianceReport:
    """Fidelities per branch over every (mu, phase) input pair, with their spreads."""
    inputs: list[tuple[str, float]]
    values: dict[str, list[float]]
    appendix_values: dict[str, list[float]]
    tolerance: float = INVARIANCE_TOL
    spreads: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.spreads = {name: float(np.ptp(vals)) for name, vals in self.values.items()}

    @property
    def passed(self) -> bool:
        consistent = all(
            np.allclose(self.values[name], self.appendix_values[name], rtol=0.0, atol=self.tolerance)
            for name in self.appendix_values
        )
        return consistent and all(spread <= self.tolerance for spread in self.spreads.values())


def bell_invariance_suite(
    spec: CatQubitSpec,
    p: GateParams,
    mus: Sequence[CatLabel] = INVARIANCE_MUS,
    phases: Sequence[float] = INVARIANCE_PHASES,
) -> InvarianceReport:
    """Evaluate F for every input pair, per branch and for the xi mixture, for both targets."""
    inputs = [(mu, float(phase)) for mu in mus for phase in phases]
    values: dict[str, list[float]] = {
        name: [] for name in ("good", "bad", "mixture", "good_bit_flip", "bad_bit_flip")
    }
    appendix_values: dict[str, list[float]] = {name: [] for name in ("good", "bad", "good_bit_flip", "bad_bit_flip")}
    blocks = {branch: zeta_blocks(spec, p, branch) for branch in ("good", "bad")}

    for mu, phase in inputs:
        psi = bell_cat(spec, "general", mu=mu, phase=phase)
        good, bad = gate_on_arm_branches(psi, p, arm="B")
        omega = omega_target(spec, psi)
        flipped = bit_flip_target(spec, psi)
        values["good"].append(fidelity_pure(good.state, omega))
        values["bad"].append(fidelity_pure(bad.state, omega))
        values["mixture"].append(fidelity_pure(gate_on_arm(psi, p, arm="B"), omega))
        values["good_bit_flip"].append(fidelity_pure(good.state, flipped))
        values["bad_bit_flip"].append(fidelity_pure(bad.state, flipped))
        for branch in ("good", "bad"):
            appendix_values[branch].append(
                appendix_fidelity(spec, p, mu, phase, branch, "omega", blocks[branch])
            )
            appendix_values[f"{branch}_bit_flip"].append(
                appendix_fidelity(spec, p, mu, phase, branch, "bit_flip", blocks[branch])
            )

    report = InvarianceReport(inputs=inputs, values=values, appendix_values=appendix_values)
    logger.info(
        "Bell invariance: "
        + ", ".join(f"{name} spread {spread:.2e}" for name, spread in report.spreads.items())
        + f" -> {'passed' if report.passed else 'FAILED'}"
    )
    return report


# ---------------------------------------------------------------------------
# Summary report
# ---------------------------------------------------------------------------

@dataclass
class CharacterizationReport:
    entangled_fidelity: float
    adequacy: float
    adequacy_closed_form: float
    adequacy_printed: float
    xi: float
    T: float
    alpha: float
    success_rate: float
    map_summary: dict = field(default_factory=dict)


def characterize(
    spec: CatQubitSpec,
    p: GateParams,
    thetas: Optional[Sequence[float]] = None,
    phis: Optional[Sequence[float]] = None,
    fidelity_map: Optional[FidelityMap] = None,
) -> CharacterizationReport:
    """Single-number and map-level summary of the gate at (spec, p).

    A precomputed ``fidelity_map`` is reused as is; otherwise the map is swept
    over (thetas, phis), defaulting to the 37 x 72 grid.
    """
    if fidelity_map is None:
        default_thetas, default_phis = default_grid()
        thetas = default_thetas if thetas is None else thetas
        phis = default_phis if phis is None else phis
        fidelity_map = bloch_sweep(spec, p, thetas, phis)
    elif fidelity_map.params != p or fidelity_map.alpha != spec.alpha:
        raise ConfigError("fidelity map was computed for different gate parameters or alpha")
    even_cat = DensityOperator.from_ket(cat(spec, BlochPoint(np.pi / 2, 0.0)))
    report = CharacterizationReport(
        entangled_fidelity=entangled_fidelity(spec, p),
        adequacy=adequacy(spec.alpha),
        adequacy_closed_form=adequacy_closed_form(spec.alpha),
        adequacy_printed=printed_adequacy(spec.alpha),
        xi=p.xi,
        T=p.T,
        alpha=spec.alpha,
        success_rate=success_probability(even_cat, p),
        map_summary=fidelity_map.summary(),
    )
    logger.info(
        f"Characterization (T={p.T}, xi={p.xi}, alpha={spec.alpha}): "
        f"F={report.entangled_fidelity:.4f}, adequacy={report.adequacy:.4f}"
    )
    return report
