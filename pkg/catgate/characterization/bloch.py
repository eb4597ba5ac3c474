"""Bloch-sphere fidelity maps of the gate on single cat-qubit inputs.

F(theta, phi) = <psi_{-theta,phi}| E(|psi_{theta,phi}><psi_{theta,phi}|) |psi_{-theta,phi}>.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from catgate.channels.gate import GateParams, gate
from catgate.config import settings
from catgate.exceptions import ConfigError
from catgate.fock.core import DensityOperator, fidelity_pure
from catgate.states.factory import BlochPoint, CatQubitSpec, cat

logger = logging.getLogger(__name__)

THETA_POINTS = 37
PHI_POINTS = 72
DEFAULT_T_VALUES = (0.9, 0.95, 0.99, 0.999, 0.9999)

# Panel parameter sets; each varies one knob from "a".
PRESETS = {
    "a": {"T": 0.9, "xi": 0.83, "alpha": 0.92},
    "b": {"T": 0.9, "xi": 1.0, "alpha": 0.92},
    "c": {"T": 0.99, "xi": 0.83, "alpha": 0.92},
    "d": {"T": 0.9, "xi": 0.83, "alpha": 1.2},
}


@dataclass(frozen=True)
class Curve:
    """A one-parameter sweep: values[i] at x[i] of the named variable."""
    variable: str
    x: np.ndarray
    values: np.ndarray

    def at(self, x: float) -> float:
        i = int(np.argmin(np.abs(self.x - x)))
        return float(self.values[i])


@dataclass(frozen=True)
class FidelityMap:
    """F on a theta (rows) by phi (columns) grid, with the parameters that produced it."""
    thetas: np.ndarray
    phis: np.ndarray
    values: np.ndarray
    params: GateParams
    alpha: float

    def _row(self, theta: float) -> np.ndarray:
        return self.values[int(np.argmin(np.abs(self.thetas - theta)))]

    @property
    def minimum(self) -> float:
        return float(self.values.min())

    @property
    def maximum(self) -> float:
        return float(self.values.max())

    @property
    def argmin(self) -> tuple[float, float]:
        i, j = np.unravel_index(int(np.argmin(self.values)), self.values.shape)
        return float(self.thetas[i]), float(self.phis[j])

    @property
    def equator_mean(self) -> float:
        return float(self._row(np.pi / 2).mean())

    @property
    def equator_spread(self) -> float:
        """Standard deviation over phi on the equator."""
        return float(self._row(np.pi / 2).std())

    @property
    def pole_mean(self) -> float:
        return float(np.concatenate([self._row(0.0), self._row(np.pi)]).mean())

    def summary(self) -> dict:
        return {
            "min": self.minimum,
            "max": self.maximum,
            "equator_mean": self.equator_mean,
            "pole_mean": self.pole_mean,
            "equator_spread": self.equator_spread,
        }


def preset(name: str, cutoff: Optional[int] = None) -> tuple[CatQubitSpec, GateParams]:
    key = name.lower().removeprefix("fig3")
    if key not in PRESETS:
        raise ConfigError(f"unknown Bloch-map preset {name!r}; choose from {sorted(PRESETS)}")
    values = PRESETS[key]
    cutoff = settings.DEFAULT_CUTOFF if cutoff is None else cutoff
    spec = CatQubitSpec(alpha=values["alpha"], cutoff=cutoff)
    return spec, GateParams(T=values["T"], xi=values["xi"], cutoff=cutoff)


def default_grid() -> tuple[np.ndarray, np.ndarray]:
    thetas = np.linspace(0.0, np.pi, THETA_POINTS)
    phis = np.linspace(0.0, 2.0 * np.pi, PHI_POINTS, endpoint=False)
    return thetas, phis


def fidelity_at(spec: CatQubitSpec, p: GateParams, point: BlochPoint) -> float:
    """Fidelity of the gate output for |psi_{theta,phi}> with the ideal |psi_{-theta,phi}>."""
    if spec.cutoff != p.cutoff:
        raise ConfigError(f"cutoff mismatch: cat {spec.cutoff}, gate {p.cutoff}")
    rho_in = DensityOperator.from_ket(cat(spec, point))
    return fidelity_pure(gate(rho_in, p), cat(spec, point.flipped()))


def bloch_sweep(
    spec: CatQubitSpec,
    p: GateParams,
    thetas: Optional[Sequence[float]] = None,
    phis: Optional[Sequence[float]] = None,
) -> FidelityMap:
    """Evaluate F over a (theta, phi) grid; 37 x 72 points by default."""
    default_thetas, default_phis = default_grid()
    thetas = default_thetas if thetas is None else np.asarray(thetas, dtype=float)
    phis = default_phis if phis is None else np.asarray(phis, dtype=float)
    points = [BlochPoint(theta, phi) for theta in thetas for phi in phis]

    logger.info(
        f"Bloch sweep: {thetas.size}x{phis.size} points, T={p.T}, xi={p.xi}, alpha={spec.alpha}"
    )
    with ThreadPoolExecutor(max_workers=max(1, settings.MAX_WORKERS)) as executor:
        values = list(executor.map(lambda b: fidelity_at(spec, p, b), points))

    grid = np.array(values).reshape(thetas.size, phis.size)
    return FidelityMap(thetas=thetas, phis=phis, values=grid, params=p, alpha=spec.alpha)


def t_limit_study(
    spec: CatQubitSpec,
    p: GateParams,
    T_values: Sequence[float] = DEFAULT_T_VALUES,
    point: BlochPoint = BlochPoint(np.pi / 4, 0.0),
) -> Curve:
    """F(T) at a fixed Bloch point, all other parameters held."""
    values = [fidelity_at(spec, replace(p, T=float(T)), point) for T in T_values]
    logger.info(
        f"T-limit study at theta={point.theta:.4f}, phi={point.phi:.4f}: "
        + ", ".join(f"F({T})={F:.4f}" for T, F in zip(T_values, values))
    )
    return Curve("T", np.asarray(T_values, dtype=float), np.asarray(values))
