"""Wigner-function evaluation from a Fock-basis density matrix.

Uses the Laguerre expansion of |m><n| with the convention
W_vac(x, p) = exp(-x^2 - p^2)/pi, i.e. alpha = (x + i p)/sqrt(2).
"""

import logging
from typing import Optional

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from catgate.exceptions import ConfigError
from catgate.fock.core import DensityOperator, WignerGrid

logger = logging.getLogger(__name__)


def grid_axis(half_width: float = 5.0, points: int = 101) -> np.ndarray:
    """Symmetric sample axis; an odd point count keeps the origin on the grid."""
    if points < 2:
        raise ConfigError(f"need at least two grid points, got {points}")
    return np.linspace(-half_width, half_width, points)


def wigner(
    rho: DensityOperator,
    x: Optional[np.ndarray] = None,
    p: Optional[np.ndarray] = None,
) -> WignerGrid:
    """Evaluate W(x, p) of a single-mode state on the grid x (rows) by p (columns)."""
    if rho.modes != 1:
        raise ConfigError("wigner is defined for single-mode states")
    if not rho.normalized:
        raise ConfigError("wigner requires a normalized density operator")
    x = grid_axis() if x is None else np.asarray(x, dtype=float)
    p = grid_axis() if p is None else np.asarray(p, dtype=float)

    X, P = np.meshgrid(x, p, indexing="ij")
    alpha_conj = (X - 1j * P) / np.sqrt(2.0)
    r2 = 4.0 * np.abs(alpha_conj) ** 2
    gauss = np.exp(-0.5 * r2) / np.pi

    values = np.zeros_like(X, dtype=float)
    d = rho.dim
    for m in range(d):
        for n in range(m + 1):
            coeff = rho.matrix[m, n]
            if coeff == 0:
                continue
            k = m - n
            # sqrt(n!/m!) via log-gamma
            scale = np.exp(0.5 * (gammaln(n + 1) - gammaln(m + 1)))
            w_mn = ((-1) ** n) * scale * (2.0 * alpha_conj) ** k * eval_genlaguerre(n, k, r2) * gauss
            if k == 0:
                values += np.real(coeff * w_mn)
            else:
                values += 2.0 * np.real(coeff * w_mn)

    logger.debug(f"Wigner function evaluated on {x.size}x{p.size} grid (cutoff {rho.cutoff})")
    return WignerGrid(x=x, p=p, values=values)


def wigner_at_origin(rho: DensityOperator) -> float:
    """W(0, 0) = <parity>/pi."""
    parity = (-1.0) ** np.arange(rho.dim)
    return float(np.real(np.sum(parity * np.diag(rho.matrix)))) / np.pi
