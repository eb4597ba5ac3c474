"""File formats: state JSON, Wigner/quadrature/histogram/map/curve CSV."""

import csv
import json
import logging
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from catgate.exceptions import ConfigError
from catgate.fock.core import DensityOperator, FockKet, WignerGrid
from catgate.tomography.homodyne import Histogram, QuadratureRecord

logger = logging.getLogger(__name__)


class KetPayload(BaseModel):
    """Ket JSON: {"cutoff": N, "re": [...], "im": [...]}."""

    cutoff: int = Field(..., ge=1)
    modes: int = Field(1, ge=1, le=2)
    re: list[float]
    im: list[float]


class DensityPayload(BaseModel):
    """Density-matrix JSON: {"cutoff": N, "re": [[...]], "im": [[...]]}."""

    cutoff: int = Field(..., ge=1)
    modes: int = Field(1, ge=1, le=2)
    re: list[list[float]]
    im: list[list[float]]


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def ket_to_payload(ket: FockKet) -> KetPayload:
    return KetPayload(
        cutoff=ket.cutoff,
        modes=ket.modes,
        re=np.real(ket.amplitudes).tolist(),
        im=np.imag(ket.amplitudes).tolist(),
    )


def density_to_payload(rho: DensityOperator) -> DensityPayload:
    return DensityPayload(
        cutoff=rho.cutoff,
        modes=rho.modes,
        re=np.real(rho.matrix).tolist(),
        im=np.imag(rho.matrix).tolist(),
    )


def state_to_json(state: Union[FockKet, DensityOperator]) -> str:
    if isinstance(state, FockKet):
        return ket_to_payload(state).model_dump_json(indent=2)
    return density_to_payload(state).model_dump_json(indent=2)


def write_state(path: Path, state: Union[FockKet, DensityOperator]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(state_to_json(state), encoding="utf-8")
    logger.info(f"Wrote {type(state).__name__} (cutoff {state.cutoff}) to {path}")
    return path


def read_density(path: Path) -> DensityOperator:
    """Load a density-matrix JSON; a ket JSON is accepted and turned into |psi><psi|."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read state file {path}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"state file {path} must hold a JSON object")
    try:
        if raw.get("re") and isinstance(raw["re"][0], list):
            payload = DensityPayload.model_validate(raw)
            matrix = np.asarray(payload.re) + 1j * np.asarray(payload.im)
            return DensityOperator(payload.cutoff, matrix, modes=payload.modes)
        payload = KetPayload.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"invalid state file {path}: {e}") from e
    amps = np.asarray(payload.re) + 1j * np.asarray(payload.im)
    return DensityOperator.from_ket(FockKet(payload.cutoff, amps, modes=payload.modes))


def write_json(path: Path, payload: Union[BaseModel, dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(payload, BaseModel):
        text = payload.model_dump_json(indent=2)
    else:
        text = json.dumps(payload, indent=2, sort_keys=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return path


def write_wigner_csv(path: Path, grid: WignerGrid) -> Path:
    rows = (
        (float(x), float(p), float(grid.values[i, j]))
        for i, x in enumerate(grid.x)
        for j, p in enumerate(grid.p)
    )
    return write_rows(path, ("x", "p", "w"), rows)


def write_quadratures_csv(path: Path, rec: QuadratureRecord) -> Path:
    return write_rows(path, ("phase_rad", "quadrature"), zip(rec.phases.tolist(), rec.values.tolist()))


def read_quadratures_csv(path: Path) -> QuadratureRecord:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"quadrature file not found: {path}")
    phases, values = [], []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or set(reader.fieldnames) != {"phase_rad", "quadrature"}:
            raise ConfigError(f"{path}: expected header 'phase_rad,quadrature', got {reader.fieldnames}")
        for line, row in enumerate(reader, start=2):
            try:
                phases.append(float(row["phase_rad"]))
                values.append(float(row["quadrature"]))
            except (TypeError, ValueError) as e:
                raise ConfigError(f"{path}:{line}: bad sample row {row}") from e
    return QuadratureRecord(np.asarray(phases), np.asarray(values))


def write_histograms_csv(path: Path, hists: Sequence[Histogram]) -> Path:
    """Bin rows per phase; the overflow cell is written with infinite edges."""
    def rows():
        for h in hists:
            for lo, hi, count in zip(h.edges[:-1], h.edges[1:], h.counts):
                yield h.phase, float(lo), float(hi), int(count)
            yield h.phase, "-inf", "inf", h.overflow

    return write_rows(path, ("phase_rad", "x_lo", "x_hi", "count"), rows())


def write_map_csv(path: Path, thetas: np.ndarray, phis: np.ndarray, values: np.ndarray) -> Path:
    rows = (
        (float(theta), float(phi), float(values[i, j]))
        for i, theta in enumerate(thetas)
        for j, phi in enumerate(phis)
    )
    return write_rows(path, ("theta_rad", "phi_rad", "fidelity"), rows)


def write_curve_csv(path: Path, variable: str, x: np.ndarray, values: np.ndarray) -> Path:
    return write_rows(path, (variable, "value"), zip(map(float, x), map(float, values)))


def read_curve_csv(path: Path) -> tuple[str, np.ndarray, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader])
    return header[0], data[:, 0], data[:, 1]
