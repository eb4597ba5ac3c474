"""Pydantic models for run configuration and the JSON reports the CLI writes."""

import logging
from pathlib import Path
from typing import Any, Optional

import numpy as np
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from catgate.channels.gate import GateParams
from catgate.config import settings
from catgate.exceptions import ConfigError
from catgate.states.factory import CatQubitSpec, SqueezerModel

logger = logging.getLogger(__name__)

PRESET_DIR = Path(__file__).resolve().parents[1] / "presets"

# Synthetic-data assumptions; the experimental values were never published.
ASSUMED_S = 0.5
ASSUMED_H = 1.05
ASSUMED_KAPPA = 0.05


def _default_alphas() -> list[float]:
    return [round(a, 10) for a in np.arange(0.1, 3.0 + 1e-9, 0.02)]


class RunConfig(BaseModel):
    """Everything one CLI run depends on; two equal configs give identical outputs."""

    model_config = ConfigDict(extra="forbid")

    PRESET: Optional[str] = None
    CUTOFF: int = Field(default_factory=lambda: settings.DEFAULT_CUTOFF, ge=1)
    ENTANGLED_CUTOFF: int = Field(default_factory=lambda: settings.ENTANGLED_CUTOFF, ge=1)

    # Gate
    T: float = Field(0.9, gt=0.0, lt=1.0)
    XI: float = Field(0.83, ge=0.0, le=1.0)
    KAPPA: float = Field(ASSUMED_KAPPA, gt=0.0, le=1.0)
    ETA: float = Field(1.0, gt=0.0, le=1.0)

    # Source and qubit
    S: float = Field(ASSUMED_S, gt=0.0, le=1.0)
    H: float = Field(ASSUMED_H, ge=1.0)
    ALPHA: float = Field(0.92, ge=0.0)
    THETA: float = 0.0
    PHI: float = 0.0
    N: int = Field(1, ge=0)

    # Homodyne data
    PHASES: list[float] = Field(default_factory=list)
    PHASE_COUNT: int = Field(12, ge=1)
    SAMPLES_PER_PHASE: int = Field(10000, ge=0)
    BINS: int = Field(default_factory=lambda: settings.HISTOGRAM_BINS, ge=2)
    MLE_ITERATIONS: int = Field(default_factory=lambda: settings.MLE_ITERATIONS, ge=1)
    SEED: int = Field(default_factory=lambda: settings.DEFAULT_SEED)

    # Sweeps
    THETA_POINTS: int = Field(37, ge=2)
    PHI_POINTS: int = Field(72, ge=1)
    T_VALUES: list[float] = Field(default_factory=lambda: [0.9, 0.95, 0.99, 0.999, 0.9999])
    XI_VALUES: list[float] = Field(default_factory=lambda: [round(x, 10) for x in np.linspace(0.0, 1.0, 11)])
    ALPHA_VALUES: list[float] = Field(default_factory=_default_alphas)

    OUTPUT_DIR: str = Field(default_factory=lambda: settings.OUTPUT_DIR)

    @field_validator("PHASES", "T_VALUES", "XI_VALUES", "ALPHA_VALUES", mode="before")
    @classmethod
    def split_comma_list(cls, v: Any) -> Any:
        """Accept "0.1,0.2,0.3" from flat config files and CLI flags."""
        if v is None:
            return []
        if isinstance(v, str):
            return [float(item) for item in v.split(",") if item.strip()]
        return v

    @field_validator("T_VALUES")
    @classmethod
    def transmissivities_in_range(cls, v: list[float]) -> list[float]:
        bad = [t for t in v if not 0.0 < t < 1.0]
        if bad:
            raise ValueError(f"transmissivities must lie in (0, 1), got {bad}")
        return v

    @property
    def phase_list(self) -> list[float]:
        if self.PHASES:
            return list(self.PHASES)
        return np.linspace(0.0, np.pi, self.PHASE_COUNT, endpoint=False).tolist()

    @property
    def output_path(self) -> Path:
        return Path(self.OUTPUT_DIR)

    def gate_params(self, cutoff: Optional[int] = None, xi: Optional[float] = None) -> GateParams:
        return GateParams(
            T=self.T,
            xi=self.XI if xi is None else xi,
            kappa=self.KAPPA,
            eta=self.ETA,
            cutoff=self.CUTOFF if cutoff is None else cutoff,
        )

    def squeezer(self) -> SqueezerModel:
        return SqueezerModel(s=self.S, h=self.H)

    def cat_spec(self, cutoff: Optional[int] = None) -> CatQubitSpec:
        return CatQubitSpec(alpha=self.ALPHA, cutoff=self.CUTOFF if cutoff is None else cutoff)


def preset_path(name: str) -> Path:
    path = PRESET_DIR / f"{name}.env"
    if not path.exists():
        known = sorted(p.stem for p in PRESET_DIR.glob("*.env"))
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(known)}")
    return path


def _read_flat_file(path: Path) -> dict[str, Optional[str]]:
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return {k.upper(): v for k, v in dotenv_values(path).items()}


def load_run_config(
    config_file: Optional[str] = None,
    preset: Optional[str] = None,
    overrides: Optional[dict[str, Any]] = None,
) -> RunConfig:
    """Preset file, then config file, then CLI overrides (None values are skipped)."""
    values: dict[str, Any] = {}
    if preset:
        values.update(_read_flat_file(preset_path(preset)))
        values["PRESET"] = preset
    if config_file:
        values.update(_read_flat_file(Path(config_file)))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key.upper()] = value
    values = {k: v for k, v in values.items() if v is not None}
    try:
        config = RunConfig.model_validate(values)
    except ValidationError as e:
        raise ConfigError(f"invalid run configuration: {e}") from e
    logger.debug(f"Run configuration: {config.model_dump_json()}")
    return config


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

class ComparisonModel(BaseModel):
    phases: list[float]
    chi2_per_phase: list[float]
    dof_per_phase: list[int]
    overlap_per_phase: list[float]
    mean_chi2: float


class FitReport(BaseModel):
    """Fit report JSON: {"s", "h", "xi", "chi2_per_phase"} plus provenance."""

    s: float
    h: float
    xi: Optional[float] = None
    chi2_per_phase: list[float] = []
    T: Optional[float] = None
    eta: Optional[float] = None
    seed: Optional[int] = None
    assumptions: list[str] = []


class PipelineReport(BaseModel):
    fit: FitReport
    comparison: ComparisonModel
    true_s: float
    true_h: float
    true_xi: float
    mle_iterations: int
    mle_log_likelihood: float
    mle_purity: float
    mle_mean_photon_number: float
    model_mean_photon_number: float
    optimal_alpha: float
    optimal_alpha_fidelity: float
    success_rate: float
    config: dict


class CharacterizationModel(BaseModel):
    entangled_fidelity: float
    adequacy: float
    adequacy_closed_form: float
    adequacy_printed: float
    xi: float
    T: float
    alpha: float
    success_rate: float
    map_summary: dict[str, float] = {}
