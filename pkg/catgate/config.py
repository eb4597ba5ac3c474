from pydantic_settings import BaseSettings


class Settings(BaseSettings):

    # Logging / output
    LOG_LEVEL: str = "INFO"
    OUTPUT_DIR: str = "./output"

    # Fock truncation
    DEFAULT_CUTOFF: int = 20
    ENTANGLED_CUTOFF: int = 30

    # Thread-pool width for sweeps and per-phase sampling (1 = sequential)
    MAX_WORKERS: int = 1

    # Homodyne histograms
    HISTOGRAM_BINS: int = 64
    HISTOGRAM_HALF_WIDTH: float = 5.0

    # Inverse-CDF sampling grid
    SAMPLING_GRID_POINTS: int = 8001
    SAMPLING_HALF_WIDTH: float = 9.0

    # Maximum-likelihood reconstruction
    MLE_ITERATIONS: int = 2000
    MLE_TOLERANCE: float = 1e-10

    # Model fitting
    FIT_MAX_ITERATIONS: int = 4000

    # Synthetic data
    DEFAULT_SEED: int = 20110101

    model_config = {"env_file": ".env", "env_prefix": "CATGATE_", "extra": "ignore"}


settings = Settings()
