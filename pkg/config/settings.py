"""Configuration settings for invforge."""

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Application settings."""

    # Application
    APP_NAME: str = "invforge"
    APP_VERSION: str = "1.0.0"
    INVFORGE_SEED: int = 20240521

    # Exact algebra and channel validation
    ALGEBRA_TOL: float = 1e-12
    CPTP_TOL: float = 1e-10
    SIMPLEX_TOL: float = 1e-9
    SIMPLEX_RENORM_TOL: float = 1e-6

    # Spectral engine
    DEGENERACY_TOL: float = 1e-8
    RESIDUAL_TOL: float = 1e-8
    REFERENCE_MARGIN: float = 0.15  # fraction of each range excluded at the reference draw
    MAX_WORKERS: int = 4

    # Invariant search
    DEFAULT_SAMPLES: int = 5
    MAX_TERMS: int = 3
    MAX_EXPONENT: int = 2
    INVARIANT_TOL: float = 1e-7
    VERIFY_TOL: float = 1e-9
    EPS_DEN: float = 1e-6
    DEFAULT_TRIALS: int = 100
    MAX_UNDEFINED_FRACTION: float = 0.9

    # Transfer simulation
    CODEBOOK_MAX_DRAWS: int = 100000
    CODEBOOK_DENOMINATOR_FLOOR: float = 0.25

    # Catalog storage
    CATALOG_DIR: str = "catalogs"

    # Logging
    LOG_LEVEL: str = "WARNING"
    LOG_FORMAT: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    model_config = {
        "env_file": ".env",
        "case_sensitive": True
    }


settings = Settings()
