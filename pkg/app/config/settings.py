"""
Settings Configuration for the Colander Toolkit
Numerical tolerances, hard caps and runtime knobs, overridable from the environment
"""
import math
import os
import sys
from typing import Optional, ClassVar

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit settings, read from COLANDER_* environment variables or a .env file"""

    model_config = SettingsConfigDict(
        env_prefix="COLANDER_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Parallelism (COLANDER_THREADS)
    threads: int = Field(1, ge=1, description="Worker threads for data-parallel loops")

    # Geometry tolerances, all relative to the transmission radius R
    tolerance_factor: float = Field(1e-9, gt=0, description="Closed-ball tolerance tau = factor * R")
    offset_factor: float = Field(1e-5, gt=0, description="Candidate offset eta = factor * R")
    arc_step: float = Field(math.pi / 180.0, gt=0, description="Angular step for arc sampling")

    # Hard caps
    max_anchors: int = Field(2000, ge=1, description="Largest anchor set an arrangement accepts")
    max_grid_cells: int = Field(10**8, ge=1, description="Largest sampling grid")
    max_range_points: int = Field(16, ge=1, description="Exhaustive shattering cap")
    max_signature_points: int = Field(20, ge=1, description="Pattern counting cap")
    search_cap: int = Field(10**4, ge=1, description="Anchor-count cap for Monte Carlo search")

    # Construction and experiments
    construction_merge_factor: float = Field(1e-6, gt=0, description="Lattice duplicate merge tolerance")
    success_threshold: float = Field(0.9, gt=0, le=1, description="Monte Carlo success fraction")

    # Logging
    log_level: str = "INFO"
    logs_directory: str = "logs"
    log_to_file: bool = False

    # Non-field constants
    SAMPLING_OFFSET: ClassVar[float] = (math.sqrt(2.0) / 2.0) % 1.0
    VERIFY_PITCH_DIVISOR: ClassVar[float] = 10.0
    LOCALIZE_PITCH_DIVISOR: ClassVar[float] = 50.0
    TRIAL_PITCH_DIVISOR: ClassVar[float] = 100.0


# Global settings instance (for get_settings pattern); built lazily so a bad
# environment surfaces as a ValidationError inside the CLI rather than at import
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get toolkit settings (singleton pattern)"""
    global _settings
    if _settings is None:
        _settings = Settings()
        if _settings.threads > (os.cpu_count() or 1):
            print(
                f"⚠️ WARNING: COLANDER_THREADS={_settings.threads} exceeds the CPU count "
                f"({os.cpu_count()}); work will be oversubscribed.",
                file=sys.stderr,
            )
    return _settings


def reset_settings() -> Settings:
    """Drop the cached settings and re-read the environment"""
    global _settings
    _settings = Settings()
    return _settings
