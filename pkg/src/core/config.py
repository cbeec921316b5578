from typing import List, Tuple

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


DEFAULT_GRID_LEVELS: Tuple[float, ...] = (0.0, 1e-9, 1e-3, 1.0, 2.0, 3.0, 1e3)


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="METRIFORGE_",
        case_sensitive=False,
        extra="ignore",  # Ignore extra fields in .env file
    )

    # Application
    app_name: str = Field(default="metriforge")
    app_env: str = Field(default="development")
    debug: bool = Field(default=False)
    api_port: int = Field(default=8000)
    api_version: str = Field(default="v1")

    # Sampling
    seed: int = Field(default=42)
    budget: int = Field(default=100_000, ge=1)
    scale: float = Field(default=10.0, gt=0)
    grid_levels: List[float] = Field(default_factory=lambda: list(DEFAULT_GRID_LEVELS))
    chunk_size: int = Field(default=4096, ge=1)
    workers: int = Field(default=1, ge=1)

    # Enumeration caps
    corner_cap: int = Field(default=4096, ge=1)
    corner_pair_cap: int = Field(default=250_000, ge=1)
    product_cap: int = Field(default=4096, ge=1)

    # Tolerances
    tol_zero: float = Field(default=1e-9, ge=0)
    tol_cmp: float = Field(default=1e-9, ge=0)
    tol_cont: float = Field(default=1e-6, ge=0)
    continuity_depth: int = Field(default=40, ge=1)

    # Convergence probing
    tail_tau: float = Field(default=1e-6, gt=0)
    tail_fraction: float = Field(default=0.1, gt=0, le=1)
    tail_decay: float = Field(default=0.1, gt=0, lt=1)
    ray_depth: int = Field(default=40, ge=1)
    null_sequence_depth: int = Field(default=1000, ge=10)

    # Logging
    log_level: str = Field(default="WARNING")
    log_format: str = Field(default="console")

    @field_validator("grid_levels")
    @classmethod
    def _grid_starts_at_zero(cls, levels: List[float]) -> List[float]:
        if not levels or levels[0] != 0.0 or sorted(levels) != levels:
            raise ValueError("grid_levels must be sorted ascending and start at 0")
        return levels

    def sampler_config(self, **overrides):
        """Build the sampler configuration, letting callers override single fields."""
        from src.models.verdict import SamplerConfig

        values = {
            "seed": self.seed,
            "budget": self.budget,
            "scale": self.scale,
            "grid_levels": tuple(self.grid_levels),
            "corner_cap": self.corner_cap,
            "chunk_size": self.chunk_size,
            "workers": self.workers,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return SamplerConfig(**values)

    def tolerances(self, **overrides):
        from src.models.verdict import Tolerances

        values = {
            "tol_zero": self.tol_zero,
            "tol_cmp": self.tol_cmp,
            "tol_cont": self.tol_cont,
            "continuity_depth": self.continuity_depth,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return Tolerances(**values)

    @property
    def is_development(self) -> bool:
        return self.app_env == "development"


settings = Settings()
