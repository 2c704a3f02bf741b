from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="PURSUIT_SIM_",
        env_file=".env.local",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    # Sweeps (PURSUIT_SIM_THREADS caps the worker pool, -1 = all cores)
    threads: int = Field(default=1)

    # Integration
    default_dt: float = Field(default=0.005, gt=0)
    default_gamma: float = Field(default=0.5, gt=0, lt=1)

    # Output
    output_dir: str = Field(default="out")
    float_digits: int = Field(default=9, ge=1, le=17)

    # Application
    log_level: str = Field(default="INFO")
    log_json: bool = Field(default=True)


# Global settings instance
settings = Settings()
