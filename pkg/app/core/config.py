from typing import List

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", case_sensitive=False)

    # Output
    OUTPUT_DIR: str = "results"
    PRESETS_DIR: str = ""

    # Numerics
    DENSE_CUTOFF: int = 4096
    DENSE_STEP_CUTOFF: int = 512
    EXPM_CUTOFF: int = 2048
    EIGEN_TOL: float = 1e-8
    HERMITIAN_TOL: float = 1e-12
    THREADS: int = 4

    # App
    ENVIRONMENT: str = "development"
    LOG_LEVEL: str = "INFO"
    ALLOWED_ORIGINS: str = "http://localhost:5173"

    @property
    def origins(self) -> List[str]:
        return [o.strip() for o in self.ALLOWED_ORIGINS.split(",")]


settings = Settings()
