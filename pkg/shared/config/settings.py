from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide settings, overridable through environment variables"""

    model_config = SettingsConfigDict(case_sensitive=False, extra="ignore")

    # Service Configuration
    SERVICE_NAME: str = "bayes-update"
    LOG_LEVEL: str = "INFO"

    # Numerical Contracts
    NORM_TOLERANCE: float = 1e-12
    PROBABILITY_TOLERANCE: float = 1e-12
    FRACTIONAL_FIDELITY_TARGET: float = 1e-9
    DEFAULT_FRACTIONAL_BITS: int = 16

    # Simulator Limits
    MAX_QUBITS: int = 20
    DENSE_COMPOSITE_MAX_QUBITS: int = 8

    # Solver Restarts
    SOLVER_MAX_ATTEMPTS: int = 8

    # Trial Execution
    TRIAL_WORKERS: int = 1

    # Document Schemas
    CONFIG_SCHEMA: str = "bayes-update/config/v1"
    REPORT_SCHEMA: str = "bayes-update/report/v1"


settings = Settings()
