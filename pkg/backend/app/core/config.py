import os
import logging
from dotenv import load_dotenv
from pydantic_settings import BaseSettings

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    # Application Settings
    APP_NAME: str = "ChiralCalc"
    API_V1_STR: str = "/api/v1"
    DEBUG: bool = os.getenv("DEBUG", "False").lower() == "true"
    ENVIRONMENT: str = os.getenv("ENVIRONMENT", "development")
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # Verification runner
    DEFAULT_SEED: int = int(os.getenv("DEFAULT_SEED", "42"))
    WORKERS: int = int(os.getenv("WORKERS", "1"))

    # Memo caches
    CACHE_ENABLED: bool = os.getenv("CACHE_ENABLED", "True").lower() == "true"
    CACHE_MAX_ENTRIES: int = int(os.getenv("CACHE_MAX_ENTRIES", "50000"))

    # Truncation self-checks (exponential order+1, doubled iota truncation)
    CHECK_TRUNCATION: bool = os.getenv("CHECK_TRUNCATION", "True").lower() == "true"

    # Sample sizes
    RESIDUE_SAMPLES: int = int(os.getenv("RESIDUE_SAMPLES", "200"))
    CONVOLUTION_SAMPLES: int = int(os.getenv("CONVOLUTION_SAMPLES", "200"))
    ROUNDTRIP_OPERATIONS: int = int(os.getenv("ROUNDTRIP_OPERATIONS", "20"))
    SESQUILINEARITY_CASES: int = int(os.getenv("SESQUILINEARITY_CASES", "12"))
    SPANNING_INPUT_CAP: int = int(os.getenv("SPANNING_INPUT_CAP", "200"))

    # Random classical tables
    TABLE_D_CAP: int = int(os.getenv("TABLE_D_CAP", "1"))
    TABLE_LAMBDA_DEGREE: int = int(os.getenv("TABLE_LAMBDA_DEGREE", "1"))

    class Config:
        env_file = ".env"
        case_sensitive = True

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self._validate_limits()

    def _validate_limits(self):
        """Reject sizes the runner cannot work with and log the effective configuration"""
        for name in (
            "WORKERS",
            "CACHE_MAX_ENTRIES",
            "RESIDUE_SAMPLES",
            "CONVOLUTION_SAMPLES",
            "ROUNDTRIP_OPERATIONS",
            "SESQUILINEARITY_CASES",
            "SPANNING_INPUT_CAP",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.TABLE_D_CAP < 0 or self.TABLE_LAMBDA_DEGREE < 0:
            raise ValueError("TABLE_D_CAP and TABLE_LAMBDA_DEGREE must be non-negative")

        logger.info("Runner configuration:")
        logger.info(f"- Workers: {self.WORKERS}")
        logger.info(f"- Default seed: {self.DEFAULT_SEED}")
        logger.info(f"- Cache: {'✓' if self.CACHE_ENABLED else '✗'} (max {self.CACHE_MAX_ENTRIES} entries)")
        logger.info(f"- Truncation checks: {'✓' if self.CHECK_TRUNCATION else '✗'}")
        logger.info(f"- Spanning input cap: {self.SPANNING_INPUT_CAP}")


settings = Settings()
