try:
    from pydantic_settings import BaseSettings
except ImportError:
    from pydantic import BaseSettings
from typing import List
import os
from dotenv import load_dotenv

load_dotenv()


def parse_int_list(value: str) -> List[int]:
    """Parse "3,4,5" or "3..7" into a list of integers"""
    value = value.strip()
    if ".." in value:
        start, end = value.split("..", 1)
        return list(range(int(start), int(end) + 1))
    return [int(part) for part in value.split(",") if part.strip()]


class Settings(BaseSettings):
    # Application Settings
    APP_NAME: str = "Trie Topology Optimizer"
    VERSION: str = "1.0.0"
    LOG_LEVEL: str = os.getenv("TRIEOPT_LOG_LEVEL", "INFO")
    LOG_FORMAT: str = os.getenv("TRIEOPT_LOG_FORMAT", "%(asctime)s %(levelname)s %(name)s: %(message)s")

    # Prefix Labeling
    LABEL_FIRST_SUFFIX: int = int(os.getenv("TRIEOPT_LABEL_FIRST_SUFFIX", "0"))

    # Search Settings
    OPTIMAL_MAX_N: int = int(os.getenv("TRIEOPT_OPTIMAL_MAX_N", "7"))
    ORACLE_MAX_ACTIVE: int = int(os.getenv("TRIEOPT_ORACLE_MAX_ACTIVE", "6"))
    DEFAULT_BOUND: str = os.getenv("TRIEOPT_DEFAULT_BOUND", "admissible")
    IMPROVEMENT_EPSILON: float = float(os.getenv("TRIEOPT_IMPROVEMENT_EPSILON", "1e-9"))

    # Experiment Settings
    DEFAULT_TOTAL_FLOW: float = float(os.getenv("TRIEOPT_DEFAULT_TOTAL_FLOW", "1.0"))
    DEFAULT_TRIALS: int = int(os.getenv("TRIEOPT_DEFAULT_TRIALS", "50"))
    DEFAULT_SIZES: str = os.getenv("TRIEOPT_DEFAULT_SIZES", "3,4,5,6,7")
    DEFAULT_H_MAX_VALUES: str = os.getenv("TRIEOPT_DEFAULT_H_MAX_VALUES", "1,3,10")
    DEFAULT_SEED: int = int(os.getenv("TRIEOPT_DEFAULT_SEED", "0"))
    BENCH_OPTIMAL_MAX_N: int = int(os.getenv("TRIEOPT_BENCH_OPTIMAL_MAX_N", "5"))
    BENCH_ORACLE_MAX_N: int = int(os.getenv("TRIEOPT_BENCH_ORACLE_MAX_N", "6"))

    # Output Settings
    OUTPUT_DIR: str = os.getenv("TRIEOPT_OUTPUT_DIR", "./results")

    @property
    def default_sizes(self) -> List[int]:
        return parse_int_list(self.DEFAULT_SIZES)

    @property
    def default_h_max_values(self) -> List[int]:
        return parse_int_list(self.DEFAULT_H_MAX_VALUES)

    class Config:
        case_sensitive = True
        env_prefix = "TRIEOPT_"

settings = Settings()
