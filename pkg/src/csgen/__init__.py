"""Synthetic code-switched text generation for low-resource sentiment data."""

from .config import ConfigError, RunConfig, load_config
from .pipeline import StageError, run_pipeline

__version__ = "0.1.0"
__all__ = ["ConfigError", "RunConfig", "StageError", "load_config", "run_pipeline", "__version__"]
