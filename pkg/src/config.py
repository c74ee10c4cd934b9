"""
Configuration module for the AutoProp design toolkit
"""

import os
from typing import Optional
from dotenv import load_dotenv
from loguru import logger

# Load environment variables from .env file
load_dotenv()

# API Configuration
API_HOST = os.getenv("API_HOST", "0.0.0.0")
API_PORT = int(os.getenv("API_PORT", "8000"))

# Logging Configuration
LOG_FILE = os.getenv("LOG_FILE", "logs/autoprop.log")
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

# Artifact Configuration
OUTPUT_DIR = os.getenv("OUTPUT_DIR", "output")
DEFAULT_STL_MODE = os.getenv("DEFAULT_STL_MODE", "binary")

# Control Simulation Configuration
DEFAULT_PWM_FREQ_HZ = float(os.getenv("DEFAULT_PWM_FREQ_HZ", "490"))
DEFAULT_TRACE_DURATION_MS = float(os.getenv("DEFAULT_TRACE_DURATION_MS", "50"))

# Hydrodynamics / Optimizer Configuration
DEFAULT_RPM = float(os.getenv("DEFAULT_RPM", "3000"))
OPTIMIZER_BUDGET = int(os.getenv("OPTIMIZER_BUDGET", "200"))
OPTIMIZER_MAX_WORKERS = int(os.getenv("OPTIMIZER_MAX_WORKERS", "1"))

# Mesh Configuration
HUB_SEGMENTS = int(os.getenv("HUB_SEGMENTS", "48"))

# Configure Loguru
logger.add(
    LOG_FILE,
    rotation="10 MB",
    level=LOG_LEVEL,
    format="{time:YYYY-MM-DD HH:mm:ss} | {level} | {message}"
)

def validate_config() -> tuple[bool, Optional[str]]:
    """
    Validate configuration settings.
    Returns a tuple with (is_valid, error_message)
    """
    if DEFAULT_PWM_FREQ_HZ <= 0:
        return False, "DEFAULT_PWM_FREQ_HZ must be positive"
    if DEFAULT_TRACE_DURATION_MS <= 0:
        return False, "DEFAULT_TRACE_DURATION_MS must be positive"
    if DEFAULT_RPM <= 0:
        return False, "DEFAULT_RPM must be positive"
    if OPTIMIZER_BUDGET < 0:
        return False, "OPTIMIZER_BUDGET must be >= 0"
    if OPTIMIZER_MAX_WORKERS < 1:
        return False, "OPTIMIZER_MAX_WORKERS must be >= 1"
    if DEFAULT_STL_MODE not in ("binary", "ascii"):
        return False, f"DEFAULT_STL_MODE must be 'binary' or 'ascii', got {DEFAULT_STL_MODE!r}"
    if HUB_SEGMENTS < 3:
        return False, "HUB_SEGMENTS must be >= 3"

    return True, None
