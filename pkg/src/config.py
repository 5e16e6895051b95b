"""
Configuration settings for the loctrig localized-kernel toolkit.
"""

import os
import logging
from typing import Optional

from dotenv import load_dotenv

# Load environment variables from .env file if it exists
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
env_path = os.path.join(BASE_DIR, ".env")
load_dotenv(env_path, override=False)


def _int_setting(name: str, default: int, minimum: int = 1) -> int:
    """
    Read an integer setting from the environment.

    Args:
        name: Environment variable name
        default: Value used when the variable is unset or empty
        minimum: Smallest accepted value

    Returns:
        The parsed integer

    Raises:
        ValueError: If the variable is set but is not an integer >= minimum
    """
    raw = os.environ.get(name, "").strip()
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


# Logging settings
LOG_LEVEL = os.environ.get("LOCTRIG_LOG_LEVEL", "INFO").upper()

# Configure logging
logging.basicConfig(level=getattr(logging, LOG_LEVEL, logging.INFO))
logger = logging.getLogger(__name__)

# Parallelism settings
DEFAULT_THREADS = _int_setting("LOCTRIG_THREADS", 1)
CHUNK_SIZE = _int_setting("LOCTRIG_CHUNK_SIZE", 512)

# Output settings
OUTPUT_FOLDER = os.environ.get("LOCTRIG_OUTPUT_FOLDER", os.path.join(BASE_DIR, "data", "reports"))

logger.debug(f"Loaded settings: threads={DEFAULT_THREADS}, chunk={CHUNK_SIZE}, output={OUTPUT_FOLDER}")


def resolve_threads(cli_value: Optional[int] = None) -> int:
    """
    Pick the worker count, preferring an explicit command-line value.

    Args:
        cli_value: Value of --threads, or None when the flag was not given

    Returns:
        Number of worker threads (>= 1)
    """
    if cli_value is None:
        return DEFAULT_THREADS
    if cli_value < 1:
        raise ValueError(f"--threads must be >= 1, got {cli_value}")
    return cli_value


def ensure_output_folder(path: Optional[str] = None) -> str:
    """Create the report folder if missing and return it."""
    folder = path or OUTPUT_FOLDER
    os.makedirs(folder, exist_ok=True)
    return folder
