import os
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'

DEFAULT_EXPANSION_LIMIT = 2 ** 20
DEFAULT_TEST_SET_CAP = 200_000
DEFAULT_WORKERS = 1
DEFAULT_LOG_LEVEL = "WARNING"


def _env_locations() -> List[Path]:
    return [
        Path.cwd() / ".env",
        Path(__file__).parent.parent / ".env",
        Path.home() / ".ltg-equiv.env",
    ]


def _parse_env_line(line: str) -> Optional[Tuple[str, str]]:
    line = line.strip()
    if not line or line.startswith('#') or '=' not in line:
        return None
    key, _, value = line.partition('=')
    value = value.strip()
    if value and value[0] == value[-1] and value[0] in ('"', "'"):
        value = value[1:-1]
    return key.strip(), value


def load_env_file(env_path: Optional[Path] = None) -> Dict[str, str]:
    """
    Load settings from a .env file.

    Args:
        env_path: Path to the .env file. If None, looks in the working
            directory, the project root and the user's home directory.

    Returns:
        Dictionary of KEY=VALUE pairs read from the file.
    """
    if env_path is None:
        env_path = next((loc for loc in _env_locations() if loc.exists()), None)
    if env_path is None or not env_path.exists():
        logger.debug("No .env file found")
        return {}

    try:
        lines = env_path.read_text().splitlines()
    except OSError as e:
        logger.warning(f"Cannot read .env file {env_path}: {e}")
        return {}
    settings = dict(pair for pair in map(_parse_env_line, lines) if pair is not None)
    logger.debug(f"Loaded {len(settings)} settings from {env_path}")
    return settings


def _get_setting(name: str) -> Optional[str]:
    """Environment variable first, then the .env file."""
    value = os.environ.get(name)
    if not value:
        value = load_env_file().get(name)
    return value or None


def _get_positive_int(name: str, default: int) -> int:
    raw = _get_setting(name)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {name}={raw!r}; using {default}")
        return default
    if value < 1:
        logger.warning(f"Ignoring non-positive {name}={value}; using {default}")
        return default
    return value


def get_expansion_limit() -> int:
    """Maximum number of letters an SLP node may expand to (LTG_EXPANSION_LIMIT)."""
    return _get_positive_int("LTG_EXPANSION_LIMIT", DEFAULT_EXPANSION_LIMIT)


def get_test_set_cap() -> int:
    """Maximum number of derivations in a morphism test set (LTG_TEST_SET_CAP)."""
    return _get_positive_int("LTG_TEST_SET_CAP", DEFAULT_TEST_SET_CAP)


def get_worker_count() -> int:
    """Thread count for independent checks (LTG_WORKERS)."""
    return _get_positive_int("LTG_WORKERS", DEFAULT_WORKERS)


def get_log_level() -> str:
    """
    Get the log level name to use for console logging.

    Checks:
    1. LTG_LOG_LEVEL environment variable
    2. .env file
    3. Falls back to WARNING

    Returns:
        A level name understood by the logging module
    """
    level = (_get_setting("LTG_LOG_LEVEL") or DEFAULT_LOG_LEVEL).upper()
    if level not in logging._nameToLevel:
        logger.warning(f"Unknown log level {level}; using {DEFAULT_LOG_LEVEL}")
        level = DEFAULT_LOG_LEVEL
    return level


def configure_logging(level: str, log_file: Optional[Path] = None) -> None:
    """Configure root logging on stderr, optionally mirrored into a file."""
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)
    if log_file is not None:
        file_handler = logging.FileHandler(log_file, mode='w', encoding='utf-8')
        file_handler.setLevel(level)
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logging.getLogger().addHandler(file_handler)
        logger.info(f"Log will be saved to: {log_file}")
