# src/realizability/strainreal/configs/settings.py
import os
from pathlib import Path

from dotenv import load_dotenv

THREADS_DEFAULT = 1
OUT_DIR_DEFAULT = "./artifacts"
LOG_LEVEL_DEFAULT = "INFO"
S3_PREFIX_DEFAULT = "strainreal"
LOG_LEVELS = ("TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL")

PRESETS_PATH = Path(__file__).parent / "presets.json"


def load_env():
    load_dotenv()


def threads() -> int:
    """
    Worker cap from STRAINREAL_THREADS (default 1)
    """
    raw = os.getenv("STRAINREAL_THREADS")
    if raw is None or raw.strip() == "":
        return THREADS_DEFAULT
    try:
        value = int(raw.strip())
    except ValueError:
        value = 0
    if value < 1:
        raise ValueError(
            f"STRAINREAL_THREADS must be a positive integer, got '{raw}'\n"
            "Add: STRAINREAL_THREADS=4 (or remove it to run single-threaded)"
        )
    return value


def out_dir() -> str:
    """
    Default artifact directory from STRAINREAL_OUT_DIR
    """
    return os.getenv("STRAINREAL_OUT_DIR") or OUT_DIR_DEFAULT


def log_level() -> str:
    level = (os.getenv("STRAINREAL_LOG_LEVEL") or LOG_LEVEL_DEFAULT).strip().upper()
    if level not in LOG_LEVELS:
        raise ValueError(
            f"STRAINREAL_LOG_LEVEL '{level}' is not a log level\n"
            f"Use one of: {', '.join(LOG_LEVELS)}"
        )
    return level


def s3_bucket():
    """
    S3 bucket name, None when artifacts stay on the local filesystem
    """
    return os.getenv("AWS_S3_BUCKET_NAME")


def s3_prefix() -> str:
    return os.getenv("AWS_S3_PREFIX", S3_PREFIX_DEFAULT)


def storage_mode() -> str:
    """
    's3' if AWS_S3_BUCKET_NAME is configured, 'local' otherwise
    """
    return "s3" if s3_bucket() else "local"
