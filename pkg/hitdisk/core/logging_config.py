# logging_config.py
# Logging configuration for hitdisk

import sys
import logging
import logging.handlers
from pathlib import Path
from typing import Dict, Optional, Union

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

COMPONENTS = ("geometry", "annulus", "elliptic", "kernels", "density",
              "montecarlo", "verification", "cli")


def setup_logging(log_level: str = "INFO", log_file: Optional[Union[str, Path]] = None) -> Dict[str, logging.Logger]:
    """Setup logging configuration"""
    level = getattr(logging, str(log_level).upper(), None)
    if not isinstance(level, int):
        level = logging.INFO

    # results go to stdout, so messages stay on stderr
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(
            logging.handlers.RotatingFileHandler(
                log_path,
                maxBytes=10 * 1024 * 1024,  # 10MB
                backupCount=5,
            )
        )

    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)
    logging.getLogger("numba").setLevel(logging.WARNING)

    # Create separate loggers for different components
    return {name: logging.getLogger(f"hitdisk.{name}") for name in COMPONENTS}
