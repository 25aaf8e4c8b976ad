"""
Runtime settings for tentctl
Values come from environment variables (a .env file is honoured)
"""
import os
import json
import logging
from typing import Dict, Any, Optional
from dotenv import load_dotenv


class Settings:
    def __init__(self):
        load_dotenv()
        self.precision = self._get_int("TENTCTL_PRECISION", None)
        self.log_level = os.getenv("TENTCTL_LOG_LEVEL", "INFO").upper()
        self.workers = self._get_int("TENTCTL_WORKERS", 1)
        self.max_iters = self._get_int("TENTCTL_MAX_ITERS", 1000)
        self.timezone = os.getenv("TENTCTL_TIMEZONE", "UTC")
        self.write_manifest = os.getenv("TENTCTL_WRITE_MANIFEST", "true").lower() == "true"

    def _get_int(self, name: str, default: Optional[int]) -> Optional[int]:
        """Read a positive integer variable, falling back to the default on bad input"""
        raw = os.getenv(name)
        if raw is None or raw.strip() == "":
            return default
        try:
            value = int(raw)
            if value < 1:
                raise ValueError("must be positive")
            return value
        except ValueError as e:
            logging.error(f"Ignoring {name}={raw!r}: {e}")
            return default

    def get_status(self) -> Dict[str, Any]:
        return {
            "precision": self.precision,
            "log_level": self.log_level,
            "workers": self.workers,
            "max_iters": self.max_iters,
            "timezone": self.timezone,
            "write_manifest": self.write_manifest,
        }


def load_presets(path: Optional[str] = None) -> Dict[str, Any]:
    """Load the named run presets from data/presets.json"""
    possible_paths = []
    if path:
        possible_paths.append(path)
    else:
        base_dirs = [
            os.path.dirname(os.path.abspath(__file__)),  # package directory
            os.path.join(os.getcwd(), "tentctl"),
        ]
        for base_dir in base_dirs:
            possible_paths.append(os.path.join(base_dir, "data", "presets.json"))

    for preset_file in possible_paths:
        try:
            with open(preset_file, "r", encoding="utf-8") as f:
                return json.load(f)
        except (FileNotFoundError, OSError):
            continue
        except json.JSONDecodeError as e:
            logging.error(f"Malformed presets file {preset_file}: {e}")
            return {}

    logging.warning(f"Could not find presets.json. Tried paths: {possible_paths}")
    return {}


# Global instance
settings = Settings()
