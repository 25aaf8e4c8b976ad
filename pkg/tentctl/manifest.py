"""
Run manifests
A manifest records the command, its parameters and a SHA-256 digest of the
primary output, and is written beside the output file as FILE.manifest.json.
"""
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional

import pytz

from tentctl import __version__
from tentctl.config import settings
from tentctl.errors import ParameterError

MANIFEST_SUFFIX = ".manifest.json"


def digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _now_iso(timezone: str) -> str:
    try:
        tz = pytz.timezone(timezone)
    except pytz.UnknownTimeZoneError:
        logging.error(f"Unknown timezone {timezone!r}, falling back to UTC")
        tz = pytz.utc
    return datetime.now(tz).isoformat()


@dataclass
class RunManifest:
    command: str
    parameters: Dict[str, str]
    output_digest: str
    tool_version: str = __version__
    created_at: str = ""
    argv: List[str] = field(default_factory=list)

    @classmethod
    def for_output(cls, command: str, parameters: Dict[str, Any], argv: List[str], output: str) -> "RunManifest":
        return cls(
            command=command,
            parameters={key: str(value) for key, value in parameters.items()},
            output_digest=digest(output),
            created_at=_now_iso(settings.timezone),
            argv=list(argv),
        )

    def matches(self, output: str) -> bool:
        return digest(output) == self.output_digest

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def write(self, output_path: str) -> str:
        path = output_path + MANIFEST_SUFFIX
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        logging.info(f"Manifest written to {path}")
        return path

    @classmethod
    def load(cls, path: str) -> "RunManifest":
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
            return cls(
                command=data["command"],
                parameters=dict(data["parameters"]),
                output_digest=data["output_digest"],
                tool_version=data.get("tool_version", ""),
                created_at=data.get("created_at", ""),
                argv=list(data.get("argv", [])),
            )
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as e:
            raise ParameterError(f"cannot read manifest {path}: {e}", field="manifest")


def write_output(text: str, output_path: Optional[str], manifest: Optional[RunManifest] = None) -> None:
    """Write primary output to a file (plus manifest) or to stdout"""
    if output_path is None:
        print(text, end="")
        return
    with open(output_path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    logging.info(f"Output written to {output_path}")
    if manifest is not None and settings.write_manifest:
        manifest.write(output_path)
