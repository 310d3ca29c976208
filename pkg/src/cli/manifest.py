"""Run manifest written next to every command's outputs."""

import logging
import time
from dataclasses import dataclass, field
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any

from src.cli.output import write_json
from src.core.errors import SwitchDiffError

logger: logging.Logger = logging.getLogger(__name__)

MANIFEST_NAME: str = "manifest.json"


def library_version() -> str:
    try:
        return version("switchdiff")
    except PackageNotFoundError:
        return "0.1.0"


@dataclass
class RunManifest:
    command: str
    config: dict[str, Any]
    seed: int | None = None
    outputs: list[str] = field(default_factory=lambda: [])
    duration_s: float = 0.0
    version: str = field(default_factory=library_version)
    _started: float = field(default_factory=time.perf_counter, repr=False)

    def add_output(self, path: Path) -> None:
        self.outputs.append(path.name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "version": self.version,
            "seed": self.seed,
            "outputs": list(self.outputs),
            "duration_s": self.duration_s,
            "config": self.config,
        }

    def finish(self, out_dir: Path) -> Path:
        """Check every listed output and write manifest.json."""
        self.duration_s = time.perf_counter() - self._started
        for name in self.outputs:
            path: Path = out_dir / name
            if not path.is_file() or path.stat().st_size == 0:
                raise SwitchDiffError(f"output {path} is missing or empty")
        return write_json(out_dir / MANIFEST_NAME, self.to_dict())
