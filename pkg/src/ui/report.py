"""Machine-readable run reports."""
from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any

from src.config import DEFAULT_SEED, TOOL_VERSION
from src.io.file_manager import FileManager


@dataclass
class RunReport:
    """What a command read, what it concluded and with which version and seed.

    Timings are wall-clock and only written when ``include_timings`` is set,
    so that identical inputs and seed give byte-identical reports.
    """

    command: str
    seed: int = DEFAULT_SEED
    tolerance_profile: str = "default"
    tool_version: str = TOOL_VERSION
    inputs: dict[str, dict[str, str]] = field(default_factory=dict)
    verdicts: dict[str, Any] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    include_timings: bool = False
    exit_code: int = 0

    def add_input(self, label: str, path: str) -> None:
        self.inputs[label] = {"path": path, "sha256": FileManager.digest(path)}

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = round((time.perf_counter() - start) * 1000.0, 3)

    def to_dict(self) -> dict:
        data = {
            "command": self.command,
            "toolVersion": self.tool_version,
            "seed": self.seed,
            "toleranceProfile": self.tolerance_profile,
            "inputs": self.inputs,
            "verdicts": self.verdicts,
            "exitCode": self.exit_code,
        }
        if self.include_timings:
            data["timings"] = self.timings
        return data

    def save(self, path: str) -> None:
        FileManager.save_json(self.to_dict(), path)
