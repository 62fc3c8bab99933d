"""File manager for loading and saving states, settings, behaviors, models and reports."""
from __future__ import annotations

import hashlib
import json
import os
import re
from pathlib import Path
from typing import Any, Callable, Optional, TypeVar

from src.engine.grid import certify_grid
from src.engine.tomography import TomographyRecord
from src.models.axiom import AxiomModel
from src.models.behavior import Behavior, BellFunctional, SettingsSet
from src.models.errors import InputError, PolarsepError
from src.models.grid import PolarizationGrid
from src.models.polarization import DensityMatrix
from src.models.subensemble import SubensembleModel

T = TypeVar("T")

PRESET_PREFIX = "preset:"


def _data_dir() -> Path:
    """Return the path to the bundled data directory.

    Handles both development (src/data/) and PyInstaller (sys._MEIPASS) paths.
    """
    import sys
    if getattr(sys, 'frozen', False):
        # Running from PyInstaller bundle - data is at _MEIPASS/data/
        return Path(sys._MEIPASS) / "data"  # type: ignore
    else:
        # Development - data is at src/data/
        return Path(__file__).resolve().parent.parent / "data"


def _line_of(text: str, key: str) -> Optional[int]:
    match = re.search(rf'"{re.escape(key)}"\s*:', text)
    return text.count("\n", 0, match.start()) + 1 if match else None


class FileManager:
    """Manages loading/saving of the JSON interchange files.

    Every loader accepts either a path or ``preset:NAME`` for the bundled
    presets, and reports malformed input as InputError with the file, the
    offending field and, when it can be located, the line.
    """

    @staticmethod
    def load_presets(path: Optional[str] = None) -> dict:
        """Load the bundled presets (states, settings, functionals)."""
        if path is None:
            path = str(_data_dir() / "presets.json")
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)

    @staticmethod
    def _read(path: str, section: str) -> tuple[Any, str, str]:
        """Return (data, text, label) for a file or a preset from ``section``."""
        if path.startswith(PRESET_PREFIX):
            name = path[len(PRESET_PREFIX):]
            presets = FileManager.load_presets().get(section, {})
            if name not in presets:
                raise InputError(f"unknown preset (available: {', '.join(sorted(presets))})", path=path)
            return presets[name], "", path
        try:
            with open(path, "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as exc:
            raise InputError(f"cannot read file: {exc.strerror}", path=path)
        try:
            return json.loads(text), text, path
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed JSON: {exc.msg}", path=path, line=exc.lineno)

    @staticmethod
    def _parse(path: str, section: str, parser: Callable[[Any], T]) -> T:
        data, text, label = FileManager._read(path, section)
        try:
            return parser(data)
        except KeyError as exc:
            field = str(exc.args[0])
            raise InputError("missing field", path=label, field=field, line=_line_of(text, field))
        except (TypeError, IndexError, AttributeError) as exc:
            raise InputError(f"unexpected structure ({exc})", path=label)
        except (PolarsepError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(str(exc), path=label, field=type(exc).__name__)

    @staticmethod
    def load_state(path: str, allow_witness: bool = False) -> DensityMatrix:
        """Load a density matrix; witnesses are rejected unless allowed."""
        def parse(data):
            rho = DensityMatrix.from_dict(data)
            if rho.witness and not allow_witness:
                raise InputError("file holds a witness; pass --allow-witness", path=path, field="witness")
            return rho

        return FileManager._parse(path, "states", parse)

    @staticmethod
    def load_settings(path: str) -> SettingsSet:
        return FileManager._parse(path, "settings", SettingsSet.from_dict)

    @staticmethod
    def load_behavior(path: str) -> Behavior:
        """Load a behavior file (bare, or as written by gen-behavior)."""
        return FileManager._parse(path, "behaviors", lambda d: Behavior.from_dict(d.get("behavior", d)))

    @staticmethod
    def load_functional(path: str) -> BellFunctional:
        return FileManager._parse(path, "functionals", BellFunctional.from_dict)

    @staticmethod
    def load_stats(path: str) -> list[TomographyRecord]:
        """Load tomography records from a list or {"records": [...]}."""
        def parse(data):
            records = data["records"] if isinstance(data, dict) else data
            return [TomographyRecord.from_dict(r) for r in records]

        return FileManager._parse(path, "stats", parse)

    @staticmethod
    def load_grid(path: str) -> PolarizationGrid:
        """A saved grid, with its covering angle checked against its points."""
        return certify_grid(FileManager._parse(path, "grids", PolarizationGrid.from_dict))

    @staticmethod
    def load_model(path: str) -> SubensembleModel:
        return FileManager._parse(path, "models", SubensembleModel.from_dict)

    @staticmethod
    def load_axiom_model(path: str) -> AxiomModel:
        return FileManager._parse(path, "models", AxiomModel.from_dict)

    @staticmethod
    def dumps(data: Any) -> str:
        """Deterministic JSON text (sorted keys, fixed indentation, trailing newline)."""
        return json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n"

    @staticmethod
    def save_json(data: Any, path: str) -> None:
        """Save a JSON-ready object."""
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(FileManager.dumps(data))

    @staticmethod
    def digest(path: str) -> str:
        """sha256 of a file, or of the preset's canonical JSON for ``preset:NAME``."""
        h = hashlib.sha256()
        if path.startswith(PRESET_PREFIX):
            presets = FileManager.load_presets()
            name = path[len(PRESET_PREFIX):]
            found = next((sec[name] for sec in presets.values() if name in sec), None)
            h.update(FileManager.dumps(found).encode("utf-8"))
            return h.hexdigest()
        with open(path, "rb") as f:
            for chunk in iter(lambda: f.read(1 << 20), b""):
                h.update(chunk)
        return h.hexdigest()
