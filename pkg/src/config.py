"""Runtime configuration: version, defaults and tolerance profiles."""
from __future__ import annotations

import os
from dataclasses import dataclass, replace

TOOL_VERSION = "1.0.0"

THREADS_ENV = "POLARSEP_THREADS"
DEFAULT_SEED = 0

DEFAULT_MEMBERSHIP_GRID = 512
DEFAULT_OPTIMIZATION_GRID = 64
DEFAULT_PROBES = 100_000


@dataclass(frozen=True)
class ToleranceProfile:
    """Numerical tolerances used across the engine."""

    name: str = "default"
    hermitian: float = 1e-12
    state: float = 1e-10
    pivot: float = 1e-10
    feasibility: float = 1e-9
    duality_gap: float = 1e-8
    certificate: float = 1e-9
    no_signalling: float = 1e-10
    table: float = 1e-8
    purity: float = 1e-9
    max_pivots: int = 1_000_000


DEFAULT = ToleranceProfile()
STRICT = replace(DEFAULT, name="strict", feasibility=1e-10, certificate=1e-10, table=1e-9)

PROFILES = {p.name: p for p in (DEFAULT, STRICT)}


def get_profile(name: str) -> ToleranceProfile:
    """Look up a tolerance profile by name."""
    try:
        return PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown tolerance profile {name!r} (choose from {sorted(PROFILES)})")


def default_threads() -> int:
    """Worker count from POLARSEP_THREADS, falling back to 1."""
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
