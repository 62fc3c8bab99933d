"""CSV export for behaviors and text export for linear programs."""
from __future__ import annotations

import csv
import io
from typing import Optional, TextIO

import numpy as np

from src.models.behavior import Behavior
from src.models.program import LinearProgram


class CSVExporter:
    """Exports behaviors to CSV format."""

    @staticmethod
    def export(behavior: Behavior, file_or_path, correlators: bool = True) -> None:
        """Export a behavior to a CSV file or file-like object.

        Args:
            behavior: The probability table.
            file_or_path: A file path (str) or writable file-like object.
            correlators: Append the correlator summary E(x,y).
        """
        if isinstance(file_or_path, str):
            with open(file_or_path, "w", encoding="utf-8", newline="") as f:
                CSVExporter._write(behavior, f, correlators)
        else:
            CSVExporter._write(behavior, file_or_path, correlators)

    @staticmethod
    def _write(behavior: Behavior, f: TextIO, correlators: bool) -> None:
        writer = csv.writer(f, delimiter=";")

        writer.writerow(["x", "y", "P(0,0)", "P(0,1)", "P(1,0)", "P(1,1)"])
        for x in range(behavior.n_alice):
            for y in range(behavior.n_bob):
                t = behavior.table[x, y]
                writer.writerow([x, y] + [f"{t[a, b]:.12f}" for a in (0, 1) for b in (0, 1)])

        if correlators:
            writer.writerow([])
            writer.writerow(["CORRELADORES"])
            e = behavior.correlators()
            for x in range(behavior.n_alice):
                for y in range(behavior.n_bob):
                    writer.writerow([f"E({x},{y})", f"{e[x, y]:.12f}"])

    @staticmethod
    def to_string(behavior: Behavior, correlators: bool = True) -> str:
        """Export a behavior to a CSV string."""
        buf = io.StringIO()
        CSVExporter.export(behavior, buf, correlators)
        return buf.getvalue()


class LPWriter:
    """Writes a LinearProgram as CPLEX LP text.

    A feasibility program gets the constant objective 0 under Minimize, and
    every variable is declared in the Bounds section.
    """

    @staticmethod
    def _expression(terms, n_vars: int) -> str:
        parts = [f"{'-' if v < 0 else '+'} {abs(v):.17g} x{j}" for j, v in terms if v != 0.0]
        if not parts:
            return "0 x0" if n_vars else "0"
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else text

    @staticmethod
    def _terms(mat, i: int) -> str:
        start, end = mat.indptr[i], mat.indptr[i + 1]
        return LPWriter._expression(zip(mat.indices[start:end], mat.data[start:end]), mat.shape[1])

    @staticmethod
    def to_string(lp: LinearProgram, name: Optional[str] = None) -> str:
        lines = [f"\\ {name}" if name else "\\ polarsep linear program"]
        if lp.objective is not None:
            nz = np.flatnonzero(lp.objective)
            lines += ["Maximize", f" obj: {LPWriter._expression(zip(nz, lp.objective[nz]), lp.n_vars)}"]
        else:
            lines += ["Minimize", f" obj: {LPWriter._expression((), lp.n_vars)}"]
        lines.append("Subject To")
        for i in range(lp.n_eq):
            lines.append(f" e{i}: {LPWriter._terms(lp.a_eq, i)} = {lp.b_eq[i]:.17g}")
        for i in range(lp.n_ub):
            lines.append(f" u{i}: {LPWriter._terms(lp.a_ub, i)} <= {lp.b_ub[i]:.17g}")
        lines.append("Bounds")
        for j in range(lp.n_vars):
            lines.append(f" x{j} >= {lp.lower[j]:.17g}")
        lines.append("End")
        return "\n".join(lines) + "\n"

    @staticmethod
    def export(lp: LinearProgram, path: str, name: Optional[str] = None) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(LPWriter.to_string(lp, name))
