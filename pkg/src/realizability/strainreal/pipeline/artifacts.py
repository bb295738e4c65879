# src/realizability/strainreal/pipeline/artifacts.py
"""
Artifact emission: JSON reports, CSV grids and gnuplot-ready matrices
"""

import csv
import io
from typing import Optional

import numpy as np

from .. import __version__
from ..fields.grid import Grid2D, grid_to_csv
from ..storage.storage_interface import StorageInterface


class ArtifactWriter:
    """Writes the files of one command under `<command_slug>/` and remembers where they went"""

    def __init__(self, storage: StorageInterface, command_slug: str):
        self.storage = storage
        self.command_slug = command_slug
        self.locations = []

    def _path(self, name: str) -> str:
        return f"{self.command_slug}/{name}"

    def json(self, name: str, data: dict) -> str:
        location = self.storage.save_json(self._path(name), data)
        self.locations.append(location)
        return location

    def text(self, name: str, text: str) -> str:
        location = self.storage.save_text(self._path(name), text)
        self.locations.append(location)
        return location

    def grid_csv(self, name: str, grid: Grid2D, values: np.ndarray) -> str:
        return self.text(name, grid_to_csv(grid, values))


def points_to_csv(xx: np.ndarray, yy: np.ndarray, values: np.ndarray) -> str:
    """Samples at mapped (non-Cartesian) points, row order of the working grid"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["x", "y", "value"])
    for x, y, v in zip(np.ravel(xx), np.ravel(yy), np.ravel(values)):
        writer.writerow([format(x, ".17g"), format(y, ".17g"), format(v, ".17g")])
    return buffer.getvalue()


def grid_to_dat(grid: Grid2D, values: np.ndarray) -> str:
    """One block per y row, 'x y value' lines, blocks separated by a blank line (gnuplot splot)"""
    values = np.asarray(values, dtype=float)
    if values.size == 0 or values.shape != grid.shape:
        raise ValueError(f"plot data needs a non-empty {grid.shape} array, got shape {values.shape}")
    xs, ys = grid.xs, grid.ys
    blocks = []
    for j, y in enumerate(ys):
        rows = [f"{x:.17g} {y:.17g} {values[j, i]:.17g}" for i, x in enumerate(xs)]
        blocks.append("\n".join(rows))
    return "\n\n".join(blocks) + "\n"


def emit_plotdata(writer: ArtifactWriter, grids: dict) -> list:
    """
    Write `<name>.dat` for every (grid, values) pair in `grids`; no rendering.
    """
    if not grids:
        raise ValueError("no grids to emit")
    written = []
    for name, (grid, values) in sorted(grids.items()):
        written.append(writer.text(f"{name}.dat", grid_to_dat(grid, values)))
    return written


def build_report(command: str, max_residual: Optional[float], verdicts: dict = None,
                 residuals: dict = None, extra: dict = None, timing: Optional[float] = None) -> dict:
    """report.json payload; "max_residual" is always present (null when not applicable)"""
    report = {
        "command": command,
        "version": __version__,
        "max_residual": max_residual,
        "verdicts": verdicts or {},
        "residuals": residuals or {},
    }
    report.update(extra or {})
    if timing is not None:
        report["timing_seconds"] = timing
    return report
