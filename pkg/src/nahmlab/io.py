"""JSON / CSV serialization.

Matrices serialize as flat row-major JSON arrays of [re, im] pairs.  CSV
floats are printed with 17 significant digits so identical runs produce
byte-identical artifacts.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .algebra import AlgebraSpec
from .gauge import GroupPath
from .paths import AlgebraPath, Grid, NahmData

__all__ = [
    "matrix_to_json",
    "matrix_from_json",
    "nahm_to_json",
    "nahm_from_json",
    "group_path_to_json",
    "group_path_from_json",
    "nahm_to_csv",
    "residual_to_csv",
    "write_json",
    "fmt",
]


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def matrix_to_json(M: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(M, dtype=complex).reshape(-1)]


def matrix_from_json(data: list, k: int) -> np.ndarray:
    flat = np.array([complex(re, im) for re, im in data])
    if flat.size != k * k:
        raise ValueError(f"expected {k * k} entries, got {flat.size}")
    return flat.reshape(k, k)


def _grid_to_json(grid: Grid) -> dict:
    return {"s0": float(grid.s0), "s1": float(grid.s1), "n": int(grid.n)}


def _grid_from_json(data: dict) -> Grid:
    return Grid(float(data["s0"]), float(data["s1"]), int(data["n"]))


def nahm_to_json(d: NahmData) -> dict:
    out = {
        "algebra": {"family": d.algebra.family, "dim": d.algebra.dim},
        "grid": _grid_to_json(d.grid),
    }
    for name, comp in zip(("T0", "T1", "T2", "T3"), d.components):
        out[name] = [matrix_to_json(M) for M in comp.values]
    return out


def nahm_from_json(data: dict) -> NahmData:
    spec = AlgebraSpec(data["algebra"]["family"], int(data["algebra"]["dim"]))
    grid = _grid_from_json(data["grid"])
    comps = []
    for name in ("T0", "T1", "T2", "T3"):
        comps.append(np.stack([matrix_from_json(m, spec.dim) for m in data[name]]))
    return NahmData.from_arrays(spec, grid, *comps)


def group_path_to_json(g: GroupPath) -> dict:
    return {
        "grid": _grid_to_json(g.grid),
        "flavor": g.flavor,
        "values": [matrix_to_json(M) for M in g.values],
    }


def group_path_from_json(data: dict) -> GroupPath:
    grid = _grid_from_json(data["grid"])
    vals = np.stack([matrix_from_json(m, int(np.sqrt(len(data["values"][0])))) for m in data["values"]])
    return GroupPath(grid, vals, data["flavor"])


def nahm_to_csv(d: NahmData, path) -> None:
    """One row per node: s, then flattened re/im entries per component."""
    k = d.algebra.dim
    header = ["s"]
    for name in ("T0", "T1", "T2", "T3"):
        for a in range(k):
            for b in range(k):
                header += [f"{name}_{a}{b}_re", f"{name}_{a}{b}_im"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for idx, s in enumerate(d.grid.nodes):
            row = [fmt(s)]
            for comp in d.components:
                for z in comp.values[idx].reshape(-1):
                    row += [fmt(z.real), fmt(z.imag)]
            writer.writerow(row)


def residual_to_csv(grid: Grid, norms: np.ndarray, path) -> None:
    """Columns s, |mu1|, |mu2|, |mu3| node-wise."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", "mu1", "mu2", "mu3"])
        for s, row in zip(grid.nodes, norms.T):
            writer.writerow([fmt(s)] + [fmt(x) for x in row])


def _pyify(obj):
    if isinstance(obj, dict):
        return {k: _pyify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_pyify(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _pyify(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(data: dict, path) -> None:
    Path(path).write_text(json.dumps(_pyify(data), indent=2, sort_keys=True) + "\n")
