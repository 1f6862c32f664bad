"""Point-cloud file I/O and fit-report documents.

Formats: ASCII ``xyz`` (whitespace-separated ``x y z [nx ny nz]`` rows,
``#`` comments) and ASCII PLY 1.0 with float properties x, y, z and
optional nx, ny, nz and uchar red, green, blue.  Coordinates are meters.
Numbers are written with 9 significant digits.

Report documents are canonical JSON (sorted keys, two-space indent,
trailing newline), so serialize -> parse -> serialize is byte-identical.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from typing import Any

import numpy as np

from .cloud import PointCloud, sample_surface
from .errors import ParseError, UnsupportedFormat
from .fitting import FitConfig, FitReport
from .geometry import Intrinsics, Pose, SupertoroidModel

SCHEMA_VERSION = "1"

_FMT = "%.9g"


def _detect_format(path: str, fmt: str | None) -> str:
    if fmt is not None:
        if fmt not in ("xyz", "ply"):
            raise UnsupportedFormat(f"unknown format {fmt!r}")
        return fmt
    ext = os.path.splitext(path)[1].lower()
    if ext == ".xyz":
        return "xyz"
    if ext == ".ply":
        return "ply"
    raise UnsupportedFormat(f"cannot infer format from {path!r}; "
                            "pass fmt='xyz' or 'ply'")


def _check_finite(values, lineno: int):
    for v in values:
        if not math.isfinite(v):
            raise ParseError(lineno, "non-finite coordinate")


def read_cloud(path: str, fmt: str | None = None) -> PointCloud:
    """Read a point cloud from an xyz or ascii-PLY file."""
    fmt = _detect_format(path, fmt)
    if fmt == "xyz":
        return _read_xyz(path)
    points, normals, _ = read_ply_vertices(path)
    return PointCloud(points=points, normals=normals)


def _read_xyz(path: str) -> PointCloud:
    points: list = []
    normals: list = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            if len(tokens) not in (3, 6):
                raise ParseError(lineno, f"expected 3 or 6 fields, "
                                         f"got {len(tokens)}")
            try:
                values = [float(t) for t in tokens]
            except ValueError:
                raise ParseError(lineno, "unparsable number") from None
            _check_finite(values, lineno)
            if len(values) == 6:
                if points and not normals:
                    raise ParseError(lineno, "inconsistent normal columns")
                normals.append(values[3:])
            elif normals:
                raise ParseError(lineno, "inconsistent normal columns")
            points.append(values[:3])
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    nrm = np.asarray(normals, dtype=float).reshape(-1, 3) if normals else None
    return PointCloud(points=pts, normals=nrm)


_PLY_FLOAT_TYPES = {"float", "float32", "float64", "double"}
_PLY_UCHAR_TYPES = {"uchar", "uint8"}


def read_ply_vertices(path: str):
    """Parse an ascii PLY vertex element.

    Returns (points (N,3), normals (N,3) or None, colors (N,3) uint8 or
    None).  Line numbers in errors refer to the whole file.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    if not lines or lines[0].strip() != "ply":
        raise ParseError(1, "missing 'ply' magic")

    n_vertex = None
    prop_names: list = []
    in_vertex_element = False
    header_end = None
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if line == "end_header":
            header_end = lineno
            break
        if not line or line.startswith("comment"):
            continue
        parts = line.split()
        if parts[0] == "format":
            if parts[1] != "ascii":
                raise UnsupportedFormat("only ascii PLY is supported")
        elif parts[0] == "element":
            in_vertex_element = parts[1] == "vertex"
            if in_vertex_element:
                n_vertex = int(parts[2])
        elif parts[0] == "property" and in_vertex_element:
            if len(parts) != 3:
                raise ParseError(lineno, "unsupported property declaration")
            ptype, pname = parts[1], parts[2]
            if pname in ("x", "y", "z", "nx", "ny", "nz"):
                if ptype not in _PLY_FLOAT_TYPES:
                    raise ParseError(lineno, f"property {pname} must be float")
            elif pname in ("red", "green", "blue"):
                if ptype not in _PLY_UCHAR_TYPES:
                    raise ParseError(lineno, f"property {pname} must be uchar")
            prop_names.append(pname)
    if header_end is None:
        raise ParseError(len(lines), "missing end_header")
    if n_vertex is None:
        raise ParseError(header_end, "missing vertex element")
    for needed in ("x", "y", "z"):
        if needed not in prop_names:
            raise ParseError(header_end, f"missing property {needed}")

    col = {name: idx for idx, name in enumerate(prop_names)}
    has_normals = all(k in col for k in ("nx", "ny", "nz"))
    has_colors = all(k in col for k in ("red", "green", "blue"))

    rows = np.empty((n_vertex, len(prop_names)), dtype=float)
    for k in range(n_vertex):
        lineno = header_end + 1 + k
        if lineno > len(lines):
            raise ParseError(len(lines), "truncated vertex data")
        tokens = lines[lineno - 1].split()
        if len(tokens) != len(prop_names):
            raise ParseError(lineno, f"expected {len(prop_names)} fields, "
                                     f"got {len(tokens)}")
        try:
            rows[k] = [float(t) for t in tokens]
        except ValueError:
            raise ParseError(lineno, "unparsable number") from None
        _check_finite(rows[k, [col["x"], col["y"], col["z"]]], lineno)

    points = rows[:, [col["x"], col["y"], col["z"]]]
    normals = rows[:, [col["nx"], col["ny"], col["nz"]]] if has_normals \
        else None
    colors = rows[:, [col["red"], col["green"], col["blue"]]].astype(np.uint8) \
        if has_colors else None
    return points, normals, colors


def write_cloud(cloud: PointCloud, path: str, fmt: str | None = None) -> None:
    """Write a point cloud to an xyz or ascii-PLY file."""
    fmt = _detect_format(path, fmt)
    if fmt == "xyz":
        _write_xyz(cloud, path)
    else:
        write_ply(path, cloud.points, normals=cloud.normals)


def _write_xyz(cloud: PointCloud, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# x y z" + (" nx ny nz" if cloud.normals is not None
                              else "") + "\n")
        for k in range(len(cloud)):
            row = list(cloud.points[k])
            if cloud.normals is not None:
                row += list(cloud.normals[k])
            fh.write(" ".join(_FMT % v for v in row) + "\n")


def write_ply(path: str, points: np.ndarray,
              normals: np.ndarray | None = None,
              colors: np.ndarray | None = None) -> None:
    """Write an ascii PLY vertex cloud with optional normals and colors."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    n = points.shape[0]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {n}\n")
        fh.write("property float x\nproperty float y\nproperty float z\n")
        if normals is not None:
            fh.write("property float nx\nproperty float ny\n"
                     "property float nz\n")
        if colors is not None:
            fh.write("property uchar red\nproperty uchar green\n"
                     "property uchar blue\n")
        fh.write("end_header\n")
        for k in range(n):
            fields = [_FMT % v for v in points[k]]
            if normals is not None:
                fields += [_FMT % v for v in normals[k]]
            if colors is not None:
                fields += [str(int(v)) for v in colors[k]]
            fh.write(" ".join(fields) + "\n")


GREEN = (0, 255, 0)
RED = (255, 0, 0)


def export_fit_overlay(model: SupertoroidModel, cloud: PointCloud,
                       path: str, n_eta: int = 48, n_omega: int = 48) -> None:
    """Write input cloud (green) plus a dense fitted-surface sampling (red)
    into one colored PLY for external viewers."""
    surface = sample_surface(model, n_eta, n_omega)
    points = np.vstack([cloud.points, surface.points])
    colors = np.vstack([
        np.tile(GREEN, (len(cloud), 1)),
        np.tile(RED, (len(surface), 1)),
    ]).astype(np.uint8)
    write_ply(path, points, colors=colors)


# --------------------------------------------------------------------------
# Report documents
# --------------------------------------------------------------------------

def model_to_dict(m: SupertoroidModel) -> dict:
    i = m.intrinsics
    return {
        "intrinsics": {"a1": i.a1, "a2": i.a2, "a3": i.a3, "a4": i.a4,
                       "eps1": i.eps1, "eps2": i.eps2},
        "pose": {
            "translation": [float(v) for v in m.pose.translation],
            "quaternion": [float(v) for v in m.pose.quaternion],
        },
    }


def model_from_dict(d: dict) -> SupertoroidModel:
    i = d["intrinsics"]
    p = d["pose"]
    return SupertoroidModel(
        intrinsics=Intrinsics(i["a1"], i["a2"], i["a3"], i["a4"],
                              i["eps1"], i["eps2"]),
        pose=Pose(np.asarray(p["translation"]), np.asarray(p["quaternion"])),
    )


def config_to_dict(cfg: FitConfig) -> dict:
    d = dataclasses.asdict(cfg)
    for key, value in d.items():
        if isinstance(value, tuple):
            d[key] = list(value)
    return d


def report_to_dict(report: FitReport) -> dict:
    return {
        "model": model_to_dict(report.model),
        "stage1_cost": _json_float(report.stage1_cost),
        "stage2_cost": report.stage2_cost,
        "rms_residual": report.rms_residual,
        "inlier_fraction": report.inlier_fraction,
        "inlier_tau": report.inlier_tau,
        "iterations": list(report.iterations),
        "wall_time": {"stage1_s": report.wall_time[0],
                      "stage2_s": report.wall_time[1],
                      "total_s": report.wall_time[2]},
        "degenerate_point_count": report.degenerate_point_count,
        "converged": report.converged,
        "stage1_start_costs": [_json_float(c)
                               for c in report.stage1_start_costs],
        "quality": report.quality,
    }


def _json_float(v: float):
    # JSON has no NaN/Inf literals; encode them as strings.
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def fit_document(report: FitReport, cfg: FitConfig, source: str,
                 n_points: int) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "fit_report",
        "input": {"source": source, "n_points": n_points},
        "config": config_to_dict(cfg),
        "result": report_to_dict(report),
    }


def benchmark_document(cfg: FitConfig, source: str, n_points: int,
                       runs: list) -> dict:
    """Aggregate repeated-fit rows into a benchmark document.

    ``runs`` holds per-run dicts with seed, rms_residual, quality,
    t_s1/t_s2/t_total, converged.  Mean/std are recomputed exactly from
    the rows stored in the document.
    """
    t1 = [r["t_s1"] for r in runs]
    t2 = [r["t_s2"] for r in runs]
    tt = [r["t_total"] for r in runs]
    qualities = [r["quality"] for r in runs]
    aggregates = {
        "good": sum(q == "good" for q in qualities),
        "decent": sum(q == "decent" for q in qualities),
        "bad": sum(q == "bad" for q in qualities),
        "t_s1_mean": float(np.mean(t1)),
        "t_s2_mean": float(np.mean(t2)),
        "t_total_mean": float(np.mean(tt)),
        "s_total": float(np.std(tt, ddof=1)) if len(tt) > 1 else 0.0,
    }
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "benchmark_report",
        "input": {"source": source, "n_points": n_points},
        "config": config_to_dict(cfg),
        "runs": runs,
        "aggregates": aggregates,
    }


def document_dumps(doc: dict) -> str:
    """Canonical JSON encoding (stable across serialize/parse cycles)."""
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def document_loads(text: str) -> dict:
    return json.loads(text)


_VOLATILE_KEYS = {"wall_time", "t_s1", "t_s2", "t_total", "t_s1_mean",
                  "t_s2_mean", "t_total_mean", "s_total"}


def strip_volatile(doc: Any) -> Any:
    """Copy of a document with timing fields removed (for comparisons)."""
    if isinstance(doc, dict):
        return {k: strip_volatile(v) for k, v in doc.items()
                if k not in _VOLATILE_KEYS}
    if isinstance(doc, list):
        return [strip_volatile(v) for v in doc]
    return doc
