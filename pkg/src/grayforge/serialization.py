"""JSON, CSV and SVG writers with deterministic, round-trippable output.

Floats are written with 17 significant digits, which reproduces every IEEE
double exactly on reading; non-finite floats become ``null``. Exact
rationals are written as ``"p/q"`` strings by the record types themselves.
"""

from __future__ import annotations

import io
import json
import math
from typing import Any

import numpy as np

from .errors import GrayforgeError
from .profiles.reconstruct import ProfileGrid
from .profiles.types import CaseParams, SolutionSpec

SCHEMA_VERSION = 1
GRID_FIELDS = ("t", "f", "g", "h", "z", "fPrime", "gPrime", "fSecond", "gSecond", "u", "zPrime", "zSecond")
CSV_HEADER = ("t", "f", "g", "h", "z", "fprime", "gprime")
CSV_FIELDS = ("t", "f", "g", "h", "z", "fPrime", "gPrime")


class DocumentError(GrayforgeError, ValueError):
    """A document could not be parsed or lacks required fields."""


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def _encode(obj: Any, indent: int, level: int, out: list[str]) -> None:
    pad = " " * (indent * (level + 1))
    end_pad = " " * (indent * level)
    if obj is None or obj is True or obj is False:
        out.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(obj) if math.isfinite(obj) else "null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            out.append(f"{pad}{json.dumps(str(k))}: ")
            _encode(v, indent, level + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(end_pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            parts: list[str] = []
            for v in seq:
                _encode(v, indent, level + 1, parts)
            out.append("[" + ", ".join(parts) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(seq):
            out.append(pad)
            _encode(v, indent, level + 1, out)
            out.append(",\n" if i < len(seq) - 1 else "\n")
        out.append(end_pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON text with 17-significant-digit floats."""
    out: list[str] = []
    _encode(obj, indent, 0, out)
    return "".join(out) + "\n"


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}") from exc


# --------------------------------------------------------------------------
# profile documents


def profile_document(spec: SolutionSpec, grid: ProfileGrid) -> dict:
    arrays = {}
    for name in GRID_FIELDS:
        value = getattr(grid, name)
        if value is not None:
            arrays[name] = [float(v) for v in value]
    return {
        "schemaVersion": SCHEMA_VERSION,
        "kind": "profile",
        "params": spec.params.to_dict(),
        "spec": spec.to_dict(),
        "grid": {"gridSize": len(grid), "L": float(grid.L), **arrays},
    }


def _require(data: dict, key: str, where: str):
    if not isinstance(data, dict) or key not in data:
        raise DocumentError(f"missing field {key!r} in {where}")
    return data[key]


def read_profile_document(data: dict) -> tuple[CaseParams, SolutionSpec, ProfileGrid]:
    """Rebuild (params, spec, grid) from a parsed profile document."""
    if _require(data, "schemaVersion", "document") != SCHEMA_VERSION:
        raise DocumentError(f"unsupported schemaVersion {data['schemaVersion']!r}")
    if data.get("kind") != "profile":
        raise DocumentError("not a profile document")
    try:
        params = CaseParams.from_dict(_require(data, "params", "document"))
        spec = SolutionSpec.from_dict(params, _require(data, "spec", "document"))
        g = _require(data, "grid", "document")
        arrays = {}
        for name in GRID_FIELDS:
            if name in g:
                arr = np.array([np.nan if v is None else v for v in g[name]], dtype=float)
                arrays[name] = arr
        for name in ("t", "f", "g", "h", "z", "fPrime", "gPrime", "fSecond", "gSecond"):
            if name not in arrays:
                raise DocumentError(f"grid lacks array {name!r}")
        sizes = {len(a) for a in arrays.values()}
        if len(sizes) != 1 or int(g.get("gridSize", -1)) not in sizes:
            raise DocumentError("grid arrays have inconsistent lengths")
        grid = ProfileGrid(params=params, L=float(_require(g, "L", "grid")), spec=spec, **arrays)
    except DocumentError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"malformed profile document: {exc}") from exc
    return params, spec, grid


# --------------------------------------------------------------------------
# CSV and SVG


def grid_csv(grid: ProfileGrid) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_HEADER) + "\n")
    cols = [getattr(grid, name) for name in CSV_FIELDS]
    for i in range(len(grid)):
        buf.write(",".join(format_float(c[i]) for c in cols) + "\n")
    return buf.getvalue()


def csv_table(header: tuple[str, ...], rows: list[tuple]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(format_float(v) if isinstance(v, float) else str(v) for v in row) + "\n")
    return buf.getvalue()


SVG_WIDTH, SVG_HEIGHT = 800, 600
SVG_COLORS = {"f": "#1f77b4", "g": "#ff7f0e", "z": "#2ca02c", "lambda-2mu": "#d62728"}
FLAT_RELATIVE = 1e-8


def _panel_range(values: np.ndarray) -> tuple[float, float]:
    lo, hi = float(np.min(values)), float(np.max(values))
    mid = 0.5 * (lo + hi)
    if hi - lo <= FLAT_RELATIVE * max(abs(mid), 1e-300):
        half = 0.1 * abs(mid) if mid != 0 else 1.0
        return mid - half, mid + half
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def profile_svg(t: np.ndarray, series: dict[str, np.ndarray]) -> str:
    """Static 800x600 SVG with one panel and one polyline per series.

    Each polyline carries ``data-min``, ``data-max`` and ``data-mean`` with
    the plotted data in full precision. A series whose spread is below
    1e-8 of its mean is drawn against a window of +/-10% of the mean, so it
    appears flat.
    """
    names = list(series)
    left, right, top, bottom = 70, 20, 20, 30
    panel_h = (SVG_HEIGHT - top - bottom) / len(names)
    tmin, tmax = float(np.min(t)), float(np.max(t))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" '
        f'viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">',
        f'<rect x="0" y="0" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>',
    ]
    for k, name in enumerate(names):
        tt, vv = t, np.asarray(series[name], dtype=float)
        ok = np.isfinite(vv)
        tt, vv = tt[ok], vv[ok]
        lo, hi = _panel_range(vv)
        y0 = top + k * panel_h
        xs = left + (tt - tmin) / (tmax - tmin) * (SVG_WIDTH - left - right)
        ys = y0 + panel_h - 8 - (vv - lo) / (hi - lo) * (panel_h - 16)
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
        out.append(
            f'<rect x="{left}" y="{y0:.2f}" width="{SVG_WIDTH - left - right}" height="{panel_h:.2f}" '
            'fill="none" stroke="#cccccc"/>'
        )
        out.append(
            f'<polyline id="series-{name}" fill="none" stroke="{SVG_COLORS.get(name, "black")}" '
            f'stroke-width="1.5" data-min="{format_float(np.min(vv))}" data-max="{format_float(np.max(vv))}" '
            f'data-mean="{format_float(np.mean(vv))}" points="{pts}"/>'
        )
        out.append(f'<text x="8" y="{y0 + panel_h / 2:.2f}" font-family="sans-serif" font-size="14">{name}</text>')
    out.append(
        f'<text x="{SVG_WIDTH / 2:.0f}" y="{SVG_HEIGHT - 8}" font-family="sans-serif" font-size="12" '
        'text-anchor="middle">t</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"
