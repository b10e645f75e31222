"""Atomic file emission: CSV tables, JSON reports and quick-look SVG plots."""
from __future__ import annotations

import json
import math
import os
import tempfile
from typing import Iterable, Sequence

import numpy as np

__all__ = ["atomic_write", "write_csv", "write_json", "write_svg_polyline", "format_float"]


def atomic_write(path: str, text: str) -> None:
    """Write ``text`` to a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_float(x) -> str:
    """17 significant digits in scientific notation; empty for ``None``."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".16e")


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError("row length does not match the header")
        lines.append(",".join(format_float(v) for v in row))
    atomic_write(path, "\n".join(lines) + "\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _finite(o):
    # JSON has no inf/nan; encode them as strings
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    if isinstance(o, dict):
        return {k: _finite(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_finite(v) for v in o]
    return o


def write_json(path: str, obj) -> None:
    text = json.dumps(_finite(obj), indent=2, sort_keys=False, default=_json_default)
    atomic_write(path, text + "\n")


def write_svg_polyline(
    path: str,
    series: Sequence[tuple[np.ndarray, np.ndarray]],
    title: str = "",
    width: int = 480,
    height: int = 360,
    equal_aspect: bool = False,
) -> None:
    """Plain SVG with one polyline per ``(x, y)`` series and the data bounds printed."""
    xs = np.concatenate([np.asarray(x, float) for x, _ in series])
    ys = np.concatenate([np.asarray(y, float) for _, y in series])
    x0, x1 = float(np.min(xs)), float(np.max(xs))
    y0, y1 = float(np.min(ys)), float(np.max(ys))
    if equal_aspect:
        span = max(x1 - x0, y1 - y0)
        cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        x0, x1, y0, y1 = cx - span / 2, cx + span / 2, cy - span / 2, cy + span / 2
    # a flat series still needs a nonzero box
    if x1 - x0 <= 0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 - y0 <= 0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 30
    sx = (width - 2 * pad) / (x1 - x0)
    sy = (height - 2 * pad) / (y1 - y0)
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{pad}" y="18" font-size="12">{title}</text>',
        f'<text x="{pad}" y="{height - 8}" font-size="10">'
        f"x [{x0:.6g}, {x1:.6g}]  y [{y0:.6g}, {y1:.6g}]</text>",
    ]
    for i, (x, y) in enumerate(series):
        px = pad + (np.asarray(x, float) - x0) * sx
        py = height - pad - (np.asarray(y, float) - y0) * sy
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        parts.append(
            f'<polyline fill="none" stroke="{colors[i % len(colors)]}" '
            f'stroke-width="1" points="{pts}"/>'
        )
    parts.append("</svg>")
    atomic_write(path, "\n".join(parts) + "\n")
