"""Serialization: spec files, CSV tables with manifest sidecars, and SVG plots."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import __version__
from .asymptotics import AsymptoticSpec
from .graph import RailYardSpec


class OutputError(OSError):
    pass


def load_spec(path: str | Path) -> RailYardSpec | AsymptoticSpec:
    """Read either spec kind; asymptotic specs are recognised by the ``V`` key."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise OutputError(str(exc)) from exc
    if "V" in data:
        return AsymptoticSpec.from_json(data)
    return RailYardSpec.from_json(data)


def spec_json(spec: RailYardSpec | AsymptoticSpec) -> str:
    return json.dumps(spec.to_json(), sort_keys=True, separators=(",", ":"))


def spec_hash(spec: RailYardSpec | AsymptoticSpec) -> str:
    return hashlib.sha256(spec_json(spec).encode()).hexdigest()[:16]


@dataclass
class RunManifest:
    command: str
    spec_hash: str | None
    seed: int | None
    tool_version: str
    started: str
    finished: str | None = None

    @classmethod
    def start(cls, command: str, spec=None, seed: int | None = None) -> "RunManifest":
        return cls(
            command=command,
            spec_hash=spec_hash(spec) if spec is not None else None,
            seed=seed,
            tool_version=__version__,
            started=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        )

    def finish(self) -> "RunManifest":
        self.finished = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return self


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else str(value)
    return str(value)


def table_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OutputError(str(exc)) from exc


def export_table(header: Sequence[str], rows: Iterable[Sequence], path: str | Path, manifest: RunManifest | None = None, fmt: str = "csv") -> Path:
    """Write a table as CSV or JSON; the manifest goes to ``<path>.manifest.json``."""
    path = Path(path)
    rows = [list(r) for r in rows]
    if fmt == "csv":
        _write(path, table_csv(header, rows))
    elif fmt == "json":
        records = [dict(zip(header, r)) for r in rows]
        _write(path, json.dumps(records, indent=1, sort_keys=False) + "\n")
    else:
        raise ValueError(f"unknown format {fmt}")
    if manifest is not None:
        _write(path.with_name(path.name + ".manifest.json"), json.dumps(asdict(manifest.finish()), indent=1) + "\n")
    return path


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OutputError(str(exc)) from exc
    if not rows:
        raise ValueError(f"{path} is empty")
    return rows[0], rows[1:]


# ---------------------------------------------------------------------------
# SVG


@dataclass
class Polyline:
    xs: list[float]
    ys: list[float]
    color: str = "#c0392b"
    closed: bool = False


@dataclass
class Heatmap:
    """Cell values in [0, vmax] on a regular grid, drawn in grey levels."""

    xs: list[float]
    ys: list[float]
    values: list[list[float]]  # values[i][j] at (xs[i], ys[j])
    vmax: float = 2.0


def _num(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


def _edges(centers: Sequence[float]) -> list[float]:
    if len(centers) == 1:
        return [centers[0] - 0.5, centers[0] + 0.5]
    mids = [(a + b) / 2 for a, b in zip(centers[:-1], centers[1:])]
    return [2 * centers[0] - mids[0], *mids, 2 * centers[-1] - mids[-1]]


def render_svg(
    layers: Sequence[Polyline | Heatmap],
    width: int = 480,
    height: int = 480,
    xlabel: str = "chi",
    ylabel: str = "kappa",
    bounds: tuple[float, float, float, float] | None = None,
    ytransform: Callable[[float], float] | None = None,
) -> str:
    """Deterministic SVG with axes; later layers are drawn on top.

    ``ytransform`` (for example tanh) is applied to every ordinate first,
    which brings curves that run off to infinity into a bounded picture.
    """
    if not layers:
        raise ValueError("nothing to render")
    ty = ytransform or (lambda v: v)
    if bounds is None:
        xs = [x for lay in layers for x in lay.xs if math.isfinite(x)]
        ys = [ty(y) for lay in layers for y in lay.ys if math.isfinite(y)]
        bounds = (min(xs), max(xs), min(ys), max(ys))
    x0, x1, y0, y1 = bounds
    if x1 <= x0:
        x1 = x0 + 1
    if y1 <= y0:
        y1 = y0 + 1
    pad = 40
    iw, ih = width - 2 * pad, height - 2 * pad

    def px(x):
        return pad + (x - x0) / (x1 - x0) * iw

    def py(y):
        return pad + (y1 - y) / (y1 - y0) * ih

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    for lay in layers:
        if isinstance(lay, Heatmap):
            xe = _edges(lay.xs)
            ye = [ty(v) for v in _edges(lay.ys)]
            for i in range(len(lay.xs)):
                for j in range(len(lay.ys)):
                    v = min(max(lay.values[i][j] / lay.vmax, 0.0), 1.0)
                    g = int(round(255 * (1 - v)))
                    top, bottom = py(max(ye[j], ye[j + 1])), py(min(ye[j], ye[j + 1]))
                    out.append(
                        f'<rect x="{_num(px(xe[i]))}" y="{_num(top)}" width="{_num(px(xe[i + 1]) - px(xe[i]) + 0.5)}" '
                        f'height="{_num(bottom - top + 0.5)}" fill="rgb({g},{g},{g})"/>'
                    )
        else:
            pts = " ".join(
                f"{_num(px(x))},{_num(py(ty(y)))}" for x, y in zip(lay.xs, lay.ys) if math.isfinite(x) and math.isfinite(y)
            )
            tag = "polygon" if lay.closed else "polyline"
            out.append(f'<{tag} points="{pts}" fill="none" stroke="{lay.color}" stroke-width="1.5"/>')
    out.append(f'<rect x="{pad}" y="{pad}" width="{iw}" height="{ih}" fill="none" stroke="black"/>')
    for frac in (0.0, 0.5, 1.0):
        xv = x0 + frac * (x1 - x0)
        yv = y0 + frac * (y1 - y0)
        out.append(f'<text x="{_num(px(xv))}" y="{height - pad + 16}" font-size="11" text-anchor="middle">{_num(xv)}</text>')
        out.append(f'<text x="{pad - 6}" y="{_num(py(yv) + 4)}" font-size="11" text-anchor="end">{_num(yv)}</text>')
    out.append(f'<text x="{width / 2:.0f}" y="{height - 6}" font-size="12" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="12" y="{height / 2:.0f}" font-size="12" transform="rotate(-90 12 {height / 2:.0f})" text-anchor="middle">{ylabel}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(layers, path: str | Path, **kwargs) -> Path:
    path = Path(path)
    _write(path, render_svg(layers, **kwargs))
    return path
