"""Density heatmap and frozen boundary of the pyramid limit, written as SVG.

Run: python3 demos/pyramid_figure.py [tau1 tau2]
Writes demos/output/pyramid_<tau1>_<tau2>.svg and the two CSV tables.
"""

import math
import sys
from pathlib import Path

import numpy as np

from railyard.asymptotics import default_u_grid, density, frozen_boundary
from railyard.cli import chi_grid
from railyard.io import Heatmap, Polyline, RunManifest, export_table, write_svg
from railyard.presets import pyramid_limit


def main(tau=(1.0, 1.0)) -> None:
    spec = pyramid_limit(tau)
    out = Path(__file__).parent / "output"
    tag = f"{tau[0]:g}_{tau[1]:g}"
    chis = chi_grid(spec, 60)
    kappas = list(np.linspace(-2.5, 2.5, 60))
    values = [[density(spec, c, float(k)) for k in kappas] for c in chis]
    rows = [(c, float(k), values[i][j]) for i, c in enumerate(chis) for j, k in enumerate(kappas)]
    export_table(["chi", "kappa", "density"], rows, out / f"density_{tag}.csv", RunManifest.start("demo density", spec))
    curve = frozen_boundary(spec, default_u_grid(spec, 80))
    pts = [(p.u, p.chi, p.kappa, *p.residuals) for p in curve.points]
    export_table(["u", "chi", "kappa", "res1", "res2"], pts, out / f"boundary_{tag}.csv", RunManifest.start("demo boundary", spec))
    print(f"{len(pts)} boundary points, worst residual {max(max(p[3:]) for p in pts):.1e}")
    layers = [
        Heatmap(chis, kappas, values),
        Polyline([p.chi for p in curve.points], [p.kappa for p in curve.points], closed=True),
    ]
    path = write_svg(layers, out / f"pyramid_{tag}.svg", ytransform=math.tanh, ylabel="tanh(kappa)")
    print("wrote", path)


if __name__ == "__main__":
    main(tuple(float(v) for v in sys.argv[1:3]) if len(sys.argv) >= 3 else (1.0, 1.0))
