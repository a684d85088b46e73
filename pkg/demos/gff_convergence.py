"""Finite-size covariance of gamma_1 approaching the limiting Gaussian covariance.

On the scaled pyramid with eps = 1/s and t = exp(-2 eps), Cov / eps^2 of
gamma_1 at two columns tends to the double contour integral. Column i maps
to limit coordinate chi = -i / s (see presets.pyramid_scaled_limit).

Run: python3 demos/gff_convergence.py
"""

import math

from railyard.asymptotics import gff_covariance
from railyard.contour import finite_covariance_11
from railyard.presets import pyramid_scaled, pyramid_scaled_limit


def main() -> None:
    limit, sign = pyramid_scaled_limit((1.0, 1.0))
    pairs = [(0.5, -0.3), (0.5, 0.5), (-0.3, -0.3)]
    targets = {p: gff_covariance(limit, sign * p[0], sign * p[1]) for p in pairs}
    print("s     " + "  ".join(f"chi=({a:+.1f},{b:+.1f})" for a, b in pairs))
    for s in (30, 50, 70, 90):
        vals = []
        for a, b in pairs:
            i, j = round(a * s), round(b * s)
            vals.append(finite_covariance_11(pyramid_scaled(s), i, j, math.exp(-2 / s)) * s * s)
        print(f"{s:<5} " + "  ".join(f"{v:17.4f}" for v in vals))
    print("limit " + "  ".join(f"{targets[p]:17.4f}" for p in pairs))


if __name__ == "__main__":
    main()
