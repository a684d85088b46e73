"""Heat-bath samples of a scaled pyramid against the limit height profile.

Run: python3 demos/height_law_of_large_numbers.py [sweeps]
A shorter burn-in than the acceptance check keeps this under a minute.
"""

import sys

import numpy as np

from railyard.asymptotics import limit_height_profile
from railyard.ensemble import HeatBathChain
from railyard.graph import height_linear
from railyard.presets import pyramid_scaled, pyramid_scaled_limit


def main(burn: int = 600) -> None:
    s = 21
    eps = 1 / s
    spec = pyramid_scaled(s)
    limit, sign = pyramid_scaled_limit((1.0, 1.0))
    chain = HeatBathChain(spec, rows=200, seed=3)
    chain.sweep(burn)
    kappas = np.linspace(-2, 2, 9)
    columns = [s - 10, s - 4, s + 3, s + 9]
    acc = np.zeros((len(columns), len(kappas)))
    for _ in range(60):
        chain.sweep(10)
        cover = chain.covering()
        for a, k in enumerate(columns):
            acc[a] += [eps * height_linear(cover.partitions[k], kk / eps) for kk in kappas]
    acc /= 60
    print("kappa      " + " ".join(f"{k:6.2f}" for k in kappas))
    for a, k in enumerate(columns):
        chi = eps * (k - s)
        target = limit_height_profile(limit, sign * chi, kappas)
        print(f"chi={chi:+.2f} sampled " + " ".join(f"{v:6.2f}" for v in acc[a]))
        print(f"          limit   " + " ".join(f"{v:6.2f}" for v in target))


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 600)
