"""Named specs: pyramid partitions, steep and Aztec shapes, and their scaling data."""

from __future__ import annotations

import math
from fractions import Fraction

from .asymptotics import AsymptoticSpec
from .graph import RailYardSpec


def pyramid(s: int, x: Fraction | str = Fraction(1, 3)) -> RailYardSpec:
    """Pyramid partitions on columns -s..s-1 with a constant weight; s odd."""
    if s < 1 or s % 2 == 0:
        raise ValueError("pyramid size s must be odd and positive")
    cols = range(-s, s)
    a = ["L" if i % 2 else "R" for i in cols]
    b = ["+" if i < 0 else "-" for i in cols]
    return RailYardSpec.from_words(a, b, [x] * len(a), l=-s)


def pyramid_scaled(s: int, tau: tuple[float, float] = (1.0, 1.0)) -> RailYardSpec:
    """Pyramid with weights that vary on the scale epsilon = 1/s.

    Column i gets tau * e^{i/s} when i < 0 and e^{-i/s} / tau when i >= 0,
    with tau = tau[0] on odd (L) columns and tau[1] on even (R) columns.
    Every pair product that enters the partition function is below 1.
    """
    eps = 1.0 / s
    a, b, x = [], [], []
    for i in range(-s, s):
        odd = i % 2 != 0
        t = tau[0] if odd else tau[1]
        a.append("L" if odd else "R")
        if i < 0:
            b.append("+")
            x.append(Fraction(t * math.exp(eps * i)))
        else:
            b.append("-")
            x.append(Fraction(math.exp(-eps * i) / t))
    return RailYardSpec.from_words(a, b, x, l=-s)


def pyramid_limit(tau: tuple[float, float] = (1.0, 1.0), V2: float = 1.0, beta: int = 1) -> AsymptoticSpec:
    """Scaling data of the pyramid: V = (-V2, 0, V2), residue 1 of type L."""
    return AsymptoticSpec(
        n=2,
        V=(-V2, 0.0, V2),
        tau=tuple(tau),
        a_res=("L", "R"),
        b_seg=(("+", "+"), ("-", "-")),
        beta=beta,
    )


def pyramid_scaled_limit(tau: tuple[float, float] = (1.0, 1.0)) -> tuple[AsymptoticSpec, int]:
    """Limit data matching ``pyramid_scaled`` and the sign to apply to chi.

    The finite model at chi corresponds to the returned spec at -chi, with
    the two tau values exchanged (w -> -w swaps the L and R factor forms).
    """
    return pyramid_limit((tau[1], tau[0])), -1


def steep(word: str, s: int, signs: str | None = None, x=Fraction(1, 3)) -> RailYardSpec:
    """Steep-tiling spec on columns -s..s-1.

    ``word`` is the LR pattern, repeated; ``signs`` defaults to s pluses then
    s minuses. ``x`` is one weight for every column or an explicit list.
    """
    if not word or any(c not in "LR" for c in word):
        raise ValueError("word must be a nonempty string over {L, R}")
    if s < 1:
        raise ValueError("s must be positive")
    a = [word[k % len(word)] for k in range(2 * s)]
    b = list(signs) if signs is not None else ["+"] * s + ["-"] * s
    if len(b) != 2 * s:
        raise ValueError(f"sign word needs {2 * s} letters")
    xs = list(x) if isinstance(x, (list, tuple)) else [x] * (2 * s)
    return RailYardSpec.from_words(a, b, xs, l=-s)


def aztec(n: int, x: Fraction | str = Fraction(1, 3)) -> RailYardSpec:
    """Aztec-diamond style spec: alternating L/R columns with signs alternating +, -."""
    if n < 1:
        raise ValueError("n must be positive")
    a = ["L" if k % 2 == 0 else "R" for k in range(2 * n)]
    b = ["+" if k % 2 == 0 else "-" for k in range(2 * n)]
    return RailYardSpec.from_words(a, b, [x] * len(a))


PRESETS = {
    "pyramid": pyramid,
    "pyramid-scaled": pyramid_scaled,
    "steep": steep,
    "aztec": aztec,
}
