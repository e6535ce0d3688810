"""Independent reference oracles for the test suite.

Nothing here touches the scaled-integer tables or the kernels: measures are
summed interval by interval in Fraction arithmetic, and float grids use plain
numpy.
"""
from __future__ import annotations

import random
from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from densitylab.core import Configuration, make_configuration

HALF = Fraction(1, 2)


def measure(C: Configuration, lo: Fraction, hi: Fraction) -> Fraction:
    total = max(Fraction(0), min(hi, Fraction(0)) - lo)
    for iv in C.intervals:
        a, b = max(lo, iv.lo), min(hi, iv.hi)
        if a < b:
            total += b - a
    return total


def density(C: Configuration, p: Fraction, w: Fraction) -> Fraction:
    return measure(C, p - w, p + w) / (2 * w)


def breakpoint_radii(C: Configuration, p: Fraction) -> list[Fraction]:
    return sorted({abs(e - p) for e in C.endpoint_values} - {Fraction(0)})


def brute_stats(C: Configuration, p: Fraction):
    """(sup, inf, sup_radius, inf_radius) from every breakpoint radius.

    The limits at 0+ and infinity are both 1/2; radius None marks them.
    """
    sup, inf, rs, ri = HALF, HALF, None, None
    for w in breakpoint_radii(C, p):
        d = density(C, p, w)
        if d > sup:
            sup, rs = d, w
        if d < inf:
            inf, ri = d, w
    return sup, inf, rs, ri


def brute_delta_star(C: Configuration) -> Fraction:
    esc = []
    for p in C.endpoint_values:
        sup, inf, _, _ = brute_stats(C, p)
        esc.append(max(sup, 1 - inf))
    return 1 - min(esc)


def float_cumulative(C: Configuration):
    """x -> measure of the configuration on (-inf, x) minus the ray, as floats."""
    e = np.array([0.0] + [float(x) for iv in C.intervals for x in (iv.lo, iv.hi)])
    G = np.zeros_like(e)
    for k in range(1, len(e)):
        G[k] = G[k - 1] + (e[k] - e[k - 1] if k % 2 == 0 else 0.0)
    return lambda x: np.where(x <= 0, x, np.interp(x, e, G))


def log_grid(lo: float, hi: float, n: int):
    """n log-spaced radii and the provable resolution of a grid scan.

    The density d(w) = m(w) / (2w) has |d'(w)| <= 1/w, so a grid point within
    a log-distance of ln(1+rho)/2 of the extremal radius is off by at most
    that much.
    """
    w = np.geomspace(lo, hi, n)
    return w, float(np.log(w[1] / w[0])) / 2


def grid_profile(C: Configuration, p, w: np.ndarray) -> np.ndarray:
    Gx = float_cumulative(C)
    pf = float(p)
    return (Gx(pf + w) - Gx(pf - w)) / (2 * w)


def grid_delta_star(C: Configuration, n: int = 40_000):
    """(grid estimate of delta_star, resolution bound).

    The estimate never undercuts the exact value (beyond rounding) and
    exceeds it by at most the bound, provided every extremal radius lies in
    the grid span, here from 1e-6 b_r to 4 b_r.
    """
    br = float(C.b_r)
    w, res = log_grid(1e-6 * br, 4 * br, n)
    Gx = float_cumulative(C)
    best = 1.0
    for p in C.endpoint_values:
        pf = float(p)
        d = (Gx(pf + w) - Gx(pf - w)) / (2 * w)
        best = min(best, max(float(d.max()), 1.0 - float(d.min())))
    return 1.0 - best, res


def random_configuration(rng: random.Random, r_max: int = 6, den_max: int = 64) -> Configuration:
    """r <= r_max intervals with endpoints of denominator <= den_max."""
    r = rng.randint(1, r_max)
    pts: set[Fraction] = set()
    while len(pts) < 2 * r:
        q = rng.randint(1, den_max)
        pts.add(Fraction(rng.randint(1, 4 * q), q))
    v = sorted(pts)
    return make_configuration([(v[k], v[k + 1]) for k in range(0, 2 * r, 2)])


@st.composite
def configurations(draw, r_max=6):
    """Hypothesis strategy: r <= r_max intervals on a common denominator <= 64."""
    r = draw(st.integers(1, r_max))
    nums = draw(st.lists(st.integers(1, 400), min_size=2 * r, max_size=2 * r, unique=True))
    den = draw(st.integers(1, 64))
    v = sorted(Fraction(n, den) for n in nums)
    return make_configuration([(v[k], v[k + 1]) for k in range(0, 2 * r, 2)])
