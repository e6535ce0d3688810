"""Hot inner loops of the breakpoint scan.

Every kernel has a numba implementation and a pure-numpy one with the same
signature. The numba path is used when numba imports and the environment
variable ``DF_DISABLE_NUMBA`` is unset (or ``0``).

Conventions: ``e`` holds the sorted endpoints 0 = e[0] < a_1 < b_1 < ... and
``G[k]`` the measure of C ∩ (0, e[k]). For endpoint i and any other endpoint
j the radius ``|e[j] - e[i]|`` is a breakpoint of the density profile, and
the mass of C in I_w(e[i]) there is ``|G[j] - G(2 e[i] - e[j])|``.
"""
from __future__ import annotations

import os

import numpy as np


def _noop_jit(*args, **kwargs):
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


try:
    import numba

    HAVE_NUMBA = True
    njit = numba.njit
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False
    njit = _noop_jit

USE_NUMBA = HAVE_NUMBA and os.environ.get("DF_DISABLE_NUMBA", "0").lower() in (
    "",
    "0",
    "false",
    "no",
)


# ---------------------------------------------------------------- numpy


def _cum_numpy(e, G, x):
    """G extended to arbitrary x: slope 1 on the ray and on intervals."""
    m = e.shape[0]
    k = np.searchsorted(e, x, side="right") - 1
    kc = np.clip(k, 0, m - 1)
    inside = (kc % 2 == 1) & (kc < m - 1)
    val = G[kc] + np.where(inside, x - e[kc], 0)
    return np.where(x <= 0, x, val)


def float_extrema_numpy(e: np.ndarray, G: np.ndarray):
    """Per-endpoint (sup, inf) of the density over all breakpoint radii.

    The constant 1/2 of the first piece and of the limit at infinity is
    folded in, so sup >= 1/2 >= inf.
    """
    x = 2.0 * e[:, None] - e[None, :]
    mass = np.abs(G[None, :] - _cum_numpy(e, G, x))
    omega = np.abs(e[None, :] - e[:, None])
    np.fill_diagonal(omega, 1.0)
    dens = mass / (2.0 * omega)
    np.fill_diagonal(dens, 0.5)
    return np.maximum(dens.max(axis=1), 0.5), np.minimum(dens.min(axis=1), 0.5)


def int_rows_numpy(e: np.ndarray, G: np.ndarray, i0: int, i1: int):
    """Exact scaled (mass, radius) at every breakpoint for rows i0..i1-1.

    Row i, column j: radius |e[j] - e[i]|; the diagonal is (0, 0).
    """
    x = 2 * e[i0:i1, None] - e[None, :]
    mass = np.abs(G[None, :] - _cum_numpy(e, G, x))
    omega = np.abs(e[None, :] - e[i0:i1, None])
    return mass, omega


# ---------------------------------------------------------------- numba


@njit(cache=True)
def _cum_scalar(e, G, x):
    if x <= 0:
        return x
    m = e.shape[0]
    k = np.searchsorted(e, x, side="right") - 1
    if k >= m - 1:
        return G[m - 1]
    if k % 2 == 1:
        return G[k] + (x - e[k])
    return G[k]


@njit(cache=True)
def float_extrema_numba(e, G):
    m = e.shape[0]
    sup = np.empty(m)
    inf = np.empty(m)
    for i in range(m):
        hi = 0.5
        lo = 0.5
        for j in range(m):
            if j == i:
                continue
            mass = abs(G[j] - _cum_scalar(e, G, 2.0 * e[i] - e[j]))
            d = mass / (2.0 * abs(e[j] - e[i]))
            if d > hi:
                hi = d
            if d < lo:
                lo = d
        sup[i] = hi
        inf[i] = lo
    return sup, inf


@njit(cache=True)
def int_rows_numba(e, G, i0, i1):
    m = e.shape[0]
    mass = np.zeros((i1 - i0, m), dtype=np.int64)
    omega = np.zeros((i1 - i0, m), dtype=np.int64)
    for i in range(i0, i1):
        for j in range(m):
            if j == i:
                continue
            mass[i - i0, j] = abs(G[j] - _cum_scalar(e, G, 2 * e[i] - e[j]))
            omega[i - i0, j] = abs(e[j] - e[i])
    return mass, omega


if USE_NUMBA:
    float_extrema = float_extrema_numba
    int_rows = int_rows_numba
else:
    float_extrema = float_extrema_numpy
    int_rows = int_rows_numpy


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
