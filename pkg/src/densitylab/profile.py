"""Exact analysis of the density profile w -> lambda(C | I_w(p)) at endpoints.

Between consecutive breakpoints |p - e| (e ranging over the endpoints) the
mass of C in I_w(p) is linear in w, so the density has the form
s/2 + A/(2w) with s in {0, 1, 2}. It is monotone on each piece, so all
extrema live at breakpoints or in the two limits (w -> 0+ and w -> inf),
where the density is 1/2.

Breakpoint rows are computed in scaled integers. Floats only pre-screen
candidates; every reported value is decided in exact arithmetic.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from . import _kernels
from .core import Configuration, ConfigurationError, Endpoint, as_rational

HALF = Fraction(1, 2)
_BLOCK = 256
_REL_TOL = 1e-12


@dataclass(frozen=True)
class ProfilePiece:
    """On [omega_lo, omega_hi] the density is slope_count/2 + offset/(2 w).

    ``omega_hi`` is None for the terminal piece, which extends to infinity.
    """

    omega_lo: Fraction
    omega_hi: Fraction | None
    slope_count: int
    offset: Fraction

    def density(self, omega) -> Fraction:
        omega = as_rational(omega)
        return Fraction(self.slope_count, 2) + self.offset / (2 * omega)


@dataclass(frozen=True)
class DensityProfile:
    endpoint: Endpoint
    pieces: tuple[ProfilePiece, ...]

    @property
    def breakpoints(self) -> list[Fraction]:
        return [pc.omega_lo for pc in self.pieces[1:]]

    @property
    def terminal(self) -> ProfilePiece:
        return self.pieces[-1]

    def density(self, omega) -> Fraction:
        omega = as_rational(omega)
        if omega <= 0:
            raise ConfigurationError("radius must be positive")
        for pc in self.pieces:
            if pc.omega_hi is None or omega <= pc.omega_hi:
                return pc.density(omega)
        raise AssertionError("unreachable")

    def samples(self, per_piece: int = 0) -> Iterator[tuple[Fraction, Fraction]]:
        """(omega, density) at every breakpoint plus interior samples."""
        for pc in self.pieces:
            if pc.omega_hi is None:
                lo = pc.omega_lo
                yield lo, pc.density(lo)
                for k in range(1, per_piece + 1):
                    w = lo * (1 + k)
                    yield w, pc.density(w)
                continue
            if pc.omega_lo > 0:
                yield pc.omega_lo, pc.density(pc.omega_lo)
            for k in range(1, per_piece + 1):
                w = pc.omega_lo + (pc.omega_hi - pc.omega_lo) * Fraction(k, per_piece + 1)
                yield w, pc.density(w)

    def to_csv(self, per_piece: int = 0) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["omega", "density"])
        for w, d in self.samples(per_piece):
            writer.writerow([str(w), str(d)])
        return buf.getvalue()


@dataclass(frozen=True)
class EndpointStats:
    """Extremal densities at an endpoint.

    A radius of None means the extremum is the limit value 1/2 and no
    breakpoint does strictly better.
    """

    endpoint: Endpoint
    sup_density: Fraction
    inf_density: Fraction
    sup_radius: Fraction | None
    inf_radius: Fraction | None

    @property
    def escape(self) -> Fraction:
        return max(self.sup_density, 1 - self.inf_density)

    def to_json_dict(self) -> dict:
        def opt(x):
            return None if x is None else str(x)

        return {
            "endpoint": str(self.endpoint.value),
            "kind": self.endpoint.kind,
            "sup_density": str(self.sup_density),
            "inf_density": str(self.inf_density),
            "sup_radius": opt(self.sup_radius),
            "inf_radius": opt(self.inf_radius),
            "escape": str(self.escape),
            "escape_dec": float(self.escape),
        }


# ------------------------------------------------------------- row engine


def _rows(C: Configuration, i0: int, i1: int):
    """Exact scaled (mass, omega) arrays for endpoint rows i0..i1-1."""
    sc = C.scaled
    if sc.e64 is not None:
        return _kernels.int_rows(sc.e64, sc.G64, i0, i1)
    m = len(sc.e)
    mass = np.zeros((i1 - i0, m), dtype=object)
    omega = np.zeros((i1 - i0, m), dtype=object)
    for i in range(i0, i1):
        ei = sc.e[i]
        for j in range(m):
            if j != i:
                mass[i - i0, j] = abs(sc.G[j] - sc.G_at(2 * ei - sc.e[j]))
                omega[i - i0, j] = abs(sc.e[j] - ei)
    return mass, omega


def _float_density(mass: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Float screen of mass / (2 omega); radius-0 cells become 1/2."""
    if mass.dtype != object:
        with np.errstate(divide="ignore", invalid="ignore"):
            d = mass / (2.0 * omega)
        return np.where(omega == 0, 0.5, d)
    flat = [
        0.5 if w == 0 else float(Fraction(int(mv), 2 * int(w)))
        for mv, w in zip(mass.ravel(), omega.ravel())
    ]
    return np.array(flat, dtype=float).reshape(mass.shape)


def _pick(mass_row, omega_row, cand, want_max: bool):
    best = None
    for j in cand:
        w = int(omega_row[j])
        if w == 0:
            continue
        d = Fraction(int(mass_row[j]), 2 * w)
        if best is None or (d > best[0] if want_max else d < best[0]) or (
            d == best[0] and w < best[1]
        ):
            best = (d, w)
    return best


def _row_stats(C: Configuration, i: int, mass_row, omega_row, dens_row) -> EndpointStats:
    denom = C.scaled.denom
    fmax = dens_row.max()
    fmin = dens_row.min()
    cand_hi = np.nonzero(dens_row >= fmax * (1 - _REL_TOL))[0]
    cand_lo = np.nonzero(dens_row <= fmin * (1 + _REL_TOL) + 1e-300)[0]
    hi = _pick(mass_row, omega_row, cand_hi, True)
    lo = _pick(mass_row, omega_row, cand_lo, False)
    if hi is not None and hi[0] > HALF:
        sup, sup_r = hi[0], Fraction(hi[1], denom)
    else:
        sup, sup_r = HALF, None
    if lo is not None and lo[0] < HALF:
        inf, inf_r = lo[0], Fraction(lo[1], denom)
    else:
        inf, inf_r = HALF, None
    return EndpointStats(C.endpoints[i], sup, inf, sup_r, inf_r)


def all_endpoint_stats(C: Configuration) -> list[EndpointStats]:
    """EndpointStats for every endpoint, in increasing endpoint order."""
    m = len(C.endpoint_values)
    out = []
    for i0 in range(0, m, _BLOCK):
        i1 = min(m, i0 + _BLOCK)
        mass, omega = _rows(C, i0, i1)
        dens = _float_density(mass, omega)
        for k in range(i1 - i0):
            out.append(_row_stats(C, i0 + k, mass[k], omega[k], dens[k]))
    return out


def _resolve(C: Configuration, p) -> Endpoint:
    if isinstance(p, Endpoint):
        if p.index >= len(C.endpoints) or C.endpoints[p.index] != p:
            raise ConfigurationError(f"{p!r} is not an endpoint of {C!r}")
        return p
    return C.endpoint(p)


# ------------------------------------------------------------- operations


def density_profile(C: Configuration, p) -> DensityProfile:
    ep = _resolve(C, p)
    denom = C.scaled.denom
    mass, omega = _rows(C, ep.index, ep.index + 1)
    pairs = sorted({(int(w), int(mv)) for w, mv in zip(omega[0], mass[0]) if int(w) > 0})
    pieces = []
    prev_w, prev_m = 0, 0
    for w, mv in pairs:
        s = (mv - prev_m) // (w - prev_w)
        if s * (w - prev_w) != mv - prev_m or s not in (0, 1, 2):
            raise AssertionError("mass is not piecewise linear with slope 0/1/2")
        pieces.append(
            ProfilePiece(
                Fraction(prev_w, denom), Fraction(w, denom), s, Fraction(prev_m - s * prev_w, denom)
            )
        )
        prev_w, prev_m = w, mv
    # beyond the farthest endpoint: ray on the left, empty on the right
    pieces.append(ProfilePiece(Fraction(prev_w, denom), None, 1, Fraction(prev_m - prev_w, denom)))
    return DensityProfile(ep, tuple(pieces))


def profile_extrema(C: Configuration, p) -> EndpointStats:
    ep = _resolve(C, p)
    mass, omega = _rows(C, ep.index, ep.index + 1)
    dens = _float_density(mass, omega)
    return _row_stats(C, ep.index, mass[0], omega[0], dens[0])


def escape(C: Configuration, p) -> Fraction:
    return profile_extrema(C, p).escape


def delta_star(C: Configuration) -> Fraction:
    """1 - min over endpoints of the escape score.

    C refutes K(delta) exactly when delta > delta_star(C).
    """
    return 1 - min(st.escape for st in all_endpoint_stats(C))


@dataclass(frozen=True)
class CounterexampleDecision:
    is_counterexample: bool
    delta: Fraction
    witnesses: dict = field(default_factory=dict)  # endpoint value -> radius or None

    def __bool__(self):
        return self.is_counterexample


def _check_delta(delta, *, allow_half: bool = True) -> Fraction:
    delta = as_rational(delta)
    if not (0 < delta < HALF or (allow_half and delta == HALF)):
        raise ValueError(f"delta must lie in (0, 1/2], got {delta}")
    return delta


def is_counterexample(C: Configuration, delta) -> CounterexampleDecision:
    """Does every endpoint have a radius with density outside [delta, 1-delta]?

    The witness is the smallest breakpoint radius that escapes.
    """
    delta = _check_delta(delta)
    denom = C.scaled.denom
    m = len(C.endpoint_values)
    lo_f, hi_f = float(delta), float(1 - delta)
    witnesses = {}
    for i0 in range(0, m, _BLOCK):
        i1 = min(m, i0 + _BLOCK)
        mass, omega = _rows(C, i0, i1)
        dens = _float_density(mass, omega)
        for k in range(i1 - i0):
            slack = 1e-9
            cand = np.nonzero((dens[k] < lo_f + slack) | (dens[k] > hi_f - slack))[0]
            cand = sorted(cand, key=lambda j: int(omega[k][j]))
            found = None
            for j in cand:
                w = int(omega[k][j])
                if w == 0:
                    continue
                d = Fraction(int(mass[k][j]), 2 * w)
                if d < delta or d > 1 - delta:
                    found = Fraction(w, denom)
                    break
            witnesses[C.endpoint_values[i0 + k]] = found
    ok = all(w is not None for w in witnesses.values())
    return CounterexampleDecision(ok, delta, witnesses)


@dataclass(frozen=True)
class ColoredEndpoint:
    """omega(p) = sup D_p with D_p = {w : density not in (delta, 1-delta)}.

    ``omega_black`` / ``omega_white`` are the sups of the two halves of D_p;
    ``two_sided`` flags endpoints where both halves are nonempty.
    """

    endpoint: Endpoint
    omega_p: Fraction
    color: str  # "black" or "white"
    density_at_omega: Fraction
    omega_black: Fraction | None
    omega_white: Fraction | None

    @property
    def two_sided(self) -> bool:
        return self.omega_black is not None and self.omega_white is not None

    def to_json_dict(self) -> dict:
        def opt(x):
            return None if x is None else str(x)

        return {
            "endpoint": str(self.endpoint.value),
            "omega": str(self.omega_p),
            "omega_dec": float(self.omega_p),
            "color": self.color,
            "density_at_omega": str(self.density_at_omega),
            "omega_black": opt(self.omega_black),
            "omega_white": opt(self.omega_white),
            "two_sided": self.two_sided,
        }


def _sup_level_set(profile: DensityProfile, t: Fraction, above: bool) -> Fraction | None:
    """sup{w > 0 : density(w) >= t} (above) or <= t (not above)."""

    def ok(d):
        return d >= t if above else d <= t

    # Float screen: a piece whose end values are both off the level set by
    # more than the rounding margin cannot pass the exact test below.
    pcs = profile.pieces
    s_f = np.array([pc.slope_count / 2 for pc in pcs])
    a_f = np.array([float(pc.offset) for pc in pcs])
    lo_f = np.array([float(pc.omega_lo) for pc in pcs])
    hi_f = np.array([np.inf if pc.omega_hi is None else float(pc.omega_hi) for pc in pcs])
    with np.errstate(divide="ignore", invalid="ignore"):
        d_lo = np.where(lo_f > 0, s_f + a_f / (2 * lo_f), s_f)
        d_hi = np.where(np.isfinite(hi_f), s_f + a_f / (2 * hi_f), np.nan)
    t_f, margin = float(t), 1e-9
    if above:
        near = (d_lo >= t_f - margin) | (d_hi >= t_f - margin)
    else:
        near = (d_lo <= t_f + margin) | (d_hi <= t_f + margin)

    for i in np.flatnonzero(near)[::-1]:
        pc = pcs[i]
        s, A = pc.slope_count, pc.offset
        if pc.omega_hi is not None and ok(pc.density(pc.omega_hi)):
            return pc.omega_hi
        lo_val = pc.density(pc.omega_lo) if pc.omega_lo > 0 else Fraction(s, 2)
        if ok(lo_val):
            if A == 0:
                return pc.omega_hi  # constant piece; unreachable for delta < 1/2
            # monotone piece leaves the level set inside: solve s/2 + A/(2w) = t
            return A / (2 * t - s)
    return None


def omega_and_color(C: Configuration, p, delta) -> ColoredEndpoint | None:
    """None when D_p is empty (the endpoint is not colored)."""
    delta = _check_delta(delta, allow_half=False)
    prof = density_profile(C, p)
    wb = _sup_level_set(prof, 1 - delta, True)
    ww = _sup_level_set(prof, delta, False)
    if wb is None and ww is None:
        return None
    w = max(x for x in (wb, ww) if x is not None)
    d = prof.density(w)
    if d >= 1 - delta:
        color = "black"
    elif d <= delta:
        color = "white"
    else:  # pragma: no cover - closedness of D_p
        raise AssertionError("density at omega(p) inside (delta, 1-delta)")
    return ColoredEndpoint(prof.endpoint, w, color, d, wb, ww)


def mu(C: Configuration, p, color: str) -> Fraction:
    """Smallest radius of maximal (black) or minimal (white) density."""
    st = profile_extrema(C, p)
    if color == "black":
        r = st.sup_radius
    elif color == "white":
        r = st.inf_radius
    else:
        raise ValueError(f"color must be 'black' or 'white', got {color!r}")
    if r is None:
        raise ValueError(f"{color} extremum at {st.endpoint.value} is the unattained limit 1/2")
    return r


def quarter_point(C: Configuration) -> Endpoint:
    """Minimizer over endpoints of f(x) = lambda(C ∩ (x, inf)) + x/2.

    f is piecewise linear (slope -1/2 on C, +1/2 off C), so its global
    minimum sits at an endpoint; ties go to the smallest endpoint.
    """
    total = C.total
    best, best_f = None, None
    for ep, g in zip(C.endpoints, C._cumulative):
        f = total - g + ep.value / 2
        if best_f is None or f < best_f:
            best, best_f = ep, f
    return best
