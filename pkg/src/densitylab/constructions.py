"""Explicit objects: the C(m, s, N) comb family, the cubic bound constants,
and finite-depth approximations of the self-similar set H(eps).
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from decimal import Context, Decimal
from fractions import Fraction
from typing import Callable

from .core import (
    Configuration,
    ConfigurationError,
    Interval,
    IntervalSet,
    as_rational,
    make_configuration,
    truncate_at,
)

# ------------------------------------------------------------------ roots

_DEFAULT_BITS = math.ceil(64 * math.log2(10))  # 64 decimal digits
_MIN_BITS = 50  # keeps every bracket below 1e-14


def precision_bits() -> int:
    raw = os.environ.get("DF_PRECISION_BITS")
    if not raw:
        return _DEFAULT_BITS
    try:
        bits = int(raw)
    except ValueError as exc:
        raise ValueError(f"DF_PRECISION_BITS must be an integer, got {raw!r}") from exc
    return max(_MIN_BITS, bits)


def _poly(coeffs: tuple[int, ...]) -> Callable[[Fraction], Fraction]:
    """Horner evaluation, coefficients from the highest degree down."""

    def f(x):
        acc = Fraction(0)
        for c in coeffs:
            acc = acc * x + c
        return acc

    return f


@dataclass(frozen=True)
class Root:
    """Root of an integer polynomial bracketed by exact rationals."""

    name: str
    coeffs: tuple[int, ...]
    lo: Fraction
    hi: Fraction

    @property
    def value(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def residual(self) -> float:
        return abs(float(_poly(self.coeffs)(self.value)))

    def __float__(self):
        return float(self.value)

    def digits(self, significant: int = 15) -> str:
        ctx = Context(prec=significant)
        v = self.value
        return str(ctx.divide(Decimal(v.numerator), Decimal(v.denominator)))


def bisect_root(name, coeffs, lo, hi, bits: int | None = None) -> Root:
    """Sign-change bisection in exact rationals until hi - lo < 2**-bits."""
    bits = precision_bits() if bits is None else bits
    f = _poly(tuple(coeffs))
    lo, hi = Fraction(lo), Fraction(hi)
    flo = f(lo)
    if flo == 0:
        return Root(name, tuple(coeffs), lo, lo)
    if (flo > 0) == (f(hi) > 0):
        raise ValueError(f"no sign change for {name} on [{lo}, {hi}]")
    width = Fraction(1, 1 << bits)
    while hi - lo >= width:
        mid = (lo + hi) / 2
        fm = f(mid)
        if fm == 0:
            return Root(name, tuple(coeffs), mid, mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return Root(name, tuple(coeffs), lo, hi)


@dataclass(frozen=True)
class BoundConstants:
    q_upper: Root  # q^3 + q^2 + q = 1
    delta_upper: Root  # q_upper / 2
    delta_lower: Root  # 4 d^3 + 2 d^2 + 3 d = 1
    kolyada_upper: Root  # (sqrt(17) - 3) / 4, i.e. 2 d^2 + 3 d = 1
    conjecture: Root  # 8 d^3 + 4 d^2 + 2 d = 1

    def as_dict(self) -> dict[str, Root]:
        return {
            "upper": self.delta_upper,
            "lower": self.delta_lower,
            "kolyada": self.kolyada_upper,
            "conjecture": self.conjecture,
            "q": self.q_upper,
        }


def solve_bound_constants(bits: int | None = None) -> BoundConstants:
    q = bisect_root("q_upper", (1, 1, 1, -1), 0, 1, bits)
    upper = Root("delta_upper", (8, 4, 2, -1), q.lo / 2, q.hi / 2)
    lower = bisect_root("delta_lower", (4, 2, 3, -1), 0, Fraction(1, 2), bits)
    kolyada = bisect_root("kolyada_upper", (2, 3, -1), 0, Fraction(1, 2), bits)
    conj = bisect_root("conjecture", (8, 4, 2, -1), 0, Fraction(1, 2), bits)
    consts = BoundConstants(q, upper, lower, kolyada, conj)
    for r in (q, upper, lower, kolyada, conj):
        assert r.residual < 1e-12, (r.name, r.residual)
    assert lower.value < upper.value < kolyada.value
    return consts


def optimal_params(max_denominator: int | None = None) -> tuple[Fraction, Fraction]:
    """(m, s) equalizing 1/m - s = s m = 1/s - 1 (all equal to q).

    With q the real root of q^3 + q^2 + q = 1: s = 1/(1+q), m = q (1+q).
    """
    q = bisect_root("q", (1, 1, 1, -1), 0, 1).value
    s = 1 / (1 + q)
    m = q * (1 + q)
    for val in (1 / m - s, s * m, 1 / s - 1):
        assert abs(float(val - q)) < 1e-12
    if max_denominator is not None:
        m = m.limit_denominator(max_denominator)
        s = s.limit_denominator(max_denominator)
    return m, s


# ---------------------------------------------------------------- C(m,s,N)

OPTIMAL_DENOMINATOR = 10**6


@dataclass(frozen=True)
class CmsnParams:
    m: Fraction
    s: Fraction
    N: int

    def __post_init__(self):
        object.__setattr__(self, "m", as_rational(self.m))
        object.__setattr__(self, "s", as_rational(self.s))
        if not 0 < self.m < 1:
            raise ValueError(f"m must lie in (0, 1), got {self.m}")
        if not 0 < self.s < 1:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")
        if not isinstance(self.N, int) or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")

    @classmethod
    def optimal(cls, N: int, max_denominator: int = OPTIMAL_DENOMINATOR) -> "CmsnParams":
        m, s = optimal_params(max_denominator)
        return cls(m, s, N)


def build_cmsn(params: CmsnParams) -> Configuration:
    """Teeth (1-m + k m/N, 1-m + (k+s) m/N) for k = 0..N-1."""
    m, s, N = params.m, params.s, params.N
    step = m / N
    base = 1 - m
    return make_configuration(
        [(base + k * step, base + (k + s) * step) for k in range(N)]
    )


def in_cmsn(params: CmsnParams, x) -> bool:
    """The fractional-part predicate 0 < {N(x+m-1)/m} < s on (1-m, 1)."""
    x = as_rational(x)
    m, s, N = params.m, params.s, params.N
    if not 1 - m < x < 1:
        return x < 0
    y = N * (x + m - 1) / m
    frac = y - math.floor(y)
    return 0 < frac < s


@dataclass(frozen=True)
class CmsnTableRow:
    label: str  # "origin", "left", "last" or "other"
    endpoint: Fraction
    radius: Fraction
    twice_density: Fraction  # exact, at this N
    closed_form: Fraction  # the N -> inf table entry

    @property
    def difference(self) -> Fraction:
        return abs(self.twice_density - self.closed_form)

    def to_json_dict(self) -> dict:
        return {
            "label": self.label,
            "endpoint": str(self.endpoint),
            "radius": str(self.radius),
            "twice_density": str(self.twice_density),
            "closed_form": str(self.closed_form),
            "difference": str(self.difference),
            "difference_dec": float(self.difference),
        }


def cmsn_table(params: CmsnParams) -> list[CmsnTableRow]:
    C = build_cmsn(params)
    m, s, N = params.m, params.s, params.N
    sm = s * m
    ev = C.endpoint_values
    last = ev[-1]

    def row(label, v, r, closed):
        return CmsnTableRow(label, v, r, 2 * C.density(v, r), closed)

    rows = [
        row("origin", Fraction(0), Fraction(1), sm + 1),
        row("left", 1 - m, m, 2 - (1 / m - s)),
        row("last", last, Fraction(1), sm),
    ]
    other = 2 - (1 / s - 1)
    for v in ev[2:-1]:
        rows.append(row("other", v, sm / N, other))
    return rows


# ------------------------------------------------------------------ H(eps)


@dataclass(frozen=True)
class HApprox:
    base: Configuration
    ctilde: IntervalSet  # C ∩ (0, 1)
    epsilon: Fraction
    depth: int
    levels: tuple[IntervalSet, ...]  # levels[k] is H_{k+1}

    def level(self, n: int) -> IntervalSet:
        return self.levels[n - 1]

    @property
    def r_tilde(self) -> int:
        return len(self.ctilde)

    def endpoint_count(self, include_zero: bool = True) -> int:
        return 2 * self.r_tilde + (1 if include_zero else 0)


def _attach(level: IntervalSet, ctilde: IntervalSet, scale: Fraction) -> IntervalSet:
    pieces = list(level.intervals)
    for iv in level.intervals:
        for c in ctilde.intervals:
            pieces.append(Interval(iv.lo - scale * c.hi, iv.lo - scale * c.lo))
            pieces.append(Interval(iv.hi + scale * c.lo, iv.hi + scale * c.hi))
    pieces.sort()
    for prev, cur in zip(pieces, pieces[1:]):
        if cur.lo < prev.hi:
            raise ConfigurationError(
                f"attached copies overlap at scale {scale}: {prev!r} and {cur!r}; "
                "choose a smaller epsilon"
            )
    return IntervalSet(pieces)


def build_h_approx(C: Configuration, epsilon, depth: int) -> HApprox:
    """H_1 = C ∩ (0,1); H_{n+1} attaches eps^n-scaled copies of H_1 to the
    left of every a_j(n) (reflected) and the right of every b_j(n)."""
    epsilon = as_rational(epsilon)
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    ct = IntervalSet(truncate_at(C, 1).intervals)
    levels = [ct]
    for n in range(1, depth):
        levels.append(_attach(levels[-1], ct, epsilon**n))
    return HApprox(C, ct, epsilon, depth, tuple(levels))


@dataclass(frozen=True)
class TailReport:
    n: int
    v: Fraction
    omega: Fraction
    radius: Fraction  # eps^(n-1) omega
    M: int
    tail_measured: Fraction  # lambda((H_depth \ H_n) ∩ I), exact
    tail_remainder_bound: Fraction  # bound on the unbuilt levels
    tail_bound: Fraction  # eps^(n-1) M eps / (1 - M eps)
    base_density: Fraction  # lambda(H_n | I_radius(v))
    density_slack: Fraction  # (eps / 2 omega)(1 + M / (1 - M eps))
    shifted: tuple  # (x, lambda(H_depth | I_radius(x))) for x = v, v +- eps^n

    @property
    def tail_ok(self) -> bool:
        return self.tail_measured + self.tail_remainder_bound < self.tail_bound

    @property
    def density_ok(self) -> bool:
        extra = self.tail_remainder_bound / (2 * self.radius)
        return all(
            self.base_density - self.density_slack < d
            and d + extra < self.base_density + self.density_slack
            for _, d in self.shifted
        )

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "v": str(self.v),
            "omega": str(self.omega),
            "M": self.M,
            "tail_measured": float(self.tail_measured),
            "tail_remainder_bound": float(self.tail_remainder_bound),
            "tail_bound": float(self.tail_bound),
            "tail_ok": self.tail_ok,
            "base_density": float(self.base_density),
            "density_slack": float(self.density_slack),
            "shifted": [[str(x), float(d)] for x, d in self.shifted],
            "density_ok": self.density_ok,
        }


def unbuilt_remainder(h: HApprox) -> Fraction:
    """Upper bound on lambda(H \\ H_depth), summing the geometric tail."""
    r = h.r_tilde
    ratio = (1 + 2 * r) * h.epsilon
    if ratio >= 1:
        raise ValueError("epsilon too large for a convergent tail")
    r_depth = r * (1 + 2 * r) ** (h.depth - 1)
    return 2 * r_depth * h.epsilon**h.depth * h.ctilde.total / (1 - ratio)


def h_tail_check(h: HApprox, n: int, v, omega, *, include_zero: bool = True) -> TailReport:
    """Measured tail of H beyond H_n around v against the geometric bound."""
    v, omega = as_rational(v), as_rational(omega)
    if not 1 <= n < h.depth:
        raise ValueError(f"need 1 <= n < depth={h.depth}")
    Hn = h.level(n)
    if not any(v in (iv.lo, iv.hi) for iv in Hn.intervals):
        raise ValueError(f"{v} is not an endpoint of H_{n}")
    eps = h.epsilon
    M = h.endpoint_count(include_zero)
    if M * eps >= 1:
        raise ValueError("M * epsilon must be below 1")
    R = eps ** (n - 1) * omega
    window = Interval.around(v, R)
    top = h.levels[-1]
    tail = top.measure_in(window) - Hn.measure_in(window)
    bound = eps ** (n - 1) * M * eps / (1 - M * eps)
    slack = eps / (2 * omega) * (1 + Fraction(M) / (1 - M * eps))
    shift = eps**n
    shifted = tuple(
        (x, top.rel_measure(Interval.around(x, R))) for x in (v - shift, v, v + shift)
    )
    return TailReport(
        n, v, omega, R, M, tail, unbuilt_remainder(h), bound, Hn.rel_measure(window), slack, shifted
    )


def level_masses(h: HApprox) -> list[Fraction]:
    """lambda(H_{k+1} \\ H_k) for k = 1..depth-1."""
    return [h.levels[k].total - h.levels[k - 1].total for k in range(1, h.depth)]
