"""Exact rational model of configurations: the ray (-inf, 0) plus finitely
many disjoint open intervals with positive rational endpoints.

All values are :class:`fractions.Fraction`. Measures include the ray's
contribution, which is implicit and never stored.
"""
from __future__ import annotations

import json
import math
import sys
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

Rational = Fraction

# Scaled integer endpoints must stay below this for the int64 kernels;
# measures and radii are bounded by a few multiples of the largest endpoint.
_INT64_SAFE = 1 << 60


class ConfigurationError(ValueError):
    """Raised for invalid interval data."""


def as_rational(x) -> Fraction:
    """Parse ``x`` exactly: ``"p/q"``, decimal strings, ints, Fractions.

    Floats are converted exactly (binary expansion), never rounded.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ConfigurationError(f"not a rational: {x!r}")
    if isinstance(x, (int, float)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigurationError(f"invalid rational literal {x!r}") from exc
    raise ConfigurationError(f"not a rational: {x!r}")


def fmt_rational(x: Fraction) -> str:
    return str(Fraction(x))


@dataclass(frozen=True, order=True)
class Interval:
    """Open interval (lo, hi)."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", as_rational(self.lo))
        object.__setattr__(self, "hi", as_rational(self.hi))
        if not self.lo < self.hi:
            raise ConfigurationError(f"empty interval ({self.lo}, {self.hi})")

    @classmethod
    def around(cls, center, radius) -> "Interval":
        center, radius = as_rational(center), as_rational(radius)
        return cls(center - radius, center + radius)

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo < other.hi and other.lo < self.hi

    def __repr__(self):
        return f"({self.lo}, {self.hi})"


def _overlap(lo1, hi1, lo2, hi2) -> Fraction:
    lo, hi = max(lo1, lo2), min(hi1, hi2)
    return hi - lo if hi > lo else Fraction(0)


class IntervalSet:
    """Finite union of disjoint open intervals, sorted, no ray.

    ``merge_touching`` decides whether (a, b) and (b, c) become (a, c).
    Measure computations do not care; point-membership checks do.
    """

    __slots__ = ("intervals", "_his")

    def __init__(self, intervals: Iterable = (), *, merge_touching: bool = True):
        items = sorted(
            (iv if isinstance(iv, Interval) else Interval(*iv) for iv in intervals),
        )
        merged: list[Interval] = []
        for iv in items:
            if merged:
                last = merged[-1]
                if iv.lo < last.hi or (merge_touching and iv.lo == last.hi):
                    if iv.hi > last.hi:
                        merged[-1] = Interval(last.lo, iv.hi)
                    continue
            merged.append(iv)
        self.intervals: tuple[Interval, ...] = tuple(merged)
        self._his = [iv.hi for iv in merged]  # sorted, since intervals are disjoint

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def __eq__(self, other):
        return isinstance(other, IntervalSet) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __repr__(self):
        return "IntervalSet(" + ", ".join(map(repr, self.intervals)) + ")"

    @property
    def total(self) -> Fraction:
        return sum((iv.length for iv in self.intervals), Fraction(0))

    def measure_in(self, iv: Interval) -> Fraction:
        total = Fraction(0)
        for k in range(bisect_right(self._his, iv.lo), len(self.intervals)):
            j = self.intervals[k]
            if j.lo >= iv.hi:
                break
            total += _overlap(j.lo, j.hi, iv.lo, iv.hi)
        return total

    def rel_measure(self, iv: Interval) -> Fraction:
        return self.measure_in(iv) / iv.length

    def covers(self, iv: Interval) -> bool:
        """Point-wise containment of the open interval ``iv``."""
        return any(j.contains(iv) for j in self.intervals)

    def union(self, other: "IntervalSet", *, merge_touching: bool = False) -> "IntervalSet":
        return IntervalSet(
            self.intervals + other.intervals, merge_touching=merge_touching
        )

    def difference_measure(self, other: "IntervalSet", iv: Interval) -> Fraction:
        """lambda((self \\ other) ∩ iv), assuming other ⊂ self."""
        return self.measure_in(iv) - other.measure_in(iv)

    def is_subset_of(self, other: "IntervalSet") -> bool:
        return all(other.covers(j) for j in self.intervals)


@dataclass(frozen=True)
class Endpoint:
    value: Fraction
    kind: str  # "zero", "left" or "right"
    index: int  # position in the sorted endpoint list (0 is the origin)

    def __repr__(self):
        return f"Endpoint({self.value}, {self.kind})"


@dataclass(frozen=True)
class ScaledConfiguration:
    """Endpoints over a common denominator: value = e[k] / denom."""

    denom: int
    e: tuple[int, ...]
    G: tuple[int, ...]  # cumulative interval measure on (0, e[k]), scaled
    e64: np.ndarray | None
    G64: np.ndarray | None

    def G_at(self, x: int) -> int:
        """Scaled lambda(C ∩ (-inf, x)) minus the (infinite) ray mass below 0."""
        if x <= 0:
            return x
        k = bisect_right(self.e, x) - 1
        if k >= len(self.e) - 1:
            return self.G[-1]
        if k % 2:
            return self.G[k] + (x - self.e[k])
        return self.G[k]


class Configuration:
    """(-inf, 0) ∪ (a_1, b_1) ∪ ... ∪ (a_r, b_r) with 0 < a_1 < ... < b_r."""

    def __init__(self, intervals: Sequence[Interval]):
        self.intervals: tuple[Interval, ...] = tuple(intervals)

    # construction -----------------------------------------------------
    @classmethod
    def from_pairs(cls, pairs) -> "Configuration":
        return make_configuration(pairs)

    def __eq__(self, other):
        return isinstance(other, Configuration) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __repr__(self):
        return "Configuration(" + ", ".join(map(repr, self.intervals)) + ")"

    def __len__(self):
        return len(self.intervals)

    @property
    def r(self) -> int:
        return len(self.intervals)

    @property
    def b_r(self) -> Fraction:
        return self.intervals[-1].hi

    @cached_property
    def endpoint_values(self) -> tuple[Fraction, ...]:
        vals = [Fraction(0)]
        for iv in self.intervals:
            vals.extend((iv.lo, iv.hi))
        return tuple(vals)

    @cached_property
    def endpoints(self) -> tuple[Endpoint, ...]:
        out = [Endpoint(Fraction(0), "zero", 0)]
        for i, iv in enumerate(self.intervals):
            out.append(Endpoint(iv.lo, "left", 2 * i + 1))
            out.append(Endpoint(iv.hi, "right", 2 * i + 2))
        return tuple(out)

    def endpoint(self, value) -> Endpoint:
        value = as_rational(value)
        k = bisect_right(self.endpoint_values, value) - 1
        if k < 0 or self.endpoint_values[k] != value:
            raise ConfigurationError(f"{value} is not an endpoint of {self!r}")
        return self.endpoints[k]

    @cached_property
    def _cumulative(self) -> tuple[Fraction, ...]:
        acc, out = Fraction(0), [Fraction(0)]
        for iv in self.intervals:
            out.append(acc)
            acc += iv.length
            out.append(acc)
        return tuple(out)

    @property
    def interval_set(self) -> IntervalSet:
        return IntervalSet(self.intervals)

    @property
    def total(self) -> Fraction:
        """lambda(C ∩ (0, inf))."""
        return self._cumulative[-1]

    @cached_property
    def scaled(self) -> ScaledConfiguration:
        denom = 1
        for v in self.endpoint_values:
            denom = math.lcm(denom, v.denominator)
        e = tuple(v.numerator * (denom // v.denominator) for v in self.endpoint_values)
        G = [0]
        for k in range(1, len(e)):
            G.append(G[-1] + (e[k] - e[k - 1] if k % 2 == 0 else 0))
        fits = 4 * e[-1] < _INT64_SAFE
        return ScaledConfiguration(
            denom,
            e,
            tuple(G),
            np.array(e, dtype=np.int64) if fits else None,
            np.array(G, dtype=np.int64) if fits else None,
        )

    # measures ---------------------------------------------------------
    def _G(self, x: Fraction) -> Fraction:
        if x <= 0:
            return x
        ev = self.endpoint_values
        k = bisect_right(ev, x) - 1
        if k >= len(ev) - 1:
            return self._cumulative[-1]
        if k % 2:
            return self._cumulative[k] + (x - ev[k])
        return self._cumulative[k]

    def measure_in(self, iv: Interval) -> Fraction:
        return self._G(iv.hi) - self._G(iv.lo)

    def rel_measure(self, iv: Interval) -> Fraction:
        return self.measure_in(iv) / iv.length

    def density(self, p, omega) -> Fraction:
        """lambda(C | I_omega(p))."""
        p, omega = as_rational(p), as_rational(omega)
        if omega <= 0:
            raise ConfigurationError("radius must be positive")
        return (self._G(p + omega) - self._G(p - omega)) / (2 * omega)

    def contains_point(self, x) -> bool:
        x = as_rational(x)
        if x < 0:
            return True
        return any(iv.lo < x < iv.hi for iv in self.intervals)

    # serialization ----------------------------------------------------
    def to_json_dict(self) -> dict:
        return {
            "intervals": [[fmt_rational(iv.lo), fmt_rational(iv.hi)] for iv in self.intervals]
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Configuration":
        if not isinstance(data, dict) or "intervals" not in data:
            raise ConfigurationError('configuration JSON needs an "intervals" list')
        pairs = data["intervals"]
        if not isinstance(pairs, list) or not all(
            isinstance(p, (list, tuple)) and len(p) == 2 for p in pairs
        ):
            raise ConfigurationError("intervals must be a list of [lo, hi] pairs")
        return make_configuration(pairs)

    def to_float_endpoints(self) -> np.ndarray:
        return np.array([float(v) for v in self.endpoint_values])


def make_configuration(raw_intervals) -> Configuration:
    """Validate, sort and canonicalize raw (lo, hi) pairs.

    Touching intervals are merged; strict overlaps and non-positive
    endpoints are rejected.
    """
    ivs = sorted(
        iv if isinstance(iv, Interval) else Interval(*iv) for iv in raw_intervals
    )
    if not ivs:
        raise ConfigurationError("a configuration needs at least one interval")
    if ivs[0].lo <= 0:
        raise ConfigurationError(f"endpoints must be positive, got {ivs[0].lo}")
    merged = [ivs[0]]
    for iv in ivs[1:]:
        last = merged[-1]
        if iv.lo < last.hi:
            raise ConfigurationError(f"overlapping intervals {last!r} and {iv!r}")
        if iv.lo == last.hi:
            merged[-1] = Interval(last.lo, iv.hi)
        else:
            merged.append(iv)
    return Configuration(merged)


def affine_image(C: Configuration, scale) -> Configuration:
    scale = as_rational(scale)
    if scale <= 0:
        raise ConfigurationError("scale must be positive")
    return Configuration([Interval(iv.lo * scale, iv.hi * scale) for iv in C.intervals])


def normalize(C: Configuration) -> Configuration:
    """Rescale so that b_r = 1."""
    return affine_image(C, 1 / C.b_r)


def truncate_at(C: Configuration, x) -> Configuration:
    """C \\ (x, inf)."""
    x = as_rational(x)
    out = []
    for iv in C.intervals:
        if iv.lo >= x:
            break
        out.append(Interval(iv.lo, min(iv.hi, x)))
    if not out:
        raise ConfigurationError(f"truncation at {x} leaves no interval")
    return Configuration(out)


def reflect_truncate(C: Configuration, lo, hi, *, reflected: bool = False) -> Configuration:
    """Cut C to (lo, hi) and re-anchor the ray.

    Forward: ((-inf, lo) ∪ (C ∩ (lo, hi))) - lo.
    Reflected: hi - ((hi, inf) ∪ (C ∩ (lo, hi))).
    Results whose first interval touches the ray are degenerate and rejected.
    """
    lo, hi = as_rational(lo), as_rational(hi)
    if not lo < hi:
        raise ConfigurationError("need lo < hi")
    values = set(C.endpoint_values)
    if lo not in values or hi not in values:
        raise ConfigurationError("lo and hi must be endpoints of the configuration")
    window = Interval(lo, hi)
    pieces = [
        (max(iv.lo, lo), min(iv.hi, hi)) for iv in C.intervals if iv.intersects(window)
    ]
    if reflected:
        pieces = [(hi - b, hi - a) for a, b in pieces]
    else:
        pieces = [(a - lo, b - lo) for a, b in pieces]
    if not pieces:
        raise ConfigurationError("no interval of the configuration lies in the window")
    return make_configuration(pieces)


def mirror(C: Configuration) -> Configuration:
    """b_r - complement(C): swaps the roles of C and its complement.

    lambda(mirror(C) | I_w(b_r - p)) = 1 - lambda(C | I_w(p)).
    """
    br = C.b_r
    ev = C.endpoint_values
    gaps = [(ev[k], ev[k + 1]) for k in range(0, len(ev) - 1, 2)]
    return make_configuration([(br - b, br - a) for a, b in gaps])


# JSON file I/O ----------------------------------------------------------


def load_configuration(path: str) -> Configuration:
    """Read a configuration JSON file; ``-`` reads stdin."""
    try:
        if path == "-":
            data = json.load(sys.stdin)
        else:
            with open(path) as fh:
                data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"malformed JSON in {path}: {exc}") from exc
    return Configuration.from_json_dict(data)


def dumps_configuration(C: Configuration) -> str:
    return json.dumps(C.to_json_dict(), sort_keys=True)
