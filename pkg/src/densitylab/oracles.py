"""Mechanical checkers for the lower-bound argument.

Checks are labelled ``ASSERTED`` when they hold for every counterexample
(a failure is a bug) and ``DIAGNOSTIC`` when they rely on the counterexample
being minimal, which an arbitrary configuration need not be. Diagnostic
outcomes are data.
"""
from __future__ import annotations

import concurrent.futures as cf
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import (
    Configuration,
    ConfigurationError,
    Interval,
    IntervalSet,
    as_rational,
    mirror,
    normalize,
    truncate_at,
)
from .profile import (
    HALF,
    ColoredEndpoint,
    delta_star,
    is_counterexample,
    omega_and_color,
    profile_extrema,
)

ASSERTED = "ASSERTED"
DIAGNOSTIC = "DIAGNOSTIC"


class HypothesisError(ValueError):
    """Input does not satisfy the hypothesis of the checked statement."""


class NotACounterexample(ValueError):
    pass


def theorem_polynomial(delta) -> Fraction:
    """4 d^3 + 2 d^2 + 3 d; the lower bound holds where this is below 1."""
    d = as_rational(delta)
    return 4 * d**3 + 2 * d**2 + 3 * d


def conjecture_polynomial(delta) -> Fraction:
    d = as_rational(delta)
    return 8 * d**3 + 4 * d**2 + 2 * d


def overlap_bound(delta) -> Fraction:
    d = as_rational(delta)
    return (1 - d) / (1 + d)


# ------------------------------------------------------------- cover systems


@dataclass(frozen=True)
class CoverSystem:
    """host = union of cover (as open sets); B a finite union of intervals."""

    host: Interval
    cover: tuple[Interval, ...]
    B: IntervalSet

    def __post_init__(self):
        union = IntervalSet(self.cover, merge_touching=False)
        if union.intervals != (self.host,):
            raise ValueError(f"cover does not union to {self.host!r}: {union!r}")

    def canonical(self) -> "CoverSystem":
        """Greedy minimal subcover, ordered by left endpoint.

        Each step takes, among intervals starting inside the covered part
        (at the host's left end for the first step), the one reaching
        furthest right. Were I_{j+2} to meet I_j it would have been eligible
        one step earlier with a larger right end, so I_j ∩ I_{j+2} = ∅.
        """
        items = sorted(set(self.cover))
        chosen: list[Interval] = []
        reach, k = self.host.lo, 0
        while reach < self.host.hi:
            best = None
            while k < len(items) and (items[k].lo < reach or (not chosen and items[k].lo == reach)):
                if best is None or items[k].hi > best.hi:
                    best = items[k]
                k += 1
            if best is None or best.hi <= reach:
                raise ValueError("cover has a gap")  # excluded by __post_init__
            chosen.append(best)
            reach = best.hi
        out = CoverSystem(self.host, tuple(chosen), self.B)
        for j in range(len(out.cover) - 1):
            assert out.cover[j].lo < out.cover[j + 1].lo
        for j in range(len(out.cover) - 2):
            assert not out.cover[j].intersects(out.cover[j + 2])
        return out


def _inter(a: Interval, b: Interval) -> Interval | None:
    lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
    return Interval(lo, hi) if lo < hi else None


@dataclass(frozen=True)
class Lemma1Report:
    delta: Fraction
    density: Fraction  # lambda(B | host)
    bound: Fraction  # (1 - delta) / (1 + delta)
    cover_densities: tuple[Fraction, ...]
    # normalized proof parameters of the canonical system
    x: Fraction
    y: Fraction
    xB: Fraction
    yB: Fraction
    steps: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.density >= self.bound

    def to_json_dict(self) -> dict:
        return {
            "delta": str(self.delta),
            "density": str(self.density),
            "bound": str(self.bound),
            "holds": self.holds,
            "steps": {k: bool(v) for k, v in self.steps.items()},
        }


def _check_hypothesis(sys: CoverSystem, delta: Fraction) -> tuple[Fraction, ...]:
    dens = tuple(sys.B.rel_measure(iv) for iv in sys.cover)
    bad = [(iv, d) for iv, d in zip(sys.cover, dens) if d < 1 - delta]
    if bad:
        raise HypothesisError(f"cover intervals below density 1-delta: {bad[:3]}")
    return dens


def lemma1_check(sys: CoverSystem, delta) -> Lemma1Report:
    """lambda(B | I) >= (1-delta)/(1+delta), with the proof's bookkeeping."""
    delta = as_rational(delta)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    dens = _check_hypothesis(sys, delta)
    can = sys.canonical()
    L = sys.host.length
    cov = can.cover
    n = len(cov)
    xs, xBs, ys, yBs = [], [], [], []
    for j in range(n):
        nxt = _inter(cov[j], cov[j + 1]) if j + 1 < n else None
        xs.append(nxt.length if nxt else Fraction(0))
        xBs.append(can.B.measure_in(nxt) if nxt else Fraction(0))
        # I_j minus its neighbours: a single interval by the canonical form
        lo = cov[j - 1].hi if j > 0 else cov[j].lo
        hi = cov[j + 1].lo if j + 1 < n else cov[j].hi
        if lo < hi:
            own = Interval(lo, hi)
            ys.append(own.length)
            yBs.append(can.B.measure_in(own))
        else:
            ys.append(Fraction(0))
            yBs.append(Fraction(0))
    steps = {}
    for j in range(n):
        left = (xBs[j - 1] if j else 0) + yBs[j] + xBs[j]
        total = (xs[j - 1] if j else 0) + ys[j] + xs[j]
        steps[f"local_{j}"] = left >= (1 - delta) * total and total == cov[j].length
    x, y = sum(xs, Fraction(0)) / L, sum(ys, Fraction(0)) / L
    xB, yB = sum(xBs, Fraction(0)) / L, sum(yBs, Fraction(0)) / L
    steps["partition"] = x + y == 1
    steps["summed"] = (2 * xB + yB) >= (1 - delta) * (2 * x + y)
    steps["xB_le_x"] = xB <= x
    steps["after_x_eq"] = (2 * xB + yB) >= (1 - delta) * (1 + xB)
    steps["linear"] = (1 + delta) * xB + yB >= 1 - delta
    steps["final"] = xB + yB >= overlap_bound(delta)
    density = sys.B.rel_measure(sys.host)
    steps["matches_density"] = xB + yB == density
    return Lemma1Report(delta, density, overlap_bound(delta), dens, x, y, xB, yB, steps)


@dataclass(frozen=True)
class Remark5Report:
    delta: Fraction
    density: Fraction
    target: Fraction  # 1 / (1 + 2 delta)

    @property
    def holds(self) -> bool:
        return self.density >= self.target

    def to_json_dict(self) -> dict:
        return {
            "delta": str(self.delta),
            "density": str(self.density),
            "target": str(self.target),
            "holds": self.holds,
        }


def remark5_experiment(sys: CoverSystem, delta) -> Remark5Report:
    """Would the sharper bound 1/(1+2 delta) hold for this system?"""
    delta = as_rational(delta)
    _check_hypothesis(sys, delta)
    return Remark5Report(delta, sys.B.rel_measure(sys.host), 1 / (1 + 2 * delta))


# ---------------------------------------------------------- random systems

_GRID = 10_000


def _rand_frac(rng, lo: Fraction, hi: Fraction) -> Fraction:
    """Uniform-ish rational strictly inside (lo, hi)."""
    t = Fraction(int(rng.integers(1, _GRID)), _GRID)
    return lo + (hi - lo) * t


def random_cover_system(rng: np.random.Generator, delta, margin=Fraction(1, 50)) -> CoverSystem:
    """Random cover of (0, 1) with B built to satisfy the hypothesis.

    Each cover interval ends with density in [1-delta, 1-delta+margin] when B
    has to be grown there; B is seeded inside pairwise overlaps, which is
    where the bound is tight.
    """
    delta = as_rational(delta)
    n = int(rng.integers(1, 7))
    cuts = sorted({_rand_frac(rng, Fraction(0), Fraction(1)) for _ in range(n - 1)})
    pts = [Fraction(0)] + cuts + [Fraction(1)]
    cover = []
    for j in range(len(pts) - 1):
        lo = pts[j] if j == 0 else pts[j] - (pts[j] - pts[j - 1]) * _rand_frac(rng, Fraction(0), Fraction(1))
        hi = pts[j + 1] if j == len(pts) - 2 else pts[j + 1] + (pts[j + 2] - pts[j + 1]) * _rand_frac(rng, Fraction(0), Fraction(1))
        cover.append(Interval(lo, hi))
    for _ in range(int(rng.integers(0, 3))):  # redundant extras
        base = cover[int(rng.integers(len(cover)))]
        a = _rand_frac(rng, base.lo, base.hi)
        cover.append(Interval(a, _rand_frac(rng, a, base.hi)))
    order = rng.permutation(len(cover))
    cover = [cover[k] for k in order]

    pieces = []
    mode = int(rng.integers(3))
    if mode >= 1:
        for a in cover:
            for b in cover:
                if a is not b and rng.random() < 0.5:
                    ov = _inter(a, b)
                    if ov is not None:
                        u = _rand_frac(rng, ov.lo, ov.hi)
                        pieces.append(Interval(ov.lo, u) if mode == 1 else ov)
    B = IntervalSet(pieces)
    for iv in cover:
        target = 1 - delta + margin * Fraction(int(rng.integers(0, 1001)), 1000)
        target = min(target, Fraction(1))
        deficit = target * iv.length - B.measure_in(iv)
        if deficit <= 0:
            continue
        gaps = _gaps_within(B, iv)
        gaps = [gaps[k] for k in rng.permutation(len(gaps))]
        add = []
        for g in gaps:
            if deficit <= 0:
                break
            take = min(deficit, g.length)
            # grow from whichever side of the gap is nearer an overlap
            if rng.random() < 0.5:
                add.append(Interval(g.lo, g.lo + take))
            else:
                add.append(Interval(g.hi - take, g.hi))
            deficit -= take
        B = IntervalSet(B.intervals + tuple(add))
    return CoverSystem(Interval(0, 1), tuple(cover), B)


def _gaps_within(B: IntervalSet, iv: Interval) -> list[Interval]:
    out, cur = [], iv.lo
    for j in B.intervals:
        if j.hi <= cur:
            continue
        if j.lo >= iv.hi:
            break
        if j.lo > cur:
            out.append(Interval(cur, j.lo))
        cur = max(cur, j.hi)
    if cur < iv.hi:
        out.append(Interval(cur, iv.hi))
    return out


def _lemma1_trial(args):
    child, delta = args
    rng = np.random.default_rng(child)
    sys = random_cover_system(rng, delta)
    rep = lemma1_check(sys, delta)
    return rep.holds and all(rep.steps.values()), rep.density - rep.bound


@dataclass(frozen=True)
class Lemma1Suite:
    delta: Fraction
    trials: int
    violations: int
    min_slack: Fraction

    def to_json_dict(self) -> dict:
        return {
            "delta": str(self.delta),
            "trials": self.trials,
            "violations": self.violations,
            "min_slack": float(self.min_slack),
        }


def lemma1_suite(trials: int, delta, seed: int, workers: int = 1) -> Lemma1Suite:
    """Randomized overlap-bound trials; trial k uses the k-th spawned seed."""
    delta = as_rational(delta)
    children = np.random.SeedSequence(seed).spawn(trials)
    jobs = [(c, delta) for c in children]
    if workers > 1:
        with cf.ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_lemma1_trial, jobs, chunksize=256))
    else:
        results = [_lemma1_trial(j) for j in jobs]
    bad = sum(1 for ok, _ in results if not ok)
    return Lemma1Suite(delta, trials, bad, min(s for _, s in results))


# ---------------------------------------------------------- proof machinery


@dataclass
class Check:
    name: str
    kind: str  # ASSERTED or DIAGNOSTIC
    passed: bool | None  # None: not applicable
    detail: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "passed": self.passed, "detail": self.detail}


def _s(x):
    return None if x is None else str(x)


@dataclass
class ProofInspection:
    delta: Fraction
    scale: Fraction  # the input was multiplied by this to get b_r = 1
    configuration: Configuration
    colored: list[ColoredEndpoint]
    rho: Fraction
    v_B: Fraction | None = None
    v_W: Fraction | None = None
    I_circ: Interval | None = None
    F: list[Fraction] = field(default_factory=list)
    mu_map: dict = field(default_factory=dict)
    phi_B: IntervalSet = field(default_factory=IntervalSet)
    phi_W: IntervalSet = field(default_factory=IntervalSet)
    checks: dict[str, Check] = field(default_factory=dict)
    partial_reason: str | None = None

    @property
    def partial(self) -> bool:
        return self.partial_reason is not None

    @property
    def asserted_ok(self) -> bool:
        return all(c.passed is not False for c in self.checks.values() if c.kind == ASSERTED)

    def add(self, name, kind, passed, **detail):
        self.checks[name] = Check(name, kind, passed, detail)

    def to_json_dict(self) -> dict:
        return {
            "delta": str(self.delta),
            "scale": str(self.scale),
            "rho": str(self.rho),
            "v_B": _s(self.v_B),
            "v_W": _s(self.v_W),
            "I_circ": None if self.I_circ is None else [str(self.I_circ.lo), str(self.I_circ.hi)],
            "F": [str(v) for v in self.F],
            "mu": {str(k): str(v) for k, v in self.mu_map.items()},
            "phi_B": [[str(j.lo), str(j.hi)] for j in self.phi_B],
            "phi_W": [[str(j.lo), str(j.hi)] for j in self.phi_W],
            "colored": [c.to_json_dict() for c in self.colored],
            "checks": {k: c.to_json_dict() for k, c in self.checks.items()},
            "partial_reason": self.partial_reason,
            "asserted_ok": self.asserted_ok,
        }


def _dichotomy(ce: ColoredEndpoint, b_r: Fraction) -> bool | None:
    p, w = ce.endpoint.value, ce.omega_p
    if ce.color == "black" and p <= b_r / 2:
        return w < p or w >= b_r - p
    if ce.color == "white" and p >= b_r / 2:
        return w < b_r - p or w >= p
    return None


def proof_inspect(C: Configuration, delta) -> ProofInspection:
    """Assemble every quantity of the lower-bound proof for C at delta."""
    delta = as_rational(delta)
    if not 0 < delta < HALF:
        raise ValueError("delta must lie in (0, 1/2)")
    scale = 1 / C.b_r
    C = normalize(C)
    ds = delta_star(C)
    if not delta > ds:
        raise NotACounterexample(f"delta={delta} <= delta_star={ds}: not a counterexample")
    colored = [omega_and_color(C, p, delta) for p in C.endpoints]
    assert all(c is not None for c in colored)
    by_value = {c.endpoint.value: c for c in colored}
    ins = ProofInspection(delta, scale, C, colored, C.total)
    one = Fraction(1)

    ins.add(
        "color_zero_black", ASSERTED, by_value[Fraction(0)].color == "black",
        color=by_value[Fraction(0)].color,
    )
    ins.add("color_one_white", ASSERTED, by_value[one].color == "white", color=by_value[one].color)

    dich = {str(c.endpoint.value): _dichotomy(c, one) for c in colored}
    dich = {k: v for k, v in dich.items() if v is not None}
    premise = all(dich.values())
    ins.add(
        "lemma2_dichotomy", DIAGNOSTIC, premise,
        violations=[k for k, v in dich.items() if not v],
    )
    # cimp, and icircin and mainlemma1 through it, lean on the dichotomy;
    # without it they are only diagnostics for this configuration
    lemma2_kind = ASSERTED if premise else DIAGNOSTIC

    group_B = [c.endpoint.value for c in colored
               if c.color == "black" and c.endpoint.value <= HALF and c.omega_p >= 1 - c.endpoint.value]
    # second white group: w(v) >= v (the mirror image of the black condition)
    group_W = [c.endpoint.value for c in colored
               if c.color == "white" and c.endpoint.value >= HALF and c.omega_p >= c.endpoint.value]
    if not group_B or not group_W:
        ins.partial_reason = "v_B undefined" if not group_B else "v_W undefined"
        return ins
    vB, vW = max(group_B), min(group_W)
    ins.v_B, ins.v_W = vB, vW
    rho = ins.rho

    l3a, l3b = (1 - rho) / (2 * (1 - vB)), rho / (2 * vW)
    ins.add("lemma3_black", ASSERTED, l3a <= delta, lhs=str(l3a), rhs=str(delta))
    ins.add("lemma3_white", ASSERTED, l3b <= delta, lhs=str(l3b), rhs=str(delta))

    width = vW - vB
    penult_rhs = 1 / (2 * delta) - 1
    ins.add("penult", DIAGNOSTIC, width >= penult_rhs, lhs=str(width), rhs=str(penult_rhs))
    ins.add("small", DIAGNOSTIC, rho <= 2 * delta, lhs=str(rho), rhs=str(2 * delta))
    k = overlap_bound(delta)
    prop4 = rho >= k * width or rho <= (1 - k) * width
    ins.add("prop4", DIAGNOSTIC, prop4, rho=str(rho), width=str(width), factor=str(k))

    if vB >= vW:
        ins.partial_reason = "I_circ empty"
        return ins
    ins.I_circ = Interval(vB, vW)
    F = [c for c in colored if vB < c.endpoint.value < vW]
    ins.F = [c.endpoint.value for c in F]
    if not F:
        for name, kind in (("cimp", lemma2_kind), ("icircin", lemma2_kind),
                           ("mainlemma1", lemma2_kind), ("lemma1_phi", ASSERTED)):
            ins.add(name, kind, None, reason="no endpoints inside I_circ")
        return ins

    unit = Interval(0, 1)
    fb1, fw1, bad_cimp = [], [], []
    for c in F:
        st = profile_extrema(C, c.endpoint)
        r = st.sup_radius if c.color == "black" else st.inf_radius
        if r is None:
            raise AssertionError(f"unattained extremum at colored endpoint {c.endpoint.value}")
        p = c.endpoint.value
        ins.mu_map[p] = r
        nb = Interval.around(p, r)
        (fb1 if c.color == "black" else fw1).append(nb)
        if not unit.contains(nb):
            bad_cimp.append(str(p))
    ins.add("cimp", lemma2_kind, not bad_cimp, violations=bad_cimp, premise=premise)

    ev = C.endpoint_values
    gaps = [Interval(ev[i], ev[i + 1]) for i in range(0, len(ev) - 1, 2)]
    fb2 = [iv for iv in C.intervals if any(iv.intersects(j) for j in fb1)]
    fw2 = [g for g in gaps if any(g.intersects(j) for j in fw1)]
    ins.phi_B = IntervalSet(fb1 + fb2, merge_touching=False)
    ins.phi_W = IntervalSet(fw1 + fw2, merge_touching=False)
    both = ins.phi_B.union(ins.phi_W)
    inside = all(unit.contains(j) for j in both)
    ins.add(
        "icircin", lemma2_kind, inside and both.covers(ins.I_circ),
        phi_in_unit=inside, covers_I_circ=both.covers(ins.I_circ), premise=premise,
    )

    lefts = {iv.lo for iv in C.intervals}
    rights = {iv.hi for iv in C.intervals} | {Fraction(0)}
    bad_form = [repr(j) for j in ins.phi_B if not (j.lo in lefts and j.hi in rights)]
    bad_form += [repr(j) for j in ins.phi_W if not (j.lo in rights and j.hi in lefts)]
    ins.add("mainlemma1", lemma2_kind, not bad_form, violations=bad_form, premise=premise)

    crossing = [
        (repr(jb), repr(jw)) for jb in ins.phi_B for jw in ins.phi_W
        if jb.intersects(jw) and not (jb.contains(jw) or jw.contains(jb))
    ]
    ins.add("mainlemma2", DIAGNOSTIC, not crossing, crossing=crossing)
    single = ins.phi_B.covers(ins.I_circ) or ins.phi_W.covers(ins.I_circ)
    ins.add("corollary", DIAGNOSTIC, single)

    # overlap bound on every component: black pieces hold C, white pieces its complement
    lemma1_fail, comp_density = [], {}
    for comp_set, pieces, B in ((ins.phi_B, fb1 + fb2, C.intervals), (ins.phi_W, fw1 + fw2, gaps)):
        for J in comp_set:
            cover = tuple(iv for iv in pieces if J.contains(iv))
            # the ray (for C) and (1, inf) (for the complement) matter only
            # when a piece leaves (0, 1)
            extra = [Interval(J.lo, min(J.hi, 0))] if B is C.intervals and J.lo < 0 else []
            if B is gaps and J.hi > 1:
                extra.append(Interval(max(J.lo, one), J.hi))
            BJ = IntervalSet(
                [x for x in (_inter(b, J) for b in B) if x is not None] + extra
            )
            rep = lemma1_check(CoverSystem(J, cover, BJ), delta)
            comp_density[repr(J)] = str(rep.density)
            if not rep.holds:
                lemma1_fail.append(repr(J))
    ins.add("lemma1_phi", ASSERTED, not lemma1_fail, violations=lemma1_fail, densities=comp_density)
    return ins


@dataclass(frozen=True)
class ChainReport:
    delta: Fraction
    steps: dict  # name -> exact slack (>= 0 means the step holds)

    def to_json_dict(self) -> dict:
        return {
            "delta": str(self.delta),
            "steps": {k: {"slack": str(v), "slack_dec": float(v), "holds": v >= 0} for k, v in self.steps.items()},
        }


def final_inequality_chain(insp: ProofInspection) -> ChainReport:
    """Slack of each step 2d >= rho >= k|I| >= k(1/(2d) - 1) and the cubic."""
    d = insp.delta
    k = overlap_bound(d)
    steps = {}
    if insp.v_B is not None and insp.v_W is not None:
        width = insp.v_W - insp.v_B
        rho = insp.rho
        steps["small"] = 2 * d - rho
        steps["penult"] = width - (1 / (2 * d) - 1)
        steps["prop4_dense"] = rho - k * width
        steps["prop4_sparse"] = (1 - k) * width - rho
    steps["chain"] = 2 * d - k * (1 / (2 * d) - 1)
    steps["cubic"] = theorem_polynomial(d) - 1
    return ChainReport(d, steps)


@dataclass(frozen=True)
class Lemma2Probe:
    endpoint: Fraction
    color: str
    omega: Fraction
    dichotomy: bool | None  # None: endpoint on the side the lemma does not cover
    mirrored: bool = False
    cut: Fraction | None = None  # truncation point of the descent step
    cut_in_gap: bool | None = None
    truncated: Configuration | None = None
    truncated_is_counterexample: bool | None = None
    far_black: tuple = ()  # (v, density on (v-(x-v), x), > 1-delta?)

    def to_json_dict(self) -> dict:
        return {
            "endpoint": str(self.endpoint),
            "color": self.color,
            "omega": str(self.omega),
            "dichotomy": self.dichotomy,
            "mirrored": self.mirrored,
            "cut": _s(self.cut),
            "cut_in_gap": self.cut_in_gap,
            "truncated": None if self.truncated is None else self.truncated.to_json_dict(),
            "truncated_is_counterexample": self.truncated_is_counterexample,
            "far_black": [[str(v), str(d), ok] for v, d, ok in self.far_black],
        }


def lemma2_probe(C: Configuration, delta, p) -> Lemma2Probe:
    """Test the omega(p) dichotomy; on violation, run the descent step."""
    delta = as_rational(delta)
    C = normalize(C)
    ce = omega_and_color(C, p, delta)
    if ce is None:
        raise HypothesisError(f"endpoint {p} is not colored at delta={delta}")
    pv = ce.endpoint.value
    holds = _dichotomy(ce, Fraction(1))
    if holds is None:
        raise HypothesisError("need a black endpoint <= 1/2 or a white endpoint >= 1/2")
    if holds:
        return Lemma2Probe(pv, ce.color, ce.omega_p, True)
    mirrored = ce.color == "white"
    work, q = (mirror(C), 1 - pv) if mirrored else (C, pv)
    qc = omega_and_color(work, q, delta)
    assert qc is not None and qc.color == "black"
    x = q + qc.omega_p
    in_gap = not work.contains_point(x)
    try:
        Ct = truncate_at(work, x)
    except ConfigurationError:
        return Lemma2Probe(pv, ce.color, ce.omega_p, False, mirrored, x, in_gap)
    ok = bool(is_counterexample(Ct, delta))
    far = []
    for c in (omega_and_color(work, v, delta) for v in Ct.endpoint_values):
        if c is not None and c.color == "black" and c.endpoint.value + c.omega_p > x and c.endpoint.value < x:
            v = c.endpoint.value
            d = Ct.density(v, x - v)
            far.append((v, d, d > 1 - delta))
    return Lemma2Probe(pv, ce.color, ce.omega_p, False, mirrored, x, in_gap, Ct, ok, tuple(far))
