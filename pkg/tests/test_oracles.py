import random
from fractions import Fraction as F

import numpy as np
import pytest

from brute import random_configuration
from densitylab.constructions import CmsnParams, build_cmsn, solve_bound_constants
from densitylab.core import Interval, IntervalSet, affine_image, make_configuration, normalize
from densitylab.oracles import (
    ASSERTED,
    DIAGNOSTIC,
    CoverSystem,
    HypothesisError,
    NotACounterexample,
    conjecture_polynomial,
    final_inequality_chain,
    lemma1_check,
    lemma1_suite,
    lemma2_probe,
    overlap_bound,
    proof_inspect,
    random_cover_system,
    remark5_experiment,
    theorem_polynomial,
)
from densitylab.profile import delta_star, is_counterexample, omega_and_color

H = F(1, 2)
UNIT = Interval(F(0), F(1))


def _iv(a, b):
    return Interval(F(a), F(b))


# ------------------------------------------------------------ polynomials


def test_theorem_polynomial_values():
    assert theorem_polynomial(F(1, 4)) == F(15, 16)
    assert theorem_polynomial(F(2629, 10000)) < 1
    assert abs(float(theorem_polynomial(F(2629, 10000))) - 0.999616) < 1e-6
    assert theorem_polynomial(F(263, 1000)) > 1
    assert abs(float(theorem_polynomial(F(263, 1000))) - 1.00010) < 1e-5


def test_conjecture_polynomial_root_is_upper_bound():
    d = solve_bound_constants().delta_upper.value
    assert abs(float(conjecture_polynomial(d) - 1)) < 1e-50


# ---------------------------------------------------------------- lemma 1


def test_lemma1_single_interval():
    d = F(1, 5)
    B = IntervalSet([_iv(0, 1 - d)])
    rep = lemma1_check(CoverSystem(UNIT, (UNIT,), B), d)
    assert rep.density == 1 - d and rep.holds and all(rep.steps.values())
    assert remark5_experiment(CoverSystem(UNIT, (UNIT,), B), d).holds


def test_lemma1_two_interval_example():
    d = F(1, 5)
    sys_ = CoverSystem(UNIT, (_iv(0, F(3, 5)), _iv(F(2, 5), 1)), IntervalSet([_iv(0, F(12, 25)), _iv(F(13, 25), 1)]))
    rep = lemma1_check(sys_, d)
    assert rep.cover_densities == (F(14, 15), F(14, 15))
    assert rep.density == F(24, 25) and rep.bound == F(2, 3)
    assert all(rep.steps.values())


def test_lemma1_hypothesis_rejected():
    with pytest.raises(HypothesisError):
        lemma1_check(CoverSystem(UNIT, (UNIT,), IntervalSet([_iv(0, H)])), F(1, 5))


def test_cover_must_union_to_host():
    with pytest.raises(ValueError):
        CoverSystem(UNIT, (_iv(0, H),), IntervalSet())


def test_canonicalization_drops_redundant_intervals():
    cover = (_iv(F(1, 10), F(1, 5)), _iv(0, F(3, 5)), _iv(F(2, 5), 1), _iv(F(1, 2), F(7, 10)))
    can = CoverSystem(UNIT, cover, IntervalSet()).canonical()
    assert can.cover == (_iv(0, F(3, 5)), _iv(F(2, 5), 1))


def test_overlap_bound_value():
    assert overlap_bound(F(1, 4)) == F(3, 5)


def test_random_systems_satisfy_hypothesis_and_bound():
    rng = np.random.default_rng(5)
    for _ in range(300):
        d = F(int(rng.integers(5, 45)), 100)
        sys_ = random_cover_system(rng, d)
        rep = lemma1_check(sys_, d)
        assert rep.holds and all(rep.steps.values())


def test_lemma1_suite_reproducible():
    a = lemma1_suite(200, F(27, 100), seed=9)
    b = lemma1_suite(200, F(27, 100), seed=9)
    assert a == b and a.violations == 0


# --------------------------------------------------------- proof machinery


def test_inspect_rejects_non_counterexample():
    with pytest.raises(NotACounterexample):
        proof_inspect(make_configuration([(H, 1)]), F(3, 10))


@pytest.fixture(scope="module")
def inspection():
    return proof_inspect(build_cmsn(CmsnParams.optimal(30)), F(29, 100))


def test_inspection_asserted_checks(inspection):
    ins = inspection
    assert not ins.partial and ins.asserted_ok
    asserted = {k for k, c in ins.checks.items() if c.kind == ASSERTED}
    assert asserted == {
        "color_zero_black", "color_one_white", "lemma3_black", "lemma3_white",
        "cimp", "icircin", "mainlemma1", "lemma1_phi",
    }
    diagnostic = {k for k, c in ins.checks.items() if c.kind == DIAGNOSTIC}
    assert diagnostic == {"lemma2_dichotomy", "penult", "small", "prop4", "mainlemma2", "corollary"}


def test_inspection_invariants(inspection):
    ins = inspection
    assert 0 <= ins.rho <= 1
    assert ins.v_B <= H <= ins.v_W
    for p, r in ins.mu_map.items():
        assert UNIT.contains(Interval.around(p, r))
    assert ins.phi_B.union(ins.phi_W).covers(ins.I_circ)
    rights = {iv.hi for iv in ins.configuration.intervals}
    lefts = {iv.lo for iv in ins.configuration.intervals}
    assert all(j.lo in lefts and j.hi in rights for j in ins.phi_B)
    assert all(j.lo in rights and j.hi in lefts for j in ins.phi_W)
    d = ins.delta
    assert (1 - ins.rho) / (2 * (1 - ins.v_B)) <= d and ins.rho / (2 * ins.v_W) <= d


def test_inspection_is_scale_free():
    C = build_cmsn(CmsnParams.optimal(12))
    a = proof_inspect(C, F(3, 10)).to_json_dict()
    b = proof_inspect(affine_image(C, 3), F(3, 10)).to_json_dict()
    a.pop("scale"), b.pop("scale")
    assert a == b


def test_chain_report(inspection):
    ch = final_inequality_chain(inspection)
    assert set(ch.steps) == {"small", "penult", "prop4_dense", "prop4_sparse", "chain", "cubic"}
    d = inspection.delta
    assert ch.steps["cubic"] == theorem_polynomial(d) - 1
    assert ch.steps["chain"] >= 0  # delta = 0.29 exceeds the root of the cubic


def test_random_counterexamples_color_endpoints():
    rng = random.Random(21)
    seen = 0
    while seen < 60:
        C = random_configuration(rng)
        ds = delta_star(C)
        if ds >= F(49, 100):
            continue
        d = (ds + H) / 2
        ins = proof_inspect(C, d)
        assert ins.asserted_ok, ins.to_json_dict()
        for name in ("cimp", "icircin", "mainlemma1"):
            if name in ins.checks:
                want = ASSERTED if ins.checks["lemma2_dichotomy"].passed else DIAGNOSTIC
                assert ins.checks[name].kind == want
        seen += 1


# ---------------------------------------------------------------- lemma 2


def test_lemma2_probe_on_family():
    C = build_cmsn(CmsnParams.optimal(20))
    d = F(29, 100)
    out = lemma2_probe(C, d, 0)
    assert out.color == "black"
    if out.dichotomy:
        assert out.omega >= 1


def test_lemma2_descent_keeps_counterexample():
    rng = random.Random(4)
    truncations = 0
    for _ in range(400):
        C = random_configuration(rng, r_max=5, den_max=24)
        ds = delta_star(C)
        if ds >= F(49, 100):
            continue
        d = (ds + H) / 2
        Cn = normalize(C)
        for p in Cn.endpoint_values:
            ce = omega_and_color(Cn, p, d)
            eligible = (ce.color == "black" and p <= H) or (ce.color == "white" and p >= H)
            if not eligible:
                continue
            pr = lemma2_probe(Cn, d, p)
            if pr.truncated is not None:
                truncations += 1
                assert pr.truncated_is_counterexample
                assert is_counterexample(pr.truncated, d)
    assert truncations > 0
