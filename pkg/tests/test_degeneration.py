import random
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fatpoints.degeneration import (
    CATALOG,
    COMPLETE_RESTRICTION,
    TRANSVERSALITY,
    CatalogError,
    HypothesisError,
    RatioError,
    build,
    build_first,
    case_174,
    case_193,
    case_348,
    choose_a,
    closed_form_mismatches,
    h_for,
    lemma_check,
    matching_dim,
    scan,
    scan_pair,
    twist,
    validate,
)
from fatpoints.degeneration.fiber import ValidationError, _fourth, _second, fiber_from_json, fiber_to_json
from fatpoints.degeneration.lemmas import DIRECT, LEMMAS, NONE, a_requirement
from fatpoints.degeneration.matching import first_degeneration_dim
from fatpoints.degeneration.scan import EMPTY, NON_SPECIAL, OPEN, pairs, regime
from fatpoints.lattice import expected_dim, homogeneous
from fatpoints.verify import sample_in_window


def sig(fiber, name):
    return fiber.bundle(name).signature()


# ---------------------------------------------------------------- fibres


def test_first_degeneration_bundles():
    f = build_first(174, 55, 0)
    assert sig(f, "V") == (110, (55,) * 4)
    assert sig(f, "Z") == (174, (110,) + (55,) * 6)
    assert validate(f).ok


def test_twist_zero_and_inverse():
    f = build_first(40, 12, 3)
    assert twist(f, "Z", 0).components == f.components
    assert twist(twist(f, "Z", 5), "Z", -5).components == f.components


def test_twist_before_third_stage():
    f = _second(174, 55, 6)
    p = f.params
    g = twist(f, "T", -(p.b - 2 * p.a - p.e))
    assert sig(g, "V") == (2 * p.m + p.a, (p.m,) * 4 + ((2 * p.b - 2 * p.a - p.e, 2 * p.a),) * 2)


def test_conic_throw_lands_compound_points():
    f = _second(174, 55, 6)
    assert f.params.b == 20
    assert sig(f, "V") == (116, (55,) * 4 + ((20, 20),) * 2)


def test_third_stage_for_174():
    f = build(3, 174, 55, 6)
    assert [c.name for c in f.components] == ["V", "Z", "T", "U1", "U2"]
    assert sig(f, "V") == (52, (23,) * 4 + ((12, 12),) * 2)
    assert sig(f, "Z") == (54, (36,) + (15,) * 6 + ((8, 8),) * 2)
    assert validate(f).ok


def test_fourth_stage_348():
    f = build(4, 348, 110, 14)
    assert len(f.components) == 9
    assert validate(f).ok
    assert fiber_from_json(fiber_to_json(f)) == f


def test_corrupted_bundle_fails_matching():
    f = build_first(30, 9, 1)
    Z = f.component("Z")
    ms = list(Z.bundle.mults)
    ms[0] += 1  # E is the exceptional curve e0 on Z
    bad = f._put(replace(Z, bundle=Z.bundle.replace(mults=ms)))
    rep = validate(bad, strict=False)
    assert not rep.ok and any("restriction degrees" in p for p in rep.problems)
    with pytest.raises(ValidationError):
        validate(bad)


@pytest.mark.parametrize("stage, d, m, a", [(2, 174, 55, 6), (3, 200, 60, 0), (4, 191, 60, 0), (4, 173, 55, 0)])
def test_out_of_window(stage, d, m, a):
    with pytest.raises(HypothesisError):
        build(stage, d, m, a)


@given(st.sampled_from([2, 3, 4]), st.integers(0, 2**20))
def test_builds_validate_and_match_closed_forms(stage, seed):
    d, m, a = sample_in_window(stage, random.Random(seed), m_max=80)
    f = build(stage, d, m, a)
    assert closed_form_mismatches(f, stage) == []
    assert validate(f).ok


@given(st.integers(1, 60), st.integers(0, 30), st.integers(0, 20))
def test_first_degeneration_always_validates(m, extra, a):
    d = 3 * m + extra
    assert validate(build_first(d, m, a)).ok


# ---------------------------------------------------------------- lemmas


def test_lemma_catalog():
    with pytest.raises(CatalogError):
        lemma_check("Q7", 19, 6, 0)
    for lid in CATALOG:
        assert lemma_check(lid, 348, 110, 14).lemma == lid


def test_v2_hypothesis_fails_at_174():
    rep = lemma_check("V2", 174, 55, 6)
    assert not rep.passed and not rep.hypotheses_met


def test_z3_boundary_flag():
    rep = lemma_check("Z3", 190, 60, 0)
    assert rep.passed and any("almost excellent" in f for f in rep.flags)


@pytest.mark.parametrize("ell, alpha, h", [(4, 30, 1), (0, 7, 1), (3, 28, 1), (3, 27, 2), (0, 5, 2), (0, 6, 2),
                                           (1, 11, 3), (2, 18, 3), (1, 10, None), (3, 26, None)])
def test_h_table(ell, alpha, h):
    assert h_for(ell, alpha) == h


def test_choose_a_multiples_of_19_6():
    for al in range(7, 16):
        c = choose_a(19 * al, 6 * al)
        assert (c.route, c.a) == (LEMMAS, al - 1)
    for al in (5, 6):
        assert choose_a(19 * al, 6 * al).a == al - 2
    assert choose_a(19, 6).route == DIRECT and choose_a(19, 6).certificate.dim == -1


def test_choose_a_exceptions():
    for d, m in ((174, 55), (193, 61), (348, 110)):
        assert choose_a(d, m).route == NONE
    assert choose_a(348, 110).a == 11 and not a_requirement(2, 11)


def test_choose_a_range():
    with pytest.raises(RatioError):
        choose_a(20, 6)
    with pytest.raises(RatioError):
        choose_a(173, 55)


# ---------------------------------------------------------------- ledgers


def test_first_degeneration_ledger_is_exact():
    for d, m in pairs(Fraction(10, 3), Fraction(4), 12):
        rep = first_degeneration_dim(d, m)
        assert rep.exact and rep.dim == expected_dim(homogeneous(d, m, 10)), (d, m)


def test_case_174():
    rep = case_174()
    assert rep.verdict == "EMPTY" and rep.dim == -1
    assert rep.extras["bounds"] == (6, 8)
    assert sorted(rep.extras["per_a"]) == list(range(15))
    assert all(v.startswith("EMPTY") for v in rep.extras["per_a"].values())
    assert rep.assumptions


def test_case_193():
    rep = case_193()
    assert rep.dim == 4 and rep.exact and rep.verdict.startswith("DIM-EXACT(4)")
    assert {COMPLETE_RESTRICTION, TRANSVERSALITY} <= set(rep.assumptions)
    assert [s.dim for s in rep.steps][:4] == [12, 6, 11, 2]


def test_case_348():
    rep = case_348()
    assert rep.verdict == "DIM-UPPER-BOUND(24)" and rep.expected == 24
    dims = [s.dim for s in rep.steps]
    assert 49 in dims and 33 in dims and 15 in dims and 1 in dims
    assert rep.assumptions


def test_matching_on_fourth_fibre_is_bound():
    rep = matching_dim(_fourth(348, 110, 14))
    assert rep.dim >= expected_dim(homogeneous(348, 110, 10))


def test_report_json():
    js = case_193().to_json()
    assert js["dim"] == 4 and "assumptions" in js


# ---------------------------------------------------------------- scan


def test_regimes():
    assert regime(9, 3) == "ratio<=3"
    assert regime(10, 3) == "first"
    assert regime(16, 5) == "second"
    assert regime(35, 11) == "third"
    assert regime(19, 6) == "fourth"
    assert regime(174, 55) == "fourth"
    assert regime(173, 55) == "uncovered"


def test_scan_first_regime_all_nonspecial():
    rows = scan(Fraction(10, 3), None, m_max=10)
    assert rows and all(r.verdict == NON_SPECIAL for r in rows)


def test_scan_below_three_empty():
    rows = scan(Fraction(2), Fraction(3), m_max=10)
    assert all(r.verdict == EMPTY for r in rows if r.regime == "ratio<=3")


def test_scan_exceptions_routed():
    for d, m in ((174, 55), (193, 61), (348, 110)):
        row = scan_pair(d, m)
        assert row.route == "case script" and row.ok
    assert scan_pair(173, 55).verdict == OPEN


def test_scan_order_and_parallel():
    one = scan(Fraction(19, 6), Fraction(10, 3), m_max=12)
    two = scan(Fraction(19, 6), Fraction(10, 3), m_max=12, jobs=2)
    assert [r.to_json() for r in one] == [r.to_json() for r in two]
    keys = [(r.ratio, r.m) for r in one]
    assert keys == sorted(keys)


def test_scan_bad_bounds():
    with pytest.raises(ValueError):
        scan(Fraction(4), Fraction(3))
