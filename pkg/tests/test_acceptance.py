"""One line per end-to-end claim; the outcomes are listed again in the terminal summary."""

import pytest

from fatpoints import verify


def check(report, criterion):
    report(criterion.line())
    print(criterion.line())
    assert criterion.passed, criterion.detail


def test_oracle_agrees_with_reduction_up_to_nine_points(report):
    check(report, verify.oracle_shgh_equivalence(n=200))


def test_homogeneous_systems_at_desk_scale(report):
    check(report, verify.desk_scale(m_max=8))


def test_ratio_at_most_three_is_empty(report):
    check(report, verify.below_three())


def test_z2_cremona_table(report):
    check(report, verify.cremona_table())


def test_degeneration_closed_forms(report):
    check(report, verify.closed_form_suite(n=100))


def test_lemma_window_scan(report):
    check(report, verify.window_scan(m_max=200))


def test_exceptional_ledgers(report):
    check(report, verify.case_scripts())


@pytest.mark.slow
def test_long_rank_witnesses(report):
    # read from the witness cache; `fatpoints verify-paper --level full` recomputes missing ones
    check(report, verify.long_runs())


def test_algebraic_invariants(report):
    check(report, verify.properties())
