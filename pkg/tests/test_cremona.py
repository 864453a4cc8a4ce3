import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fatpoints.cremona import (
    ALMOST_EXCELLENT,
    CONJECTURAL,
    EMPTY_CONJECTURAL,
    EMPTY_PROVEN,
    EXCELLENT,
    MINUS_ONE_SPECIAL,
    NO_PREDICTION,
    PROVEN,
    InvalidTriple,
    TransformLog,
    classify,
    is_standard,
    nagata_empty,
    quadratic_transform,
    reduce_to_standard,
    shgh_dim,
    split_fixed_neg_curves,
)
from fatpoints.lattice import L, Configuration, DivisorClass, canonical_class, pair, parse_system, self_int, virtual_dim

LABELS = ("p1", "p2", "p3")


def test_quadratic_examples():
    assert quadratic_transform(L(5, [3, 2, 2]), LABELS) == L(3, [1, 0, 0])
    al, a = 9, 6
    start = L(10 * al - 6 * a, [6 * al - 3 * a] + [3 * al - 2 * a] * 6)
    assert quadratic_transform(start, LABELS) == L(42, [24, 3, 3, 15, 15, 15, 15])
    fixed = L(7, [3, 2, 2, 1])
    assert quadratic_transform(fixed, LABELS).degree == 7


def test_quadratic_needs_three_labels():
    with pytest.raises(InvalidTriple):
        quadratic_transform(L(5, [3, 2, 2]), ("p1", "p1", "p2"))


@given(st.integers(3, 9).flatmap(lambda k: st.tuples(
    st.integers(-5, 25), st.lists(st.integers(-3, 10), min_size=k, max_size=k),
    st.lists(st.integers(0, k - 1), min_size=3, max_size=3, unique=True))))
def test_invariance_and_involution(data):
    d, ms, idx = data
    A = DivisorClass(d, tuple(ms), Configuration.free(len(ms)))
    t = tuple(A.config.labels[i] for i in idx)
    Q = quadratic_transform(A, t)
    K = canonical_class(A.config)
    assert (virtual_dim(Q), self_int(Q), pair(Q, K)) == (virtual_dim(A), self_int(A), pair(A, K))
    assert quadratic_transform(Q, t) == A


def test_reduce_z2_instance():
    final, log = reduce_to_standard(parse_system("54; 36, 15^6"))
    assert final == L(18, [0] + [3] * 6)
    assert len(log.quadratic_steps()) == 3
    assert log.render().splitlines()[-1] == "18; 0, 3, 3, 3, 3, 3, 3"


def test_reduce_compound_instance():
    final, log = reduce_to_standard(parse_system("24; 11^4, [4,4]^2"))
    assert final.degree == 7 and sorted(final.mults, reverse=True)[:4] == [3, 2, 2, 2]
    assert log.render().splitlines()[-1] == "7; 2, 2, 2, 3, [0,0], [0,0]"


def test_standard_unchanged():
    A = L(3, [1] * 9)
    final, log = reduce_to_standard(A)
    assert final == A and not log.steps
    assert log.render() == "3; 1, 1, 1, 1, 1, 1, 1, 1, 1"


def test_log_replay_and_json():
    _, log = reduce_to_standard(parse_system("54; 36, 15^6"))
    assert log.replay() == log.final
    back = TransformLog.from_json(log.to_json())
    assert back.render() == log.render() and back.final == log.final


def test_split_examples():
    res, splits = split_fixed_neg_curves(parse_system("2; 2^2"))
    assert res == L(0, [0, 0]) and [(c.signature(), n) for c, n in splits] == [((1, (1, 1)), 2)]
    res, splits = split_fixed_neg_curves(parse_system("4; 2^5"))
    assert res == L(0, [0] * 5) and [(c.signature(), n) for c, n in splits] == [((2, (1,) * 5), 2)]
    nef = L(10, [3] * 6)
    assert split_fixed_neg_curves(nef) == (nef, [])


def test_classify_examples():
    for al, a in ((9, 0), (9, 6), (12, 5), (5, 5), (1, 0)):
        assert classify(L(4 * al - 3 * a, [al - a] * 6)).kind == EXCELLENT
    assert classify(parse_system("2; 2^2")).kind == MINUS_ONE_SPECIAL
    assert classify(L(6, [2] * 9)).kind == ALMOST_EXCELLENT


@pytest.mark.parametrize("system, dim, status", [
    ("2; 2^2", 0, PROVEN), ("6; 2^9", 0, PROVEN), ("174; 55^10", -1, CONJECTURAL), ("4; 2^5", 0, PROVEN)])
def test_shgh_examples(system, dim, status):
    res = shgh_dim(parse_system(system))
    assert (res.dim, res.status) == (dim, status)


def test_shgh_matches_brute_force(brute_dim):
    rng = random.Random(5)
    for _ in range(25):
        k = rng.randint(1, 8)
        d = rng.randint(1, 9)
        ms = [rng.randint(0, 4) for _ in range(k)]
        assert shgh_dim(L(d, ms)).dim == brute_dim(d, ms, seed=rng.randrange(100))


def test_nagata():
    assert nagata_empty(L(9, [3] * 10)) == EMPTY_CONJECTURAL
    assert nagata_empty(L(12, [3] * 16)) == EMPTY_PROVEN
    assert nagata_empty(L(100, [1] * 10)) == NO_PREDICTION
    with pytest.raises(ValueError):
        nagata_empty(L(3, [1] * 9))


@given(st.integers(0, 40), st.lists(st.integers(0, 15), min_size=3, max_size=9))
def test_reduction_lands_on_standard(d, ms):
    final, log = reduce_to_standard(L(d, ms))
    assert log.empty or is_standard(final)
    assert virtual_dim(final) == virtual_dim(L(d, ms)) or log.empty or any(
        s.kind == "split" for s in log.steps)
