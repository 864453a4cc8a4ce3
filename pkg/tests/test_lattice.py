import pytest
from hypothesis import given
from hypothesis import strategies as st

from fatpoints.lattice import (
    L,
    Configuration,
    ConfigurationError,
    DivisorClass,
    ParseError,
    canonical_class,
    enumerate_negative_classes,
    expected_dim,
    format_system,
    homogeneous,
    is_nef_bounded,
    pair,
    parse_system,
    self_int,
    virtual_dim,
)


def classes(k):
    cfg = Configuration.free(k)
    return st.builds(lambda d, ms: DivisorClass(d, tuple(ms), cfg),
                     st.integers(-10, 30), st.lists(st.integers(-5, 12), min_size=k, max_size=k))


def test_pair_examples():
    A = L(3, [1] * 9)
    assert pair(A, A) == 0
    assert pair(L(1, [1, 1]), L(2, [2, 2])) == -2
    assert pair(L(7, [0] * 4), L(0, [3] * 4)) == 0


def test_canonical():
    K0 = canonical_class(Configuration.free(0))
    assert K0.degree == -3 and K0.mults == ()
    K = canonical_class(Configuration.free(10))
    assert (K.degree, K.mults) == (-3, (-1,) * 10)
    assert pair(homogeneous(11, 4, 10), K) == -3 * 11 + 10 * 4


@pytest.mark.parametrize("system, v", [("174; 55^10", -1), ("4; 2^5", -1), ("7", 35), ("19; 6^10", -1)])
def test_virtual_dim(system, v):
    assert virtual_dim(parse_system(system)) == v


def test_expected_dim_clamps():
    assert expected_dim(parse_system("2; 2^2")) == -1
    assert expected_dim(homogeneous(19, 6, 10)) == -1
    assert expected_dim(L(6, [0] * 4)) == 27


@given(st.integers(1, 9).flatmap(lambda k: st.tuples(classes(k), classes(k), classes(k))),
       st.integers(-4, 4), st.integers(-4, 4))
def test_bilinear_symmetric(abc, x, y):
    A, B, C = abc
    assert pair(x * A + y * B, C) == x * pair(A, C) + y * pair(B, C)
    assert pair(A, B) == pair(B, A)


@given(st.integers(0, 10).flatmap(classes))
def test_riemann_roch(A):
    K = canonical_class(A.config)
    assert 2 * virtual_dim(A) == self_int(A) - pair(A, K)


@pytest.mark.parametrize("k, count", [(2, 3), (3, 6), (4, 10), (5, 16), (6, 27), (7, 56), (8, 240)])
def test_minus_one_curve_counts(k, count):
    # classical counts of lines on del Pezzo surfaces of degree 9 - k
    rep = enumerate_negative_classes(Configuration.free(k), None, 6, -1)
    assert len(rep) == count
    for c in rep:
        assert c.self_int == -1 and pair(c.cls, canonical_class(c.cls.config)) == -1


def test_negative_class_examples():
    rep = enumerate_negative_classes(Configuration.free(2), None, 1, -1)
    sigs = {c.cls.signature() for c in rep}
    assert sigs == {(1, (1, 1)), (0, (-1, 0)), (0, (0, -1))}
    cubic = {c.cls.signature() for c in enumerate_negative_classes(Configuration.free(7), None, 3, -1)}
    assert (3, (2, 1, 1, 1, 1, 1, 1)) in cubic


def test_minus_two_on_compound_points():
    cfg = Configuration.from_shape([1, 2, 2])
    rep = enumerate_negative_classes(cfg, None, 0, -2)
    sigs = {c.cls.signature() for c in rep}
    assert (0, (0, (-1, 1), (0, 0))) in sigs and (0, (0, (0, 0), (-1, 1))) in sigs


def test_nef():
    for d, m in ((10, 3), (13, 3), (20, 6)):
        assert is_nef_bounded(L(d, [2 * m] + [m] * 6), degree_bound=3).nef
    v = is_nef_bounded(parse_system("2; 2^2"))
    assert not v.nef and v.label == "NOT-NEF" and v.witness.cls.signature() == (1, (1, 1))
    assert is_nef_bounded(L(0, [0] * 4)).label == "NEF-UP-TO-BOUND"


@pytest.mark.parametrize("text", ["174; 55^10", "24; 11^4, [4,4]^2", "7", "5;3,2,2", "9; [2,1]^3, 1"])
def test_parse_format_roundtrip(text):
    A = parse_system(text)
    assert parse_system(format_system(A)) == A


def test_parse_whitespace_insensitive():
    assert parse_system(" 24 ;11 ^4 ,[ 4 , 4 ]^2") == parse_system("24; 11^4, [4,4]^2")


@pytest.mark.parametrize("bad", ["", "3; 1^", "a; 1", "3; [1,2", "3; 1,,2"])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_system(bad)


def test_configuration_rejects_forward_parent():
    from fatpoints.lattice import PointNode
    with pytest.raises(ConfigurationError):
        Configuration((PointNode("b", "a"), PointNode("a")))


def test_json_roundtrip():
    A = parse_system("24; 11^4, [4,4]^2")
    assert DivisorClass.from_json(A.to_json()) == A
