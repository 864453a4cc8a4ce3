import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fatpoints import modp, oracle
from fatpoints.lattice import L, Configuration, expected_dim, homogeneous, parse_system

from conftest import naive_rank

P = oracle.DEFAULT_PRIME


def test_sample_config_distinct_and_deterministic():
    cfg = Configuration.free(10)
    a, b = oracle.sample_config(cfg, P, 1), oracle.sample_config(cfg, P, 1)
    assert a.coords == b.coords
    assert len(set(a.coords.values())) == 10
    assert oracle.sample_config(cfg, P, 2).coords != a.coords


def test_build_matrix_rows():
    cfgp = oracle.sample_config(Configuration.free(1), P, 0)
    cfgp.coords["p1"] = (2, 3)
    M = oracle.build_matrix(L(1, [1]), cfgp)
    assert M.shape == (1, 3)
    assert sorted(int(x) for x in M.data[0]) == [1, 2, 3]
    assert oracle.build_matrix(L(2, [2]), cfgp).shape == (3, 6)


def test_rank_trivial():
    assert oracle.rank_mod_p(np.zeros((5, 7)), P) == 0
    assert oracle.rank_mod_p(np.eye(9), P) == 9


def test_rank_of_special_system():
    L45 = parse_system("4; 2^5")
    M = oracle.build_matrix(L45, oracle.sample_config(L45.config, P, 3))
    assert oracle.rank_mod_p(M) == 14


@given(st.integers(1, 40), st.integers(1, 40), st.integers(0, 2**31), st.sampled_from([7, 101, 65521, P]))
def test_rank_matches_naive(r, c, seed, p):
    rng = np.random.default_rng(seed)
    A = rng.integers(0, p, size=(r, c))
    if r > 2:
        A[-1] = (A[0] + 3 * A[1]) % p  # force a dependency
    assert modp.rank(A.astype(np.float64), p) == naive_rank(A.tolist(), p)


@pytest.mark.parametrize("n", [300, 1100])
def test_rank_blocked_path(n):
    # large enough to go through panel factorisation and trailing updates
    rng = np.random.default_rng(n)
    A = rng.integers(0, P, size=(n, n - 5))
    B = rng.integers(0, P, size=(n - 5, n))
    M = oracle.mulmod(A, B, P).astype(np.float64)
    assert modp.rank(M, P) == n - 5


def test_mulmod_matches_python():
    rng = np.random.default_rng(0)
    A, B = rng.integers(0, P, size=(6, 9)), rng.integers(0, P, size=(9, 4))
    want = [[sum(int(A[i, k]) * int(B[k, j]) for k in range(9)) % P for j in range(4)] for i in range(6)]
    assert oracle.mulmod(A, B, P).tolist() == want


@pytest.mark.parametrize("system, dim, status", [
    ("3; 1^9", 0, oracle.CERTIFIED_NONSPECIAL),
    ("4; 2^5", 0, oracle.UPPER_BOUND_ONLY),
    ("19; 6^10", -1, oracle.CERTIFIED_EMPTY),
])
def test_generic_dim_examples(system, dim, status):
    res = oracle.generic_dim(parse_system(system))
    assert (res.dim, res.status) == (dim, status)
    if status == oracle.UPPER_BOUND_ONLY:
        assert res.note


def test_generic_dim_against_brute_force(brute_dim):
    rng = random.Random(17)
    for _ in range(25):
        k = rng.randint(1, 10)
        d = rng.randint(1, 10)
        ms = [rng.randint(0, 4) for _ in range(k)]
        assert oracle.generic_dim(L(d, ms)).dim == brute_dim(d, ms, seed=rng.randrange(99))


def test_infinitely_near_points():
    # [2,1] costs 3 + 1 conditions; [1,1] pins the line through p in one direction
    assert oracle.generic_dim(parse_system("4; [2,1]")).dim == 14 - 4
    assert oracle.generic_dim(parse_system("1; [1,1]")).dim == 0


@given(st.integers(0, 12), st.lists(st.integers(0, 5), min_size=1, max_size=10), st.integers(0, 50))
def test_never_below_expected(d, ms, seed):
    Lc = L(d, ms)
    assert oracle.generic_dim(Lc, seed=seed, trials=1).dim >= expected_dim(Lc)


def test_field_too_small_and_bad_prime():
    with pytest.raises(oracle.FieldTooSmall):
        oracle.generic_dim(L(20, [3]), p=17)
    with pytest.raises(ValueError):
        oracle.generic_dim(L(2, [1]), p=21)


def test_witness_cache_roundtrip(tmp_path):
    cache = oracle.WitnessCache(tmp_path)
    Lc = homogeneous(12, 4, 10)
    first = oracle.generic_dim(Lc, trials=1, cache=cache)
    files = list(tmp_path.glob("*.json"))
    assert len(files) == 1
    assert files[0].stem == oracle.witness_key(Lc, P, 0)
    w = cache.get(Lc, P, 0)
    assert (w.rank, w.dim, w.status) == (first.witness[2], first.dim, first.status)
    assert oracle.generic_dim(Lc, trials=1, cache=cache) == first


def test_witness_replay_deterministic():
    Lc = parse_system("12; 4^5, 3^3")
    assert oracle.trial_rank(Lc, P, 5) == oracle.trial_rank(Lc, P, 5)


def test_certify_nonspecial():
    Lc = L(7, [2] + [1] * 6)
    res = oracle.certify_nonspecial(Lc)
    assert res.dim == expected_dim(Lc) and res.status == oracle.CERTIFIED_NONSPECIAL
    special = oracle.certify_nonspecial(parse_system("2; 2^2"))
    assert special.status in (oracle.UPPER_BOUND_ONLY, oracle.INCONCLUSIVE)
    assert oracle.certify_nonspecial(L(0, [0])).dim == 0


def test_large_matrix_memmap(tmp_path, monkeypatch):
    monkeypatch.setattr(oracle, "IN_MEMORY_LIMIT", 1000)
    Lc = homogeneous(15, 5, 10)
    assert oracle.trial_rank(Lc, P, 0, scratch=tmp_path) == oracle.ncols(15)
    assert not list(tmp_path.iterdir())
