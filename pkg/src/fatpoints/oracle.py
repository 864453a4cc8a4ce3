"""Interpolation matrices over a prime field and one-sided dimension certificates.

A curve of degree d is a vector of coefficients c_ab of x^a y^b (a + b <= d).
Multiplicity m at a free point (x0, y0) means that every coefficient of u^i v^j
with i + j < m in f(x0 + u, y0 + v) vanishes.  For a point infinitely near to
it in direction w0 we substitute x = u, y = u (w0 + w), divide by u^m1 and
impose vanishing of the coefficients of u^s w^k with s + k < m2.

Ranks are computed by blocked elimination.  The trailing updates are float64
matrix products, kept exact by splitting one operand into small balanced
digits, so every partial sum stays below 2^53.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from . import modp
from .lattice import Configuration, DivisorClass, expected_dim

DEFAULT_PRIME = 2147483647  # 2^31 - 1
SECOND_PRIME = 2147483629
DEFAULT_TRIALS = 3
DEFAULT_BLOCK = modp.PANEL

CERTIFIED_NONSPECIAL = "CERTIFIED-NONSPECIAL"
CERTIFIED_EMPTY = "CERTIFIED-EMPTY"
UPPER_BOUND_ONLY = "UPPER-BOUND-ONLY"
INCONCLUSIVE = "INCONCLUSIVE"


class FieldTooSmall(ValueError):
    pass


class InvalidCluster(ValueError):
    pass


class SamplingError(RuntimeError):
    pass


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# ---------------------------------------------------------------- sampling


@dataclass(frozen=True)
class ConfigFp:
    p: int
    seed: int
    coords: dict  # free label -> (x, y)
    directions: dict  # child label -> w
    config: Configuration = field(repr=False)


def sample_config(cfg: Configuration, p: int, seed: int) -> ConfigFp:
    rng = random.Random(f"{p}:{seed}")
    coords: dict[str, tuple[int, int]] = {}
    directions: dict[str, int] = {}
    used_points: set[tuple[int, int]] = set()
    used_dirs: dict[str | None, set[int]] = {}
    free = sum(1 for n in cfg.points if n.parent is None)
    if free > p * p:
        raise SamplingError("field too small for distinct points")
    for node in cfg.points:
        if node.parent is None:
            for _ in range(1000):
                pt = (rng.randrange(p), rng.randrange(p))
                if pt not in used_points:
                    break
            else:
                raise SamplingError("could not sample distinct points")
            used_points.add(pt)
            coords[node.label] = pt
        else:
            sibs = used_dirs.setdefault(node.parent, set())
            if len(sibs) >= p:
                raise SamplingError("field too small for distinct directions")
            for _ in range(1000):
                w = rng.randrange(p)
                if w not in sibs:
                    break
            else:
                raise SamplingError("could not sample distinct directions")
            sibs.add(w)
            directions[node.label] = w
    return ConfigFp(p, seed, coords, directions, cfg)


# ---------------------------------------------------------------- condition matrix


def monomials(d: int) -> tuple[np.ndarray, np.ndarray]:
    a, b = [], []
    for i in range(d + 1):
        for j in range(d + 1 - i):
            a.append(i)
            b.append(j)
    return np.array(a, dtype=np.int64), np.array(b, dtype=np.int64)


def ncols(d: int) -> int:
    return (d + 1) * (d + 2) // 2


def nrows(Lc: DivisorClass) -> int:
    return sum(max(m, 0) * (max(m, 0) + 1) // 2 for m in Lc.mults)


def _taylor_table(x0: int, order: int, d: int, p: int) -> np.ndarray:
    """T[i, a] = C(a, i) x0^(a-i) mod p for i < order, a <= d."""
    T = np.zeros((order, d + 1), dtype=np.int64)
    pw = [1] * (d + 1)
    for e in range(1, d + 1):
        pw[e] = pw[e - 1] * x0 % p
    binom = [1] * (d + 1)  # binom[a] = C(a, i) for the current i
    for i in range(order):
        if i > 0:
            new = [0] * (d + 1)
            for a in range(i, d + 1):
                new[a] = (new[a - 1] + binom[a - 1]) % p if a > i else 1
            binom = new
        row = [0] * (d + 1)
        for a in range(i, d + 1):
            row[a] = binom[a] * pw[a - i] % p
        T[i] = row
    return T


@dataclass
class ConditionMatrix:
    """Rows of linear conditions; `provenance[r]` names the point and coefficient index of row r."""

    d: int
    p: int
    data: np.ndarray
    provenance: list

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


def _point_rows(
    d: int, p: int, m: int, X: np.ndarray, Y: np.ndarray, colA: np.ndarray, colB: np.ndarray
) -> Iterator[tuple[np.ndarray, list]]:
    for i in range(m):
        block = (X[i, colA][None, :] * Y[: m - i, colB]) % p
        yield block, [(i, j) for j in range(m - i)]


def _child_rows(
    d: int, p: int, m1: int, m2: int, w0: int, X: np.ndarray, Y: np.ndarray,
    colA: np.ndarray, colB: np.ndarray,
) -> Iterator[tuple[np.ndarray, list]]:
    from math import comb

    for s in range(m2):
        t = s + m1
        if t > d:
            # all Taylor coefficients of this order vanish identically
            yield np.zeros((m2 - s, len(colA)), dtype=np.int64), [(s, k) for k in range(m2 - s)]
            continue
        F = (X[t - np.arange(t + 1)][:, colA] * Y[np.arange(t + 1)][:, colB]) % p  # row j: F_{t-j, j}
        coef = np.zeros((m2 - s, t + 1), dtype=np.int64)
        for k in range(m2 - s):
            for j in range(k, t + 1):
                coef[k, j] = comb(j, k) % p * pow(w0, j - k, p) % p
        yield mulmod(coef, F, p).astype(np.int64), [(s, k) for k in range(m2 - s)]


def iter_condition_rows(Lc: DivisorClass, config: ConfigFp, d: int | None = None):
    """Yield (label, block, indices) row blocks in configuration order."""
    d = Lc.degree if d is None else d
    p = config.p
    if d < 0:
        raise ValueError("degree must be non-negative")
    if p <= d:
        raise FieldTooSmall(f"need p > d, got p={p}, d={d}")
    if any(m < 0 for m in Lc.mults):
        raise ValueError("multiplicities must be non-negative")
    cfg = Lc.config
    colA, colB = monomials(d)
    tables: dict[str, tuple[np.ndarray, np.ndarray, int]] = {}
    for i, node in enumerate(cfg.points):
        m = Lc.mults[i]
        kids = cfg.children(i)
        if node.parent is None:
            need = max([m] + [m + Lc.mults[j] for j in kids])
            x0, y0 = config.coords[node.label]
            order = min(max(need, 1), d + 1)
            tables[node.label] = (_taylor_table(x0, order, d, p), _taylor_table(y0, order, d, p), m)
            if kids and m <= 0 and any(Lc.mults[j] > 0 for j in kids):
                raise InvalidCluster(f"{node.label} has a child but multiplicity {m}")
            X, Y, _ = tables[node.label]
            for block, idx in _point_rows(d, p, min(m, d + 1), X, Y, colA, colB):
                yield node.label, block, idx
            if m > d + 1:
                extra = m * (m + 1) // 2 - (d + 1) * (d + 2) // 2
                yield node.label, np.zeros((extra, len(colA)), dtype=np.int64), [("void", r) for r in range(extra)]
        else:
            if cfg.parent_index(cfg.index(node.parent)) is not None:
                raise InvalidCluster("only chains of length two are supported")
            X, Y, m1 = tables[node.parent]
            if m1 <= 0 and m > 0:
                raise InvalidCluster(f"{node.label} lies over a point of multiplicity {m1}")
            if m <= 0:
                continue
            w0 = config.directions[node.label]
            for block, idx in _child_rows(d, p, m1, m, w0, X, Y, colA, colB):
                yield node.label, block, idx


def build_matrix(Lc: DivisorClass, config: ConfigFp, dtype=np.int64, out: np.ndarray | None = None) -> ConditionMatrix:
    d = Lc.degree
    R, C = nrows(Lc), ncols(d)
    data = out if out is not None else np.zeros((R, C), dtype=dtype)
    prov: list = []
    r = 0
    for label, block, idx in iter_condition_rows(Lc, config):
        data[r : r + block.shape[0]] = block
        r += block.shape[0]
        prov.extend((label,) + tuple(t) for t in idx)
    assert r == R, (r, R)
    return ConditionMatrix(d, config.p, data, prov)


def mulmod(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    """(A @ B) mod p with entries in [0, p)."""
    return modp.to_unsigned(modp.matmul(modp.balanced(A, p), modp.balanced(B, p), p), p)


def rank_mod_p(
    M: ConditionMatrix | np.ndarray,
    p: int | None = None,
    block: int = DEFAULT_BLOCK,
    overwrite: bool = False,
    progress=None,
) -> int:
    """Exact rank over F_p of a condition matrix (or any integer array with p given)."""
    if isinstance(M, ConditionMatrix):
        p = M.p
        M = M.data
    if p is None:
        raise ValueError("prime required")
    return modp.rank(M, p, block=block, overwrite=overwrite, progress=progress)


rank_reference = modp.rank_reference


# ---------------------------------------------------------------- certificates


@dataclass(frozen=True)
class Witness:
    d: int
    mults: list
    clusters: list
    p: int
    seed: int
    rank: int
    dim: int
    status: str
    timestamp: str

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CertifiedDim:
    dim: int
    status: str
    expected: int
    trials: int
    witness: tuple  # (p, seed, rank)
    note: str = ""

    def to_json(self) -> dict:
        return {"dim": self.dim, "status": self.status, "expected": self.expected,
                "trials": self.trials, "witness": {"p": self.witness[0], "seed": self.witness[1],
                                                   "rank": self.witness[2]}, "note": self.note}


def witness_key(Lc: DivisorClass, p: int, seed: int) -> str:
    payload = json.dumps(
        {"d": Lc.degree, "mults": list(Lc.mults), "clusters": Lc.config.to_json(), "p": p, "seed": seed},
        sort_keys=True, separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode()).hexdigest()


class WitnessCache:
    """Content-addressed store of rank witnesses (one JSON file per key)."""

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)

    def path(self, key: str) -> Path:
        return self.root / f"{key}.json"

    def get(self, Lc: DivisorClass, p: int, seed: int) -> Witness | None:
        f = self.path(witness_key(Lc, p, seed))
        if not f.exists():
            return None
        return Witness(**json.loads(f.read_text()))

    def put(self, Lc: DivisorClass, w: Witness) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        f = self.path(witness_key(Lc, w.p, w.seed))
        tmp = f.with_suffix(".tmp")
        tmp.write_text(json.dumps(w.to_json(), sort_keys=True, indent=1))
        tmp.replace(f)
        return f


def _status(dim: int, e: int, C: int, rank: int) -> str:
    if dim == -1 and rank == C:
        return CERTIFIED_EMPTY
    if dim == e:
        return CERTIFIED_NONSPECIAL
    return UPPER_BOUND_ONLY


IN_MEMORY_LIMIT = 3 * 2**30


def trial_rank(
    Lc: DivisorClass,
    p: int,
    seed: int,
    block: int = DEFAULT_BLOCK,
    progress=None,
    scratch: str | os.PathLike | None = None,
) -> int:
    """Rank of the condition matrix at one sampled configuration.

    Matrices above IN_MEMORY_LIMIT bytes live in a temporary np.memmap under
    `scratch` (default: the system temp directory).
    """
    cfgp = sample_config(Lc.config, p, seed)
    R, C = nrows(Lc), ncols(Lc.degree)
    if R == 0:
        return 0
    if R * C * 8 <= IN_MEMORY_LIMIT:
        M = build_matrix(Lc, cfgp, dtype=np.float64)
        return rank_mod_p(M.data, p, block=block, overwrite=True, progress=progress)
    with tempfile.TemporaryDirectory(dir=scratch) as tmp:
        data = np.memmap(Path(tmp) / "matrix.f64", dtype=np.float64, mode="w+", shape=(R, C))
        build_matrix(Lc, cfgp, out=data)
        r = rank_mod_p(data, p, block=block, overwrite=True, progress=progress)
        del data
        return r


def generic_dim(
    Lc: DivisorClass,
    p: int = DEFAULT_PRIME,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    cache: WitnessCache | None = None,
    progress=None,
    block: int = DEFAULT_BLOCK,
    scratch: str | os.PathLike | None = None,
) -> CertifiedDim:
    """Minimum over `trials` sampled configurations of ncols - rank - 1."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    d = Lc.degree
    if p <= d:
        raise FieldTooSmall(f"need p > d, got p={p}, d={d}")
    C = ncols(d)
    e = expected_dim(Lc)
    best = None
    used = 0
    for t in range(trials):
        s = seed + t
        used += 1
        w = cache.get(Lc, p, s) if cache is not None else None
        if w is not None:
            rank = w.rank
        else:
            rank = trial_rank(Lc, p, s, block=block, progress=progress, scratch=scratch)
            dim_t = C - rank - 1
            if cache is not None:
                cache.put(Lc, Witness(d, list(Lc.mults), Lc.config.to_json(), p, s, rank, dim_t,
                                      _status(dim_t, e, C, rank), time.strftime("%Y-%m-%dT%H:%M:%S")))
        dim = C - rank - 1
        if best is None or dim < best[0]:
            best = (dim, s, rank)
        if best[0] <= e:
            break
    dim, s, rank = best
    status = _status(dim, e, C, rank)
    note = "" if status != UPPER_BOUND_ONLY else "computed dimension exceeds the expected one; upper bound only"
    return CertifiedDim(dim, status, e, used, (p, s, rank), note)


def certify_nonspecial(
    Lc: DivisorClass,
    primes: tuple[int, ...] = (DEFAULT_PRIME, SECOND_PRIME),
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    cache: WitnessCache | None = None,
    budget_seconds: float | None = None,
) -> CertifiedDim:
    """Try fresh seeds under each prime; never reports a certificate it did not obtain."""
    start = time.monotonic()
    best: CertifiedDim | None = None
    for i, p in enumerate(primes):
        if budget_seconds is not None and time.monotonic() - start > budget_seconds:
            break
        res = generic_dim(Lc, p=p, trials=trials, seed=seed + 1000 * i, cache=cache)
        if best is None or res.dim < best.dim:
            best = res
        if res.status in (CERTIFIED_NONSPECIAL, CERTIFIED_EMPTY):
            return res
    if best is None:
        return CertifiedDim(-2, INCONCLUSIVE, expected_dim(Lc), 0, (0, 0, 0), "budget exhausted")
    return best
