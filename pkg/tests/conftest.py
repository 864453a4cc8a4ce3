import random

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def naive_rank(rows, p):
    """Row reduction over F_p on plain Python ints, kept separate from the package's eliminator."""
    rows = [[x % p for x in r] for r in rows]
    rank, ncols = 0, len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][c], -1, p)
        rows[rank] = [x * inv % p for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def falling(n, k):
    out = 1
    for i in range(k):
        out *= n - i
    return out


def interpolation_rows(d, mults, points, p):
    """Vanishing of all partials of order < m at each point, monomials x^i y^j with i + j <= d."""
    mons = [(i, j) for t in range(d + 1) for i in range(t + 1) for j in [t - i]]
    rows = []
    for (x, y), m in zip(points, mults):
        for s in range(m):
            for u in range(s + 1):
                v = s - u
                rows.append([falling(i, u) * falling(j, v) * pow(x, max(i - u, 0), p) * pow(y, max(j - v, 0), p)
                             if i >= u and j >= v else 0 for i, j in mons])
    return rows, len(mons)


@pytest.fixture
def brute_dim():
    """Projective dimension of L(d; mults) at random points of F_p, computed without the package."""
    def run(d, mults, p=1_000_003, seed=0):
        rng = random.Random(seed)
        pts = [(rng.randrange(p), rng.randrange(p)) for _ in mults]
        rows, n = interpolation_rows(d, mults, pts, p)
        return n - (naive_rank(rows, p) if rows else 0) - 1
    return run


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def report(request):
    """Collects one outcome line per acceptance check for the terminal summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE, [])
    return lines.append


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
