"""Sweep (d, m) over a ratio window and route each pair to the degeneration that handles it."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from ..lattice import expected_dim, homogeneous
from .lemmas import DIRECT, LEMMAS, choose_a, lemma_check
from .matching import CASES, first_degeneration_dim

NON_SPECIAL = "NON-SPECIAL"
EMPTY = "EMPTY"
OPEN = "OPEN"
FAIL = "FAIL"

LOW = Fraction(174, 55)
FOURTH_HI = Fraction(19, 6)
THIRD_HI = Fraction(16, 5)
SECOND_HI = Fraction(10, 3)
DEFAULT_HI = Fraction(4)


@dataclass
class ScanRow:
    d: int
    m: int
    regime: str
    a: int | None
    verdict: str
    expected: int
    route: str = ""
    lemmas: list[str] = field(default_factory=list)
    detail: str = ""

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.d, self.m)

    @property
    def ok(self) -> bool:
        return self.verdict not in (FAIL, OPEN)

    def to_json(self) -> dict:
        return {"d": self.d, "m": self.m, "ratio": str(self.ratio), "regime": self.regime, "a": self.a,
                "verdict": self.verdict, "expected": self.expected, "route": self.route,
                "lemmas": self.lemmas, "detail": self.detail}


def regime(d: int, m: int) -> str:
    r = Fraction(d, m)
    if r <= 3:
        return "ratio<=3"
    if r >= SECOND_HI:
        return "first"
    if r >= THIRD_HI:
        return "second"
    if r > FOURTH_HI:
        return "third"
    if r >= LOW:
        return "fourth"
    return "uncovered"


def _lemmas(d: int, m: int, a: int, ids: tuple[str, ...]) -> tuple[bool, list[str], str]:
    reps = [lemma_check(x, d, m, a) for x in ids]
    bad = [r.lemma for r in reps if not r.passed]
    return not bad, [f"{r.lemma}:{'ok' if r.passed else 'FAIL'}" for r in reps], ", ".join(bad)


def scan_pair(d: int, m: int) -> ScanRow:
    e = expected_dim(homogeneous(d, m, 10))
    reg = regime(d, m)
    if reg == "ratio<=3":
        return ScanRow(d, m, reg, None, EMPTY if e == -1 else FAIL, e, "cubic through ten points")
    if reg == "uncovered":
        return ScanRow(d, m, reg, None, OPEN, e)
    if reg == "first":
        rep = first_degeneration_dim(d, m)
        good = rep.dim == e and rep.exact
        return ScanRow(d, m, reg, 0, NON_SPECIAL if good else FAIL, e, "matching ledger",
                       detail=f"{rep.verdict} [{', '.join(rep.assumptions)}]")
    if reg == "second":
        c, ev = divmod(d, 2)
        a = 5 * m - 3 * c - ev
        good, names, bad = _lemmas(d, m, a, ("V2", "V2F"))
        return ScanRow(d, m, reg, a, NON_SPECIAL if good else FAIL, e, "lemmas", names, bad)
    if reg == "third":
        good, names, bad = _lemmas(d, m, 0, ("V3F", "T3", "Z3"))
        return ScanRow(d, m, reg, 0, NON_SPECIAL if good else FAIL, e, "lemmas", names, bad)
    choice = choose_a(d, m)
    if choice.route == LEMMAS:
        return ScanRow(d, m, reg, choice.a, NON_SPECIAL, e, LEMMAS,
                       [f"{r.lemma}:ok" for r in choice.reports], choice.justification)
    if choice.route == DIRECT:
        verdict = EMPTY if choice.certificate.dim == -1 else NON_SPECIAL
        return ScanRow(d, m, reg, None, verdict, e, DIRECT, detail=choice.justification)
    if (d, m) in CASES:
        rep = CASES[(d, m)]()
        verdict = EMPTY if rep.dim < 0 else (NON_SPECIAL if rep.dim == e else FAIL)
        return ScanRow(d, m, reg, None, verdict, e, "case script", detail=rep.verdict)
    return ScanRow(d, m, reg, choice.a, FAIL, e, "none", [f"{r.lemma}:{'ok' if r.passed else 'FAIL'}"
                                                        for r in choice.reports], choice.justification)


def pairs(ratio_lo: Fraction, ratio_hi: Fraction, m_max: int, coprime: bool = False) -> list[tuple[int, int]]:
    out = []
    for m in range(1, m_max + 1):
        d = -(-ratio_lo.numerator * m // ratio_lo.denominator)
        while Fraction(d, m) <= ratio_hi:
            if not coprime or gcd(d, m) == 1:
                out.append((d, m))
            d += 1
    return sorted(out, key=lambda p: (Fraction(p[0], p[1]), p[1]))


def scan(ratio_lo, ratio_hi=None, m_max: int = 20, coprime: bool = False, jobs: int = 1) -> list[ScanRow]:
    """One row per (d, m) with ratio_lo <= d/m <= ratio_hi and m <= m_max, ordered by ratio then m.

    An open upper end is capped at d/m = 4.
    """
    lo = Fraction(ratio_lo)
    hi = DEFAULT_HI if ratio_hi is None else Fraction(ratio_hi)
    if lo <= 0 or hi < lo or m_max < 1:
        raise ValueError(f"bad scan bounds: [{lo}, {hi}], m_max={m_max}")
    work = pairs(lo, hi, m_max, coprime)
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(scan_pair, *zip(*work), chunksize=4))
    else:
        rows = [scan_pair(d, m) for d, m in work]
    return rows
