"""Per-component non-speciality checks, the choice of twisting parameter, and window scans.

Every check evaluates its hypotheses as exact integer inequalities, then replays the
quadratic-transformation chain that reduces the component's bundle and compares each
row with the closed form written in terms of (d, m, a).  Rows are compared as
(degree, multiset of nonzero multiplicities) because the stated forms suppress which
point is infinitely near which.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from ..cremona import quadratic_transform, reduce_to_standard, shgh_dim
from ..lattice import (
    Configuration,
    DivisorClass,
    PointNode,
    canonical_class,
    exceptional,
    format_system,
    homogeneous,
    pair,
    virtual_dim,
)
from .. import oracle
from .fiber import FiberError, Fiber, Params, _fourth, _second, _third

ESSENTIAL_GENERALITY = "ESSENTIAL-GENERALITY"
GENERIC_GLUING = "GENERIC-GLUING"
STRONG_ANTICANONICAL = "STRONG-ANTICANONICAL"

CATALOG = ("V2", "V2F", "V3", "Z3", "T3", "V3F", "Z3F", "V4a", "Z4", "T4", "V4F", "Z4F")
STAGE4 = ("V4a", "Z4", "T4", "V4F", "Z4F")


class CatalogError(KeyError):
    pass


# ---------------------------------------------------------------- lattices


def _chain(label: str) -> tuple[PointNode, PointNode]:
    return PointNode(label), PointNode(label + "'", label)


def v_config(stage: int) -> Configuration:
    nodes = [PointNode(f"p{i}") for i in range(1, 5)]
    nodes += [*_chain("q1"), *_chain("q2")]
    if stage >= 4:
        for j in range(1, 5):
            nodes += [*_chain(f"s{j}"), *_chain(f"t{j}")]
    return Configuration(tuple(nodes))


def z_config(stage: int) -> Configuration:
    nodes = [PointNode("e0")] + [PointNode(f"p{i}") for i in range(5, 11)]
    if stage >= 3:
        nodes += [*_chain("x1"), *_chain("x2")]
    return Configuration(tuple(nodes))


def t_config() -> Configuration:
    return Configuration((*_chain("y1"), *_chain("y2")))


def _cls(cfg: Configuration, degree: int, entries: Iterable) -> DivisorClass:
    mults: list[int] = []
    for e in entries:
        mults.extend(e if isinstance(e, tuple) else (e,))
    return DivisorClass(degree, tuple(mults), cfg)


def shape(cls: DivisorClass) -> tuple[int, tuple[int, ...]]:
    """Degree and the sorted nonzero multiplicities: the form the stated rows use."""
    return cls.degree, tuple(sorted((m for m in cls.mults if m), reverse=True))


def _shape(degree: int, mults: Iterable[int]) -> tuple[int, tuple[int, ...]]:
    return degree, tuple(sorted((m for m in mults if m), reverse=True))


def _fmt_shape(s: tuple[int, tuple[int, ...]]) -> str:
    return f"L({s[0]}; {', '.join(map(str, s[1]))})" if s[1] else f"L({s[0]})"


# ---------------------------------------------------------------- report types


@dataclass(frozen=True)
class Check:
    text: str
    holds: bool
    detail: str = ""

    def render(self) -> str:
        mark = "ok  " if self.holds else "FAIL"
        return f"  [{mark}] {self.text}" + (f"  ({self.detail})" if self.detail else "")


@dataclass(frozen=True)
class Row:
    """One step of a replayed reduction."""

    action: str
    got: DivisorClass
    expected: tuple[int, tuple[int, ...]] | None = None

    @property
    def ok(self) -> bool:
        return self.expected is None or shape(self.got) == self.expected

    def render(self) -> str:
        s = f"    {self.action:<22} {format_system(self.got)}"
        if self.expected is not None and not self.ok:
            s += f"   expected {_fmt_shape(self.expected)}"
        return s


@dataclass
class HypothesisReport:
    lemma: str
    params: Params
    hypotheses: list[Check]
    bundle: DivisorClass | None = None
    rows: list[Row] = field(default_factory=list)
    conclusions: list[Check] = field(default_factory=list)
    assumptions: tuple[str, ...] = ()
    flags: list[str] = field(default_factory=list)
    errata: list[str] = field(default_factory=list)

    @property
    def hypotheses_met(self) -> bool:
        return all(h.holds for h in self.hypotheses)

    @property
    def replay_ok(self) -> bool:
        return all(r.ok for r in self.rows)

    @property
    def conclusion_ok(self) -> bool:
        return all(c.holds for c in self.conclusions)

    @property
    def passed(self) -> bool:
        return self.hypotheses_met and self.replay_ok and self.conclusion_ok

    def render(self) -> str:
        p = self.params
        head = f"{self.lemma} at (d,m,a)=({p.d},{p.m},{p.a}): " + ("PASS" if self.passed else "FAIL")
        lines = [head, " hypotheses:"] + [h.render() for h in self.hypotheses]
        if self.bundle is not None:
            lines.append(f" bundle: L({format_system(self.bundle)})")
        if self.rows:
            lines.append(" reduction:")
            lines += [r.render() for r in self.rows]
        if self.conclusions:
            lines.append(" conclusion:")
            lines += [c.render() for c in self.conclusions]
        if self.assumptions:
            lines.append(" assumptions: " + ", ".join(self.assumptions))
        lines += [f" flag: {f}" for f in self.flags]
        lines += [f" erratum: {e}" for e in self.errata]
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "lemma": self.lemma,
            "params": self.params.to_json(),
            "passed": self.passed,
            "hypotheses": [{"text": h.text, "holds": h.holds} for h in self.hypotheses],
            "bundle": None if self.bundle is None else format_system(self.bundle),
            "rows": [{"action": r.action, "got": format_system(r.got), "ok": r.ok} for r in self.rows],
            "conclusions": [{"text": c.text, "holds": c.holds, "detail": c.detail} for c in self.conclusions],
            "assumptions": list(self.assumptions),
            "flags": list(self.flags),
            "errata": list(self.errata),
        }


# ---------------------------------------------------------------- helpers


def _replay(start: DivisorClass, steps: Sequence[tuple[tuple[str, str, str], tuple | None]],
            first: tuple | None = None) -> list[Row]:
    rows = [Row("start", start, first)]
    cur = start
    for triple, expected in steps:
        cur = quadratic_transform(cur, triple)
        rows.append(Row("transform " + ",".join(triple), cur, expected))
    return rows


def _clamp(cls: DivisorClass) -> DivisorClass:
    """Drop negative multiplicities: those exceptional curves split off without cost."""
    return cls.replace(cls.degree, tuple(max(0, m) for m in cls.mults))


def _is_standard(cls: DivisorClass) -> bool:
    c = _clamp(cls)
    top = sorted(c.mults, reverse=True)[:3]
    return c.degree >= 0 and sum(top) <= c.degree


def _anti(cls: DivisorClass) -> int:
    c = _clamp(cls)
    return 3 * c.degree - sum(c.mults)


def _nonspecial(text: str, cls: DivisorClass, curves: Sequence[tuple[str, DivisorClass]] = ()) -> Check:
    """dim from reduction equals max(-1, v), and no listed rational curve meets the class in degree <= -2."""
    v = virtual_dim(cls)
    r = shgh_dim(cls)
    bad = [(n, pair(cls, c)) for n, c in curves if pair(cls, c) <= -2]
    ok = v >= -1 and r.dim == max(-1, v) and not bad
    detail = f"v={v}, reduced dim={r.dim} [{r.status}]"
    if bad:
        detail += ", forced h1 from " + ", ".join(f"{n}.L={k}" for n, k in bad)
    return Check(text, ok, detail)


def _ge(text: str, lhs: int, rhs: int) -> Check:
    return Check(text, lhs >= rhs, f"{lhs} >= {rhs}")


def _eq(text: str, lhs, rhs) -> Check:
    return Check(text, lhs == rhs, f"{lhs} == {rhs}")


def _eq_form(text: str, got: tuple, expected: tuple) -> Check:
    """Shape equality, except that any two classes of negative degree count as the empty system."""
    if expected[0] < 0:
        return Check(text, got[0] < 0, f"both empty: degrees {got[0]} and {expected[0]}")
    return _eq(text, got, expected)


def _try(builder: Callable[[int, int, int], Fiber], p: Params) -> Fiber | None:
    try:
        return builder(p.d, p.m, p.a)
    except FiberError:
        return None


def _z2_steps(al: int, a: int, extra: Sequence[int] = ()) -> list:
    """The three transforms at e0 and pairs of the six points; rows in closed form."""
    ex = list(extra)
    return [
        (("e0", "p5", "p6"), _shape(8 * al - 5 * a, [4 * al - 2 * a] + [al - a] * 2 + [3 * al - 2 * a] * 4 + ex)),
        (("e0", "p7", "p8"), _shape(6 * al - 4 * a, [2 * al - a] + [al - a] * 4 + [3 * al - 2 * a] * 2 + ex)),
        (("e0", "p9", "p10"), _shape(4 * al - 3 * a, [al - a] * 6 + ex)),
    ]


def _window_checks(p: Params, stage: int) -> list[Check]:
    d, m = p.d, p.m
    if stage == 2:
        return [_ge("16/5 <= d/m", 5 * d, 16 * m), Check("d/m < 10/3", 3 * d < 10 * m, f"{3 * d} < {10 * m}")]
    if stage == 3:
        return [_ge("19/6 <= d/m", 6 * d, 19 * m), Check("d/m < 16/5", 5 * d < 16 * m, f"{5 * d} < {16 * m}")]
    return [_ge("174/55 <= d/m", 55 * d, 174 * m), _ge("d/m <= 19/6", 19 * m, 6 * d)]


def h_for(ell: int, alpha: int) -> int | None:
    """The case table fixing h in a = alpha - 2 ell - h; None when no case applies."""
    if ell >= 4 or (ell <= 3 and alpha >= 7 * ell + 7):
        return 1
    if (ell == 3 and alpha == 27) or (ell <= 2 and 7 * ell + 5 <= alpha <= 7 * ell + 6):
        return 2
    if 1 <= ell <= 2 and alpha == 7 * ell + 4:
        return 3
    return None


# ---------------------------------------------------------------- second degeneration


def _v2_bundle(p: Params) -> DivisorClass:
    m, a, b, e = p.m, p.a, p.b, p.e
    return _cls(v_config(2), 2 * m + a, [m] * 4 + [(b, b - e)] * 2)


def _v2_curves(cfg: Configuration) -> list[tuple[str, DivisorClass, str]]:
    """Low-degree curves whose pairings with the bundle are tabulated in closed form."""
    out = [("E", _cls(cfg, 1, [0] * 4 + [(1, 1)] * 2), "E")]
    for i, lab in ((1, "q1"), (2, "q2")):
        out.append((f"G{i}", DivisorClass.of(cfg, 0, {lab: -1, lab + "'": 1}), "G"))
    for i in range(4):
        for j in range(i + 1, 4):
            mults = [1 if k in (i, j) else 0 for k in range(4)]
            out.append((f"line p{i + 1}p{j + 1}", _cls(cfg, 1, mults + [(0, 0)] * 2), "line"))
    out.append(("conic q1", _cls(cfg, 2, [1] * 4 + [(1, 0), (0, 0)]), "conic"))
    out.append(("conic q2", _cls(cfg, 2, [1] * 4 + [(0, 0), (1, 0)]), "conic"))
    for i in range(4):
        mults = [2 if k == i else 1 for k in range(4)]
        out.append((f"cubic p{i + 1} q1", _cls(cfg, 3, mults + [(1, 1), (1, 0)]), "cubic"))
        out.append((f"cubic p{i + 1} q2", _cls(cfg, 3, mults + [(1, 0), (1, 1)]), "cubic"))
    for i in range(4):
        mults = [1 if k == i else 2 for k in range(4)]
        out.append((f"quartic p{i + 1}", _cls(cfg, 4, mults + [(1, 1)] * 2), "quartic"))
    return out


def _v2_table(p: Params) -> dict[str, int]:
    d, m, a, c, e = p.d, p.m, p.a, p.c, p.e
    return {
        "E": 6 * d - 18 * m - 3 * a,
        "G": e,
        "line": a,
        "conic": a - (5 * m - 3 * c - e),
        "cubic": (9 * d - 28 * m - e) // 2,
        "quartic": 6 * d - 19 * m,
    }


def check_v2(p: Params) -> HypothesisReport:
    d, m, a, c, e = p.d, p.m, p.a, p.c, p.e
    hyps = _window_checks(p, 2) + [
        _ge("a >= b/2, i.e. a >= 5m-3c-e", a, 5 * m - 3 * c - e),
        _ge("a <= alpha", d - 3 * m, a),
    ]
    L = _v2_bundle(p)
    rep = HypothesisReport("V2", p, hyps, L, assumptions=(STRONG_ANTICANONICAL,))
    table = _v2_table(p)
    for name, C, kind in _v2_curves(L.config):
        k = pair(L, C)
        rep.conclusions.append(Check(f"L.{name} = {kind} formula, >= 0", k == table[kind] and k >= 0,
                                     f"{k} vs {table[kind]}"))
    K = canonical_class(L.config)
    rep.conclusions.append(_eq("L.K = 18m-6d+a", pair(L, K), 18 * m - 6 * d + a))
    rep.conclusions.append(_ge("L.K <= -m", -m, pair(L, K)))
    a0 = 5 * m - 3 * c - e
    left = _v2_bundle(Params(d, m, a0))
    two_v = (5 * m - 3 * c) * (45 * c - 71 * m) + (15 * c - 23 * m) + 6 * e * (31 * m - 19 * c - 3)
    rep.conclusions.append(_eq("2v at a = b/2 matches the closed form", 2 * virtual_dim(left), two_v))
    rep.conclusions.append(_nonspecial("non-empty and non-special", L))
    rep.conclusions.append(_ge("v >= 0", virtual_dim(L), 0))
    return rep


def check_v2f(p: Params) -> HypothesisReport:
    d, m, a, c, e = p.d, p.m, p.a, p.c, p.e
    hyps = _window_checks(p, 2) + [
        _ge("a >= b/2, i.e. a >= 5m-3c-e", a, 5 * m - 3 * c - e),
        _ge("a <= alpha", d - 3 * m, a),
    ]
    L = _v2_bundle(p)
    M = L - exceptional(L.config, "q1'") - exceptional(L.config, "q2'")
    rep = HypothesisReport("V2F", p, hyps, M, assumptions=(STRONG_ANTICANONICAL,))
    fib = _try(_second, p)
    if fib is not None:
        V = fib.component("V")
        via_fiber = V.bundle - V.curve("F1") - V.curve("F2")
        rep.conclusions.append(_eq("bundle minus both F sheets (fiber route)", format_system(via_fiber),
                                   format_system(M)))
    a0 = 5 * m - 3 * c - e
    L0 = _v2_bundle(Params(d, m, a0))
    M0 = L0 - exceptional(L0.config, "q1'") - exceptional(L0.config, "q2'")
    two_v = (5 * m - 3 * c) * (45 * c - 71 * m) + (39 * c - 63 * m) + 6 * e * (31 * m - 19 * c - 1) - 4
    rep.conclusions.append(_eq("2v at a = b/2 matches the closed form", 2 * virtual_dim(M0), two_v))
    rep.conclusions.append(Check("L.K < 0", pair(M, canonical_class(M.config)) < 0))
    worst = {}
    for name, C, kind in _v2_curves(M.config):
        worst[kind] = min(worst.get(kind, 0), pair(M, C))
    neg = {k: v for k, v in worst.items() if v < 0}
    if set(neg) - {"conic"}:
        rep.errata.append(f"the argument lets only conics meet the bundle negatively; here {sorted(set(neg) - {'conic'})} "
                          f"also meet it in -1, which is harmless for smooth rational curves (chi of the restriction is 0)")
    rep.conclusions.append(Check("curves meeting the bundle negatively do so only in -1",
                                 all(v >= -1 for v in neg.values()), str(neg)))
    rep.conclusions.append(_nonspecial("non-special", M))
    return rep


# ---------------------------------------------------------------- third degeneration


def _v3_rows(start: DivisorClass, a: int, mu: int) -> list[Row]:
    """The three transforms that bring the Ṽ3 form to L(2a+mu; a^3, mu)."""
    return _replay(start, [
        (("p1", "p2", "p3"), _shape(6 * a + mu, [a] * 3 + [4 * a + mu] + [2 * a] * 4)),
        (("p4", "q1", "q2"), _shape(4 * a + mu, [a] * 3 + [2 * a + mu] + [2 * a] * 2)),
        (("p4", "q1'", "q2'"), _shape(2 * a + mu, [a] * 3 + [mu])),
    ], _shape(9 * a + 2 * mu, [4 * a + mu] * 4 + [2 * a] * 4))


def _v3_bundle(p: Params) -> DivisorClass:
    a, mu = p.a, p.mu
    return _cls(v_config(3), 9 * a + 2 * mu, [4 * a + mu] * 4 + [(2 * a, 2 * a)] * 2)


def check_v3(p: Params) -> HypothesisReport:
    d, m, a, mu = p.d, p.m, p.a, p.mu
    hyps = [_ge("d/m >= 19/6", 6 * d, 19 * m), _ge("a >= 0", a, 0)]
    L = _v3_bundle(p)
    rep = HypothesisReport("V3", p, hyps, L)
    rep.rows = _v3_rows(L, a, mu)
    cur = rep.rows[-1].got
    if a > mu:
        cur = quadratic_transform(cur, ("p1", "p2", "p3"))
        rep.rows.append(Row("transform p1,p2,p3", cur, _shape(a + 2 * mu, [mu] * 4)))
        rep.errata.append(f"last row stated as L(3a; mu^4); the transform gives L(a+2mu; mu^4) = "
                          f"L({a + 2 * mu}; {mu}^4)")
    rep.conclusions.append(Check("final form standard", _is_standard(cur), format_system(cur)))
    t = _anti(cur)
    rep.conclusions.append(Check("final form excellent (-K.L > 0)", t > 0 or (a == 0 and mu == 0), f"-K.L={t}"))
    rep.conclusions.append(_nonspecial("non-empty and non-special", L))
    return rep


def _z3_bundle(p: Params) -> DivisorClass:
    al, a, x, e = p.alpha, p.a, p.b - 2 * p.a, p.e
    return _cls(z_config(3), 10 * al - 6 * a, [6 * al - 3 * a] + [3 * al - 2 * a] * 6 + [(x, x - e)] * 2)


def check_z3(p: Params) -> HypothesisReport:
    d, m, a, c, e, al, mu, b = p.d, p.m, p.a, p.c, p.e, p.alpha, p.mu, p.b
    hyps = _window_checks(p, 3) + [_ge("a >= 0", a, 0), _ge("a <= alpha+1", al + 1, a)]
    L = _z3_bundle(p)
    rep = HypothesisReport("Z3", p, hyps, L, assumptions=(STRONG_ANTICANONICAL,))
    x = b - 2 * a
    start = _shape(10 * al - 6 * a, [6 * al - 3 * a] + [3 * al - 2 * a] * 6 + [x, x - e] * 2)
    rep.rows = _replay(L, _z2_steps(al, a, [x, x - e] * 2), start)
    rep.conclusions.append(_eq("L.K = -2mu-a", pair(L, canonical_class(L.config)), -2 * mu - a))
    rep.conclusions.append(Check("compound points carry the largest multiplicities", x > al - a))
    cur = rep.rows[-1].got
    if 17 * d >= 54 * m:
        rep.conclusions.append(Check("standard when d/m >= 54/17", _is_standard(cur), format_system(cur)))
    else:
        cur = quadratic_transform(cur, ("x1", "x2", "x1'"))
        k = 7 * d - 22 * m - a
        rep.rows.append(Row("transform x1,x2,x1'", cur, _shape(
            25 * c + 12 * e - 39 * m - 3 * a, [al - a] * 6 + [k, k - e, k, 5 * m - 3 * c - a - 2 * e])))
        rep.conclusions.append(Check("standard after one more transform", _is_standard(cur), format_system(cur)))
    t = _anti(cur)
    if 6 * d == 19 * m and a == 0:
        rep.flags.append("boundary d/m = 19/6, a = 0: only almost excellent; restriction to E is a "
                         "non-trivial degree-0 bundle")
        rep.conclusions.append(_eq("almost excellent (-K.L = 0)", t, 0))
        rep.assumptions += (ESSENTIAL_GENERALITY,)
    else:
        rep.conclusions.append(Check("excellent (-K.L > 0)", t > 0, f"-K.L={t}"))
    rep.conclusions.append(_nonspecial("non-empty and non-special", L))
    return rep


def _t_bundle(p: Params) -> DivisorClass:
    x, e = p.b - 2 * p.a, p.e
    return _cls(t_config(), 2 * x - e, [(x, x - e)] * 2)


def check_t3(p: Params) -> HypothesisReport:
    x, e = p.b - 2 * p.a, p.e
    hyps = [_ge("b-2a-e >= 0", x - e, 0)]
    L = _t_bundle(p)
    rep = HypothesisReport("T3", p, hyps, L)
    rep.conclusions.append(_eq("v = b-2a-e (conics in a pencil, plus a line when e=1)", virtual_dim(L), x - e))
    rep.conclusions.append(_nonspecial("non-empty and non-special", L))
    return rep


def check_v3f(p: Params) -> HypothesisReport:
    d, m, a, mu = p.d, p.m, p.a, p.mu
    hyps = [Check("19/6 < d/m", 6 * d > 19 * m, f"{6 * d} > {19 * m}"),
            Check("d/m < 16/5", 5 * d < 16 * m, f"{5 * d} < {16 * m}"), _ge("a >= 0", a, 0)]
    L = _v3_bundle(p)
    cfg = L.config
    M = L - exceptional(cfg, "q1'") - exceptional(cfg, "q2'")
    rep = HypothesisReport("V3F", p, hyps, M)
    rep.conclusions.append(_eq("corresponds to L(9a+2mu; (4a+mu)^4, [2a+1,2a]^2)", shape(M),
                               _shape(9 * a + 2 * mu, [4 * a + mu] * 4 + [2 * a + 1, 2 * a] * 2)))
    G = [(f"G{i}", _cls(cfg, 2, [1] * 4 + ([(0, 1), (0, 0)] if i == 1 else [(0, 0), (0, 1)]))) for i in (1, 2)]
    fib = _try(_third, p)
    if fib is not None:
        V = fib.component("V")
        rep.conclusions.append(_eq("bundle minus both F sheets (fiber route)",
                                   format_system(V.bundle - V.curve("F1") - V.curve("F2")), format_system(M)))
        G = [(n, V.curve(n)) for n in ("G1", "G2")]
    if a == 0:
        rep.conclusions.append(_nonspecial("a = 0: L(2mu; mu^4, 1^2) non-special", M))
        return rep
    R = M
    for n, C in G:
        k = pair(R, C)
        rep.conclusions.append(_eq(f"{n} splits once", k, -1))
        R = R - C
    rep.rows = _v3_rows(R, a, mu - 2)
    cur = rep.rows[-1].got
    if mu > 1 and a > mu - 2:
        cur = quadratic_transform(cur, ("p1", "p2", "p3"))
        rep.rows.append(Row("transform p1,p2,p3", cur, _shape(a + 2 * mu - 4, [mu - 2] * 4)))
        rep.errata.append("last row stated as L(3a; (mu-2)^4); the transform gives L(a+2mu-4; (mu-2)^4)")
    rep.conclusions.append(_nonspecial("residual non-special", cur))
    rep.conclusions.append(_nonspecial("non-special", M, G))
    return rep


def check_z3f(p: Params) -> HypothesisReport:
    d, m, a, c, e, al, mu, b = p.d, p.m, p.a, p.c, p.e, p.alpha, p.mu, p.b
    hyps = [Check("19/6 < d/m", 6 * d > 19 * m, f"{6 * d} > {19 * m}"),
            Check("d/m < 16/5", 5 * d < 16 * m, f"{5 * d} < {16 * m}"),
            _ge("a >= 0", a, 0), _ge("a <= alpha+1", al + 1, a)]
    rep = HypothesisReport("Z3F", p, hyps)
    fib = _try(_third, p)
    if fib is None:
        rep.conclusions.append(Check("third degeneration constructible (b > 2a)", False))
        return rep
    Z = fib.component("Z")
    M = Z.bundle - Z.curve("E") - Z.curve("A1") - Z.curve("A2")
    rep.bundle = M
    x = b - 2 * a
    extra = [x - e, x - 1] * 2
    rep.rows = _replay(M, _z2_steps(al, a + 1, extra), None)
    cur = rep.rows[-1].got
    rep.conclusions.append(_eq("reduces to L(4alpha-3a-3; (alpha-a-1)^6, [b-2a-e, b-2a-1]^2)", shape(cur),
                               _shape(4 * al - 3 * a - 3, [al - a - 1] * 6 + extra)))
    lk = pair(M, canonical_class(M.config))
    rep.conclusions.append(_eq("L.K = 1-2mu-a", lk, 1 - 2 * mu - a))
    if lk != 1 - 2 * mu - 5 * a:
        rep.errata.append(f"L.K stated as 1-2mu-5a = {1 - 2 * mu - 5 * a}; the class gives 1-2mu-a = {lk}")
    if 17 * c + 9 * e - 27 * m >= 2:
        rep.conclusions.append(Check("standard", _is_standard(cur), format_system(cur)))
    else:
        cur = quadratic_transform(cur, ("x1'", "x2'", "x1"))
        y = 14 * c + 7 * e - 22 * m - a - 2
        rep.rows.append(Row("transform x1',x2',x1", cur,
                            _shape(25 * c + 13 * e - 39 * m - 3 * a - 5,
                                   [al - a - 1] * 6 + [y, y, y - 1 + e, 5 * m - 3 * c - a - e - 1])))
        rep.conclusions.append(Check("standard after one more transform", _is_standard(cur), format_system(cur)))
        rep.errata.append("row after the extra transform: degree stated as 25c+13e-39m-3a, the transform gives "
                          "25c+13e-39m-3a-5; one multiplicity is stated as 14+7e-22m-a-2 for 14c+7e-22m-a-2 and "
                          "another drops its -a")
    rep.conclusions.append(Check("excellent (-K.L > 0)", _anti(cur) > 0, f"-K.L={_anti(cur)}"))
    rep.conclusions.append(_nonspecial("non-special", M, [(n, Z.curve(n)) for n in ("B1", "B2")]))
    return rep


# ---------------------------------------------------------------- fourth degeneration


def _v4_bundle(p: Params) -> DivisorClass:
    a, l, r, s = p.a, p.ell, p.r, p.s
    x = a - 2 * l
    return _cls(v_config(4), 9 * x, [4 * x] * 4 + [(2 * x, 2 * x)] * 2 + [(r, r - s)] * 8)


def _v4_rows(start: DivisorClass, x: int, tail: Sequence[int]) -> list[Row]:
    t = list(tail)
    return _replay(start, [
        (("p1", "p2", "p3"), _shape(6 * x, [x] * 3 + [4 * x] + [2 * x] * 4 + t)),
        (("p4", "q1", "q2"), _shape(4 * x, [x] * 3 + [2 * x] * 3 + t)),
        (("p4", "q1'", "q2'"), _shape(2 * x, [x] * 3 + t)),
        (("p1", "p2", "p3"), _shape(x, t)),
    ], _shape(9 * x, [4 * x] * 4 + [2 * x] * 4 + t))


def _gamma_checks(rep: HypothesisReport, p: Params, shift: int, boundary_ok: bool) -> None:
    """Restriction to the genus-3 curve: degree above 4, or exactly 4 under the generality lemma."""
    l, a = p.ell, p.a
    deg = 4 * (a - 4 * l - shift)
    if l <= 1 and shift > 0:
        rep.conclusions.append(Check("l <= 1: residual is a plane system through 8 points of small order", True))
        return
    if deg > 4:
        rep.conclusions.append(Check("restriction degree to Gamma > 4", True, f"{deg}"))
    elif deg == 4 and boundary_ok:
        rep.conclusions.append(Check("restriction degree 4 on Gamma is not bicanonical", True, "generality"))
        rep.assumptions += (ESSENTIAL_GENERALITY,)
    elif l == 0:
        rep.conclusions.append(Check("l = 0: no compound points", True))
    else:
        rep.conclusions.append(Check("restriction degree to Gamma > 4", False, f"{deg}"))


def check_v4a(p: Params) -> HypothesisReport:
    a, l, r, s = p.a, p.ell, p.r, p.s
    strict = a > 4 * l + 1
    hyps = _window_checks(p, 4) + [Check("a > 4l+1, or l <= 2 and a >= 4l+1",
                                         strict or (l <= 2 and a >= 4 * l + 1), f"a={a}, l={l}")]
    L = _v4_bundle(p)
    rep = HypothesisReport("V4a", p, hyps, L)
    x = a - 2 * l
    rep.rows = _v4_rows(L, x, [r, r - s] * 8)
    _gamma_checks(rep, p, 0, a == 4 * l + 1 and 1 <= l <= 2)
    if r >= 2:
        base = _cls(v_config(4), a - 4 * l - 2 * s + 4, [0] * 8 + [(1, 1 - s)] * 8)
        rep.conclusions.append(_ge("base system L(a-4l-2s+4; [1,1-s]^8) non-empty", virtual_dim(base), 0))
        rep.conclusions.append(_nonspecial("base system non-special", base))
    rep.conclusions.append(_nonspecial("non-empty and non-special", L))
    return rep


def _z4_rows(L: DivisorClass, p: Params, dx: int = 0) -> list[Row]:
    """Z2 chain then the four transforms at the compound points; dx=1 is the A-twisted variant."""
    al, a, b, e = p.alpha, p.a, p.b, p.e
    x = b - 2 * a
    if dx == 0:
        pts = [x, x - e] * 2
        first = ("x1", "x2", "x1'")
        late = "x2'"
        u, w, lead = 4 * al + a - 2 * b + e, 4 * al + a - 2 * b, b - 2 * a - e
        d1 = 8 * al - 3 * b + e
        k2, k3, k4 = 6 * al + 2 * a - 3 * b + e, 12 * al - 7 * b + 6 * a + 3 * e, 18 * al - 11 * b + 10 * a + 5 * e
        q = 7 * al + 3 * a - 4 * b + 2 * e
        degs = (14 * al - 7 * b + 4 * a + 3 * e, 20 * al - 11 * b + 8 * a + 5 * e, 26 * al - 15 * b + 12 * a + 7 * e)
    else:
        pts = [x, x - e + 1] * 2
        first = ("x1'", "x2'", "x1")
        late = "x2"
        u, w, lead = 4 * al + a - 2 * b - 1 + e, 4 * al + a - 2 * b - 2 + 2 * e, b - 2 * a
        d1 = 8 * al - 3 * b + 2 * e - 2
        k2, k3 = 6 * al + 2 * a - 3 * b + 2 * e - 2, 12 * al + 6 * a - 7 * b + 4 * e - 4
        k4 = 18 * al - 11 * b + 10 * a + 6 * e - 6
        q = 7 * al + 3 * a - 4 * b + 2 * e - 2
        degs = (14 * al - 7 * b + 4 * a + 4 * e - 4, 20 * al - 11 * b + 8 * a + 6 * e - 6,
                26 * al - 15 * b + 12 * a + 8 * e - 8)
    start = _shape(10 * al - 6 * a, [6 * al - 3 * a] + [3 * al - 2 * a] * 6 + pts)
    steps = _z2_steps(al, a, pts) + [
        (first, _shape(d1, [al - a] * 6 + [lead] + [u] * 2 + [w])),
        ((late, "p5", "p6"), _shape(degs[0], [al - a] * 4 + [k2] + [q] * 2 + [u] * 2 + [w])),
        (("p7", "p8", late), _shape(degs[1], [al - a] * 2 + [k3] + [q] * 4 + [u] * 2 + [w])),
        (("p9", "p10", late), _shape(degs[2], [q] * 6 + [u] * 2 + [w] + [k4])),
    ]
    return _replay(L, steps, start)


def check_z4(p: Params) -> HypothesisReport:
    d, m, a, c, e, al, l, b = p.d, p.m, p.a, p.c, p.e, p.alpha, p.ell, p.b
    hyps = _window_checks(p, 4) + [Check("4l < a", 4 * l < a, f"{4 * l} < {a}"), _ge("a <= alpha-2l", al - 2 * l, a)]
    L = _z3_bundle(p)
    rep = HypothesisReport("Z4", p, hyps, L, assumptions=(STRONG_ANTICANONICAL,))
    rep.rows = _z4_rows(L, p)
    rep.conclusions.append(_eq("L.K = 2l-a", pair(L, canonical_class(L.config)), 2 * l - a))
    rep.conclusions.append(Check("L.K < 0", 2 * l - a < 0))
    ids = [
        ("26alpha-15b+12a+7e = c-m-3a-8l", 26 * al - 15 * b + 12 * a + 7 * e, c - m - 3 * a - 8 * l),
        ("18alpha-11b+10a+5e = c-a-m-2alpha-6l", 18 * al - 11 * b + 10 * a + 5 * e, c - a - m - 2 * al - 6 * l),
        ("7alpha+3a-4b+2e = alpha-2l-a", 7 * al + 3 * a - 4 * b + 2 * e, al - 2 * l - a),
        ("4alpha+a-2b+e = alpha-l-a", 4 * al + a - 2 * b + e, al - l - a),
    ]
    rep.conclusions += [_eq(t, x, y) for t, x, y in ids]
    cur = rep.rows[-1].got
    rep.conclusions.append(_ge("last multiplicity non-negative", 18 * al - 11 * b + 10 * a + 5 * e, 0))
    rep.conclusions.append(Check("final form standard", _is_standard(cur), format_system(cur)))
    rep.conclusions.append(Check("final form excellent", _anti(cur) > 0, f"-K.L={_anti(cur)}"))
    rep.conclusions.append(_nonspecial("non-empty and non-special", L))
    return rep


def check_t4(p: Params) -> HypothesisReport:
    d, m, a, al, l = p.d, p.m, p.a, p.alpha, p.ell
    hyps = [_ge("d/m <= 19/6", 19 * m, 6 * d), _ge("a <= alpha-2l", al - 2 * l, a)]
    L = _t_bundle(p)
    rep = HypothesisReport("T4", p, hyps, L)
    rep.conclusions.append(_ge("2a <= 10m-3d", 10 * m - 3 * d, 2 * a))
    rep.conclusions.append(_ge("b-2a-e >= 0", p.b - 2 * a - p.e, 0))
    rep.conclusions.append(_nonspecial("non-empty and non-special", L))
    return rep


def v4f_hypothesis(p: Params, part: int) -> bool:
    a, l = p.a, p.ell
    if part == 1:
        return a > 4 * l + 3 or (l == 2 and a >= 11) or l <= 1
    return a > 4 * l + 4 or (l == 2 and a >= 12) or l <= 1


def check_v4f(p: Params) -> HypothesisReport:
    a, l, r, s = p.a, p.ell, p.r, p.s
    hyps = _window_checks(p, 4) + [_ge("a >= 0", a, 0),
        Check("(i): a > 4l+3, or l = 2 and a >= 11, or l <= 1", v4f_hypothesis(p, 1), f"a={a}, l={l}"),
        Check("(ii): a > 4l+4, or l = 2 and a >= 12, or l <= 1", v4f_hypothesis(p, 2), f"a={a}, l={l}")]
    rep = HypothesisReport("V4F", p, hyps, assumptions=(GENERIC_GLUING,))
    fib = _try(_fourth, p)
    if fib is None:
        rep.conclusions.append(Check("fourth degeneration constructible", False))
        return rep
    V = fib.component("V")
    M = V.bundle - V.curve("F1") - V.curve("F2")
    for j in range(1, 5):
        M = M - V.curve(f"H{j}") - V.curve(f"H{j}'")
    rep.bundle = M
    curves = list(V.curves)
    x = a - 2 * l
    tail = [max(0, t) for t in [r - s, r - 1] * 8]  # at l = 0 the entry r-1 = -1 only marks a fixed curve
    final1, _ = reduce_to_standard(M)
    rep.conclusions.append(_eq_form("(i) reduces to L(a-2l-4; [r-s,r-1]^8)", shape(final1), _shape(x - 4, tail)))
    _gamma_checks(rep, p, 2, l == 2 and a >= 11)
    rep.conclusions.append(_nonspecial("(i) H1(L(-D-D')) = 0", M, curves))
    M2 = M - V.curve("E")
    final2, _ = reduce_to_standard(M2)
    rep.conclusions.append(_eq_form("(ii) reduces to L(a-2l-5; [r-s,r-1]^8)", shape(final2), _shape(x - 5, tail)))
    literal = _nonspecial("(ii) H1(L(-D-D'-E)) = 0 as stated", M2, curves)
    G = [(n, V.curve(n)) for n in ("G1", "G2")]
    if not literal.holds and all(pair(M2, C) == -2 for _, C in G):
        rep.errata.append("(ii) as stated fails: G1, G2 are (-1)-curves meeting F and E once each, so "
                          "L(-D-D'-E).G_i = -2 and h1 >= 2; " + literal.detail)
        M3 = M2 - G[0][1] - G[1][1]
        rep.conclusions.append(_nonspecial(
            "(ii) as consumed: L(-D-D'-E-G1-G2) non-special (every section of L(-E) vanishes on G1+G2)",
            M3, curves))
        rep.flags.append("surjection onto the difference quotient along F1~F2 uses generic gluing")
    else:
        rep.conclusions.append(literal)
    return rep


def check_z4f(p: Params) -> HypothesisReport:
    d, m, a, al, l, e = p.d, p.m, p.a, p.alpha, p.ell, p.e
    h = al - 2 * l - a
    case = h_for(l, al)
    hyps = _window_checks(p, 4) + [
        Check("a > 2l-2", a > 2 * l - 2, f"{a} > {2 * l - 2}"),
        Check("a = alpha-2l-h with h from the case table", case is not None and case == h,
              f"h={h}, table gives {case}"),
    ]
    Z = _z3_bundle(p)
    cfg = Z.config
    M = Z - exceptional(cfg, "x1'") - exceptional(cfg, "x2'")
    rep = HypothesisReport("Z4F", p, hyps, M, assumptions=(STRONG_ANTICANONICAL,))
    fib = _try(_fourth, p)
    if fib is not None:
        Zf = fib.component("Z")
        rep.conclusions.append(_eq("bundle minus both A sheets (fiber route)",
                                   format_system(Zf.bundle - Zf.curve("A1") - Zf.curve("A2")), format_system(M)))
    rep.conclusions.append(_eq("L.K = 2l-a+2", pair(M, canonical_class(cfg)), 2 * l - a + 2))
    rep.conclusions.append(Check("L.K < 0", 2 * l - a + 2 < 0))
    rep.rows = _z4_rows(M, p, dx=1)
    cur = rep.rows[-1].got
    b = p.b
    X = 18 * al - 11 * b + 10 * a + 6 * e - 6
    Y = 4 * al + a - 2 * b - 1 + e
    Zz = 4 * al + a - 2 * b - 2 + 2 * e
    rep.conclusions.append(_eq("final is L(x+2y; x, y^2, z, (z-l-e)^6)", shape(cur),
                               _shape(X + 2 * Y, [X, Y, Y, Zz] + [Zz - l - e] * 6)))
    rep.conclusions.append(_eq("z-l-e = h-2", Zz - l - e, h - 2))
    rep.conclusions.append(_eq("y = l+h-1", Y, l + h - 1))
    rep.conclusions.append(_eq("2x = alpha-7l+e-12+2h", 2 * X, al - 7 * l + e - 12 + 2 * h))
    rep.conclusions.append(_ge("x >= -1", X, -1))
    if case == 3:
        rel = _cls(Configuration.free(9), 2 * l + 3, [l + 2, l + 2, l + 1] + [1] * 6)
        rep.conclusions.append(_eq("relevant system is L(2l+3; (l+2)^2, l+1, 1^6)",
                                   shape(_clamp(cur)), shape(rel)))
        what = "relevant system"
    else:
        rel = _cls(Configuration.free(4), X + 2 * Y, [X, Y, Y, Zz])
        what = "residual L(x+2y; x, y^2, z)"
    rep.conclusions.append(_nonspecial(f"{what} non-special", rel))
    if virtual_dim(rel) >= 0:
        rep.conclusions.append(_ge(f"{what} non-empty", virtual_dim(rel), 0))
    else:
        rep.errata.append(f"{what} called non-empty, but L({format_system(rel)}) has v = {virtual_dim(rel)}; "
                          "it is empty and non-special, which is all the vanishing needs")
    rep.conclusions.append(_nonspecial("H1(L(-A1-A2)) = 0", M))
    return rep


CHECKS: dict[str, Callable[[Params], HypothesisReport]] = {
    "V2": check_v2, "V2F": check_v2f, "V3": check_v3, "Z3": check_z3, "T3": check_t3,
    "V3F": check_v3f, "Z3F": check_z3f, "V4a": check_v4a, "Z4": check_z4, "T4": check_t4,
    "V4F": check_v4f, "Z4F": check_z4f,
}


def lemma_check(lemma_id: str, d: int, m: int, a: int) -> HypothesisReport:
    if lemma_id not in CHECKS:
        raise CatalogError(f"unknown lemma {lemma_id!r}; catalog is {', '.join(CATALOG)}")
    return CHECKS[lemma_id](Params(d, m, a))


# ---------------------------------------------------------------- choice of a

LEMMAS = "LEMMAS"
DIRECT = "DIRECT"
NONE = "NONE"


class RatioError(ValueError):
    pass


@dataclass
class AChoice:
    """Outcome of choosing the twisting parameter for a pair in the fourth-degeneration window."""

    d: int
    m: int
    a: int | None
    h: int | None
    route: str
    justification: str
    reports: list[HypothesisReport] = field(default_factory=list)
    certificate: oracle.CertifiedDim | None = None

    @property
    def ok(self) -> bool:
        return self.route != NONE

    def to_json(self) -> dict:
        return {
            "d": self.d, "m": self.m, "a": self.a, "h": self.h, "route": self.route,
            "justification": self.justification,
            "reports": [r.to_json() for r in self.reports],
            "certificate": None if self.certificate is None else self.certificate.to_json(),
        }


def a_requirement(ell: int, a: int) -> bool:
    """Lower bound on a needed by the whole chain of fourth-degeneration lemmas."""
    if ell <= 1:
        return a >= 4 * ell + 1
    if ell == 2:
        return a >= 12
    return a > 4 * ell + 5


def choose_a(d: int, m: int, prime: int = oracle.DEFAULT_PRIME, seed: int = 0,
             cache: oracle.WitnessCache | None = None) -> AChoice:
    if m <= 0 or 55 * d < 174 * m or 6 * d > 19 * m:
        raise RatioError(f"need 174/55 <= d/m <= 19/6, got {d}/{m}")
    alpha, ell = d - 3 * m, 19 * m - 6 * d
    if ell == 0 and alpha <= 4:
        # these multiples of (19, 6) are settled outside the degeneration; certify them directly
        cert = oracle.generic_dim(homogeneous(d, m, 10), p=prime, seed=seed, cache=cache)
        good = cert.status in (oracle.CERTIFIED_EMPTY, oracle.CERTIFIED_NONSPECIAL)
        why = f"alpha={alpha} <= 4 on the ray 19/6; oracle {cert.status} dim {cert.dim}"
        return AChoice(d, m, None, None, DIRECT if good else NONE, why, certificate=cert)
    h = h_for(ell, alpha)
    if h is None:
        return AChoice(d, m, None, None, NONE, f"no case of the h table fits (alpha={alpha}, l={ell})")
    a = alpha - 2 * ell - h
    reports = [lemma_check(x, d, m, a) for x in STAGE4]
    if not a_requirement(ell, a):
        need = {0: "a >= 1", 1: "a >= 5", 2: "a >= 12"}.get(ell, f"a > {4 * ell + 5}")
        return AChoice(d, m, a, h, NONE, f"a={a} from h={h} misses the requirement {need} (l={ell})", reports)
    bad = [r.lemma for r in reports if not r.passed]
    if bad:
        return AChoice(d, m, a, h, NONE, f"a={a}: lemma checks failed: {', '.join(bad)}", reports)
    return AChoice(d, m, a, h, LEMMAS, f"a = alpha-2l-h = {alpha}-{2 * ell}-{h} = {a}; all lemma checks pass",
                   reports)
