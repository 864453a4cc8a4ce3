"""Dimension ledgers for limit linear systems on a central fibre.

Dimensions in the ledger are projective (dim = h0 - 1, so -1 means empty) unless a
field says otherwise.  The generic engine glues components one at a time and computes
the fibre product of section spaces over the double curves; every place where a
transversality or genericity statement is needed is gated on a named assumption tag,
and a missing tag turns the step into an upper bound.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ..cremona import reduce_to_standard, shgh_dim
from ..lattice import DivisorClass, expected_dim, format_system, homogeneous, pair
from .fiber import Fiber, FiberError, Params, _fourth, _third, build_first
from .lemmas import ESSENTIAL_GENERALITY, GENERIC_GLUING, _cls, shape, v_config

COMPLETE_RESTRICTION = "COMPLETE-RESTRICTION"
TRANSVERSALITY = "TRANSVERSALITY"
CORRESPONDENCE_GENERALITY = "CORRESPONDENCE-GENERALITY"
TAGS = (COMPLETE_RESTRICTION, TRANSVERSALITY, CORRESPONDENCE_GENERALITY, ESSENTIAL_GENERALITY, GENERIC_GLUING)

EXACT = "exact"
UPPER = "upper"

DEFAULT_ORDERS = {
    1: ("V", "Z"),
    2: ("V", "T", "Z"),
    3: ("V", "T", "Z", "U1", "U2"),
    4: ("V", "Z", "T", "U1", "U2", "Y1", "Y2", "Y3", "Y4"),
}


class IncompleteInputError(ValueError):
    pass


@dataclass
class LedgerStep:
    label: str
    dim: int
    kind: str = EXACT
    note: str = ""
    tags: tuple[str, ...] = ()

    def render(self) -> str:
        mark = "<=" if self.kind == UPPER else "= "
        tags = f"  [{', '.join(self.tags)}]" if self.tags else ""
        return f"  {self.label:<44} {mark}{self.dim:>6}  {self.note}{tags}"

    def to_json(self) -> dict:
        return {"label": self.label, "dim": self.dim, "kind": self.kind, "note": self.note, "tags": list(self.tags)}


@dataclass
class MatchingReport:
    title: str
    steps: list[LedgerStep] = field(default_factory=list)
    dim: int = -1
    exact: bool = True
    expected: int | None = None
    notes: list[str] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def assumptions(self) -> tuple[str, ...]:
        used = {t for s in self.steps for t in s.tags}
        return tuple(t for t in TAGS if t in used)

    @property
    def delta(self) -> int:
        return self.dim

    @property
    def verdict(self) -> str:
        if self.dim < 0:
            return "EMPTY"
        if self.exact:
            return f"DIM-EXACT({self.dim})-UNDER-ASSUMPTIONS"
        return f"DIM-UPPER-BOUND({self.dim})"

    def step(self, label: str, dim: int, kind: str = EXACT, note: str = "", tags: Iterable[str] = ()) -> int:
        self.steps.append(LedgerStep(label, dim, kind, note, tuple(tags)))
        if kind == UPPER:
            self.exact = False
        return dim

    def render(self) -> str:
        lines = [f"{self.title}: {self.verdict}"] + [s.render() for s in self.steps]
        if self.expected is not None:
            lines.append(f"  expected dimension {self.expected}")
        if self.assumptions:
            lines.append("  assumptions: " + ", ".join(self.assumptions))
        lines += [f"  note: {n}" for n in self.notes]
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "title": self.title, "verdict": self.verdict, "dim": self.dim, "exact": self.exact,
            "expected": self.expected, "assumptions": list(self.assumptions),
            "steps": [s.to_json() for s in self.steps], "notes": list(self.notes),
            "extras": json.loads(json.dumps(self.extras, default=str)),
        }


# ---------------------------------------------------------------- generic engine


def curve_h0(degree: int, genus: int) -> int:
    """h0 of a general line bundle of the given degree on a curve of the given arithmetic genus."""
    if degree < 0 or (degree == 0 and genus > 0):
        return 0
    if degree > 2 * genus - 2:
        return degree + 1 - genus
    return max(0, degree + 1 - genus)  # crude for special degrees; only genus <= 1 occurs


class _H0:
    """h0 lookups by key, taken from caller-supplied projective dims or from cremona."""

    def __init__(self, dims: Mapping[str, int] | None, compute: bool):
        self.dims = dict(dims or {})
        self.compute = compute
        self.conjectural = False

    def __call__(self, key: str, cls: DivisorClass) -> int:
        if key in self.dims:
            return self.dims[key] + 1
        if not self.compute:
            raise IncompleteInputError(f"no dimension supplied for {key}")
        res = shgh_dim(cls)
        if res.status != "PROVEN":
            self.conjectural = True
        return res.dim + 1


def matching_dim(fiber: Fiber, assumptions: Iterable[str] = (), order: Sequence[str] | None = None,
                 dims: Mapping[str, int] | None = None, compute: bool = True) -> MatchingReport:
    """Glue the components in `order` and bound the dimension of matching sections.

    `dims` may supply projective dimensions keyed by component name ("Z") or by
    component minus its double curves ("Z(-E)"); anything missing is computed
    with cremona unless `compute` is false.
    """
    tags = set(assumptions)
    unknown = tags - set(TAGS)
    if unknown:
        raise ValueError(f"unknown assumption tags {sorted(unknown)}")
    names = [c.name for c in fiber.components]
    if order is None:
        stage = max((k for k, o in DEFAULT_ORDERS.items() if set(o) == set(names)), default=None)
        order = DEFAULT_ORDERS[stage] if stage else tuple(names)
    order = list(order)
    if sorted(order) != sorted(names):
        raise IncompleteInputError(f"gluing order {order} does not list the components {names}")
    h0 = _H0(dims, compute)
    p = fiber.params
    rep = MatchingReport(f"matching ledger at (d,m,a)=({p.d},{p.m},{p.a})")
    rep.expected = expected_dim(homogeneous(p.d, p.m, 10))

    def own(X) -> tuple[int, str, tuple]:
        """Projective dimension of sections on X itself, after self-gluings."""
        n = h0(X.name, X.bundle)
        selfs = [dc for dc in fiber.double_curves if dc.is_self and dc.a.component == X.name]
        if not selfs:
            return n, EXACT, ()
        cond = sum(max(0, pair(X.bundle, X.curve(dc.a.curve))) for dc in selfs)
        if TRANSVERSALITY in tags:
            return max(0, n - cond), UPPER, (TRANSVERSALITY, GENERIC_GLUING)
        return n, UPPER, ()

    first = fiber.component(order[0])
    vec, kind, t = own(first)
    rep.step(f"{first.name}", vec - 1, kind, f"h0 {vec}", t)
    free = {first.name}
    done = [first.name]
    for name in order[1:]:
        X = fiber.component(name)
        hx, kx, tx = own(X)
        links = [(dc, sd) for dc, sd in fiber.curves_on(name)
                 if not dc.is_self and (dc.b if dc.a == sd else dc.a).component in done]
        if not links:
            vec += hx
            rep.step(f"+{name} (disjoint)", vec - 1, kx, f"h0 {hx}", tx)
            done.append(name)
            continue
        hC = 0
        sub_x = X.bundle
        other = {}
        classes = [X.curve(sd.curve) for _, sd in links]
        # sections on a connected union must agree where the pieces meet
        hC -= sum(max(0, pair(c1, c2)) for i, c1 in enumerate(classes) for c2 in classes[i + 1:])
        for dc, sd in links:
            C = X.curve(sd.curve)
            hC += curve_h0(pair(X.bundle, C), dc.genus)
            sub_x = sub_x - C
            o = dc.b if dc.a == sd else dc.a
            other.setdefault(o.component, []).append(o.curve)
        key = f"{name}(-{'-'.join(dc.name for dc, _ in links)})"
        ker_x = min(hx, h0(key, sub_x))
        r_x = min(hx - ker_x, hC)
        r_w, w_exact = 0, len(other) == 1 and set(other) <= free
        for comp, crvs in other.items():
            Y = fiber.component(comp)
            sub_y = Y.bundle
            for c in crvs:
                sub_y = sub_y - Y.curve(c)
            hy = h0(comp, Y.bundle)
            r_w += hy - min(hy, h0(f"{comp}(-{'-'.join(crvs)})", sub_y))
        r_w = min(r_w, hC, vec)
        step_tags = list(tx)
        exact = kx == EXACT
        if r_x == hC and COMPLETE_RESTRICTION in tags:
            new = vec + ker_x
            step_tags.append(COMPLETE_RESTRICTION)
            free = free
        elif r_w == hC and w_exact and COMPLETE_RESTRICTION in tags:
            new = (vec - hC) + hx
            step_tags.append(COMPLETE_RESTRICTION)
            free = {name}
        elif TRANSVERSALITY in tags:
            new = (vec - r_w) + ker_x + max(0, r_w + r_x - hC)
            step_tags.append(TRANSVERSALITY)
            exact = exact and w_exact
            free = set()
        else:
            new = (vec - r_w) + ker_x + min(r_w, r_x)
            exact = False
            free = set()
        vec = new
        rep.step(f"+{name} along {'+'.join(dc.name for dc, _ in links)}", vec - 1, EXACT if exact else UPPER,
                 f"h0({name})={hx} ker={ker_x} r={r_x} r_W={r_w} h0(C)={hC}", step_tags)
        done.append(name)
    rep.dim = max(-1, vec - 1)
    if h0.conjectural:
        rep.notes.append("some component dimensions rely on the SHGH conjecture beyond nine points")
    return rep


def first_degeneration_dim(d: int, m: int, assumptions: Iterable[str] = (COMPLETE_RESTRICTION, TRANSVERSALITY)
                           ) -> MatchingReport:
    return matching_dim(build_first(d, m, 0), assumptions)


# ---------------------------------------------------------------- double-curve model


def chord_common(degree: int, r1: int, r2: int, same_bundle: bool) -> int:
    """Projective dimension of the series common to a g^r1 and a g^r2 on a one-nodal rational curve.

    Embed the normalization by its complete series of `degree`.  A series that
    identifies the two preimages of the node is the set of hyperplanes through a centre
    of dimension degree-r-1 meeting the chord; common divisors are hyperplanes containing
    both centres.  Centres through one point of the chord (one fixed bundle) meet there;
    otherwise they are disjoint.
    """
    if r1 < 0 or r2 < 0:
        return -1
    c1, c2 = degree - r1 - 1, degree - r2 - 1
    span = c1 + c2 if same_bundle else c1 + c2 + 1
    return max(-1, min(r1, r2, degree - 1 - span))


def _glued(ker1: int, ker2: int, common: int) -> int:
    """Projective dim of pairs of sections agreeing on the double curve; inputs are projective."""
    return (ker1 + 1) + (ker2 + 1) + (common + 1) - 1


def _v3_residual(a: int) -> DivisorClass:
    """Ṽ3 bundle at l = 1 minus the four quartics, through the eight points of D on the double curve."""
    return _cls(v_config(4), 9 * a - 18, [4 * a - 8] * 4 + [(2 * a - 4, 2 * a - 4)] * 2 + [(1, 0)] * 8)


# ---------------------------------------------------------------- the three exceptional pairs


def _v3_matched(a: int) -> tuple[int, str]:
    """Curves on Ṽ3 (at l = 1) that match the quartics and glue along F1 ~ F2."""
    if a < 2:
        return -1, "residual degree a-2 < 0"
    base = shgh_dim(_v3_residual(a)).dim
    if base < 0:
        return -1, f"L({a - 2})(-D) empty"
    return max(-1, base - (2 * a - 8)), f"L({a - 2})(-D) dim {base}, minus {2 * a - 8} for F1~F2"


def case_174() -> MatchingReport:
    d, m = 174, 55
    rep = MatchingReport("L(174; 55^10) by the third degeneration")
    rep.expected = expected_dim(homogeneous(d, m, 10))
    per_a: dict[int, str] = {}
    v_ok, z_ok, totals = [], [], []
    for a in range(0, 15):
        p = Params(d, m, a)
        dv, why_v = _v3_matched(a)
        if a >= 5:
            closed = (a * a - 5 * a - 2) // 2
            if dv != closed:
                rep.notes.append(f"a={a}: V-side count {dv} differs from (a^2-5a-2)/2 = {closed}")
        Z = _cls(_z3_config(), 36 - 3 * a, [0] + [9 - a] * 6 + [(14 - a, 14 - a)] * 2)
        dz = shgh_dim(Z).dim
        delta = max(-1, dz - (p.b - 2 * a)) if dz >= 0 else -1
        if dv >= 0:
            v_ok.append(a)
        if dz >= 0:
            z_ok.append(a)
        tag_v = (ESSENTIAL_GENERALITY,) if a <= 4 else (TRANSVERSALITY, ESSENTIAL_GENERALITY)
        rep.step(f"a={a:<2} V3 matched curves", dv, EXACT, why_v, tag_v)
        rep.step(f"a={a:<2} Z3 system L({format_system(Z)})", dz, EXACT,
                 "tangent lines split" if a > 8 else "")
        rep.step(f"a={a:<2} delta on Z3+T3", delta, EXACT, f"dim - (b-2a) = {dz} - {p.b - 2 * a}",
                 (TRANSVERSALITY,))
        if dv < 0 or delta < 0:
            per_a[a] = "EMPTY (not centrally effective)"
            continue
        # both sides survive: match along E, a nodal rational curve of degree a-2
        kv = _v3_matched(a - 1)[0]
        kz = max(-1, shgh_dim(_cls(_z3_config(), 36 - 3 * (a + 1), [0] + [8 - a] * 6 + [(13 - a, 13 - a)] * 2)).dim
                 - (p.b - 2 * a - 1))
        deg = a - 2
        fib = _third(d, m, a)
        assert pair(fib.bundle("V"), fib.component("V").curve("E")) == deg
        rv, rz = dv - kv - 1, delta - kz - 1
        common = chord_common(deg, rv, rz, same_bundle=False)
        total = _glued(kv, kz, common)
        totals.append(total)
        rep.step(f"a={a:<2} series on E: V g^{rv}, Z g^{rz}, degree {deg}", common, EXACT,
                 "centres meet the chord at distinct general points", (CORRESPONDENCE_GENERALITY,))
        rep.step(f"a={a:<2} matching curves on the central fibre", total, EXACT, "", (TRANSVERSALITY,))
        per_a[a] = "EMPTY (no common restriction to E)" if total < 0 else f"dim {total}"
    rep.extras = {"per_a": per_a, "bounds": (min(v_ok), max(z_ok))}
    rep.dim = max(totals, default=-1)
    rep.notes.append(f"central effectivity forces {min(v_ok)} <= a <= {max(z_ok)}")
    return rep


def _z3_config():
    from .lemmas import z_config
    return z_config(3)


def case_193(a: int = 7) -> MatchingReport:
    d, m = 193, 61
    p = Params(d, m, a)
    rep = MatchingReport(f"L(193; 61^10) by the third degeneration at a={a}")
    rep.expected = expected_dim(homogeneous(d, m, 10))
    fib = _third(d, m, a)
    res = shgh_dim(_v3_residual(a)).dim
    rep.step("V3 minus quartics, through D", res, EXACT, f"Cremona reduces to L({a - 2}; 1^8)",
             (ESSENTIAL_GENERALITY,))
    dv = rep.step("V3 after F1~F2", res - (2 * a - 8), EXACT, f"{2 * a - 8} matching conditions",
                  (TRANSVERSALITY,))
    dz = rep.step("Z3", shgh_dim(fib.bundle("Z")).dim, EXACT, "Cremona reduces to L(6; 2^3, 1^7)")
    dzt = rep.step("Z3+T3 along A1, A2", dz - (p.b - 2 * a), EXACT,
                   f"{p.b - 2 * a} conditions; Z3 cuts complete series on A_i+B_i",
                   (COMPLETE_RESTRICTION, TRANSVERSALITY))
    kv = _v3_matched(a - 1)[0]
    rv = dv - kv - 1
    deg = pair(fib.bundle("V"), fib.component("V").curve("E"))
    common = chord_common(deg, rv, dzt, same_bundle=True)
    rep.step(f"series on E: V g^{rv}, Z+T g^{dzt} (injective), degree {deg}", common, EXACT,
             "both series come from the one limit bundle", (TRANSVERSALITY,))
    total = rep.step("matching curves on the central fibre", _glued(kv, -1, common), EXACT,
                     f"kernel on V3 is the a={a - 1} system, dim {kv}")
    rep.step("+U1, U2 (degree e planes)", total, EXACT)
    rep.dim = total
    return rep


def case_348(a: int = 14) -> MatchingReport:
    d, m = 348, 110
    p = Params(d, m, a)
    rep = MatchingReport(f"L(348; 110^10) by the fourth degeneration at a={a}")
    rep.expected = expected_dim(homogeneous(d, m, 10))
    fib = _fourth(d, m, a)
    V = fib.component("V")
    final, _ = reduce_to_standard(V.bundle)
    form = shape(final)
    if form != (a - 4, (1,) * 16):
        rep.notes.append(f"Ṽ4 reduced to {form}, not L({a - 4}; [1,1]^8)")
    dv = rep.step("Ṽ4", shgh_dim(V.bundle).dim, EXACT, f"Cremona reduces to L({a - 4}; [1,1]^8)")
    f_deg = pair(V.bundle, V.curve("F1"))
    h_deg = sum(pair(V.bundle, V.curve(f"H{j}")) for j in range(1, 5))
    dv = rep.step("V4 after F1~F2 and H_j~H_j'", dv - f_deg - h_deg, UPPER,
                  f"at least {f_deg} + {h_deg} conditions", (TRANSVERSALITY, GENERIC_GLUING))
    dz = rep.step("Z4", shgh_dim(fib.bundle("Z")).dim, EXACT, "Cremona reduces to L(6; 2^4), non-general points")
    dzt = rep.step("Z4+T4 along A1, A2", dz - (p.b - 2 * a), EXACT,
                   f"{p.b - 2 * a} conditions; Z4 cuts complete series on A1, A2",
                   (COMPLETE_RESTRICTION, TRANSVERSALITY))
    deg = pair(V.bundle, V.curve("E"))
    hE = curve_h0(deg, 1)
    kv = dv - hE
    rv = hE - 1
    rep.step(f"V4 restriction to E complete (degree {deg}, genus 1)", rv, UPPER,
             f"kernel dim {kv}", (COMPLETE_RESTRICTION,))
    common = chord_common(deg, rv, dzt, same_bundle=False)
    total = rep.step("matching curves on V4+Z4+T4", _glued(kv, -1, common), UPPER,
                     f"{dzt} for the Z4+T4 curve, {kv} for the V4 curve through its trace on E",
                     (CORRESPONDENCE_GENERALITY,))
    rep.step("+U1, U2, Y1..Y4 (degree e and s planes)", total, UPPER)
    rep.dim = total
    rep.notes.append("the bound equals the expected dimension, so the system is non-special")
    return rep


CASES = {(174, 55): case_174, (193, 61): case_193, (348, 110): case_348}
