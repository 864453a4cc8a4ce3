"""Central fibres of degenerations of the blown-up plane.

Every component is stored through its normalization: a plane blown up at a
Configuration, with its bundle and marked curves as DivisorClasses on that
lattice.  A contracted curve stays in the lattice (its class is simply no
longer marked); bundles are pulled back, so a bundle from which a curve was
removed k times has degree zero on it.

A double curve records the class of each of its two sheets, the number of
nodes the image acquires on each side, and the number of triple points on
it.  Self-double curves of a non-normal component have both sheets on that
component and are listed in its GluingRecord.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import comb

from ..lattice import Configuration, DivisorClass, PointNode, exceptional, pair, virtual_dim

NORMAL = "NORMAL"
NON_NORMAL = "NON-NORMAL"
GENERIC_GLUING = "GENERIC-GLUING"


class FiberError(ValueError):
    pass


class HypothesisError(FiberError):
    """A scripted build was asked for parameters outside its window."""

    def __init__(self, inequality: str, detail: str = ""):
        self.inequality = inequality
        super().__init__(f"violated: {inequality}" + (f" ({detail})" if detail else ""))


class ThrowError(FiberError):
    pass


class TopologyError(FiberError):
    pass


class ValidationError(FiberError):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


# ---------------------------------------------------------------- parameters


@dataclass(frozen=True)
class Params:
    """d, m, a and the quantities derived from them."""

    d: int
    m: int
    a: int

    @property
    def c(self) -> int:
        return self.d // 2

    @property
    def e(self) -> int:
        return self.d % 2

    @property
    def b(self) -> int:
        return 5 * self.m + self.a - 3 * self.c - self.e

    @property
    def alpha(self) -> int:
        return self.d - 3 * self.m

    @property
    def mu(self) -> int:
        return 6 * self.d - 19 * self.m

    @property
    def ell(self) -> int:
        return 19 * self.m - 6 * self.d

    @property
    def r(self) -> int:
        return -((-self.ell) // 2)

    @property
    def s(self) -> int:
        return 2 * self.r - self.ell

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.d, self.m)

    def check(self) -> list[str]:
        d, m, a = self.d, self.m, self.a
        c, e, b, al, mu, l, r, s = self.c, self.e, self.b, self.alpha, self.mu, self.ell, self.r, self.s
        out = []
        for name, ok in [
            ("d = 2c+e", d == 2 * c + e and e in (0, 1)),
            ("b = 5m+a-3c-e", b == 5 * m + a - 3 * c - e),
            ("alpha = d-3m", al == d - 3 * m),
            ("mu = 6d-19m", mu == 6 * d - 19 * m),
            ("ell = -mu", l == -mu),
            ("ell = 2r-s", l == 2 * r - s and s in (0, 1)),
            ("d = 3ell+19alpha", d == 3 * l + 19 * al),
            ("m = ell+6alpha", m == l + 6 * al),
        ]:
            if not ok:
                out.append(f"parameter identity {name} fails")
        return out

    def to_json(self) -> dict:
        return {"d": self.d, "m": self.m, "a": self.a, "b": self.b, "c": self.c, "e": self.e,
                "alpha": self.alpha, "mu": self.mu, "ell": self.ell, "r": self.r, "s": self.s}


# ---------------------------------------------------------------- components


def embed(cls: DivisorClass, cfg: Configuration) -> DivisorClass:
    """Re-express a class over a configuration that extends its own."""
    if cls.config.labels == cfg.labels:
        return DivisorClass(cls.degree, cls.mults, cfg)
    if cfg.labels[: cls.k] != cls.config.labels:
        raise FiberError("configuration is not an extension")
    return DivisorClass(cls.degree, cls.mults + (0,) * (len(cfg) - cls.k), cfg)


@dataclass(frozen=True)
class GluingRecord:
    """Curves of one normalization identified in the component itself."""

    pairs: tuple[tuple[str, str], ...]
    points: tuple[str, ...] = ()
    assumption: str = GENERIC_GLUING


@dataclass(frozen=True)
class Component:
    name: str
    config: Configuration
    bundle: DivisorClass
    curves: tuple[tuple[str, DivisorClass], ...] = ()
    multiplicity: int = 1
    gluing: GluingRecord | None = None
    contracted: tuple[tuple[str, DivisorClass], ...] = ()

    def __post_init__(self):
        if self.multiplicity < 1:
            raise FiberError("fibre multiplicity must be positive")
        for _, c in ((None, self.bundle),) + self.curves + self.contracted:
            if c.config.labels != self.config.labels:
                raise FiberError(f"class on {self.name} lives over another configuration")

    @property
    def normality(self) -> str:
        return NON_NORMAL if self.gluing is not None else NORMAL

    def curve(self, name: str) -> DivisorClass:
        for n, c in self.curves:
            if n == name:
                return c
        raise KeyError(f"{self.name} has no curve {name!r}")

    def has_curve(self, name: str) -> bool:
        return any(n == name for n, _ in self.curves)

    def with_curve(self, name: str, cls: DivisorClass) -> "Component":
        rest = tuple((n, c) for n, c in self.curves if n != name)
        return replace(self, curves=rest + ((name, cls),))

    def extend(self, nodes) -> "Component":
        cfg = self.config.extend(nodes)
        return Component(
            self.name, cfg, embed(self.bundle, cfg),
            tuple((n, embed(c, cfg)) for n, c in self.curves), self.multiplicity, self.gluing,
            tuple((n, embed(c, cfg)) for n, c in self.contracted),
        )


@dataclass(frozen=True)
class Side:
    component: str
    curve: str
    nodes: int = 0


@dataclass(frozen=True)
class DoubleCurve:
    name: str
    a: Side
    b: Side
    triple_points: int = 0

    @property
    def is_self(self) -> bool:
        return self.a.component == self.b.component

    def sides(self) -> tuple[Side, Side]:
        return (self.a, self.b)

    @property
    def genus(self) -> int:
        return max(self.a.nodes, self.b.nodes)


@dataclass(frozen=True)
class Fiber:
    params: Params
    components: tuple[Component, ...]
    double_curves: tuple[DoubleCurve, ...]
    history: tuple[tuple, ...] = ()

    def component(self, name: str) -> Component:
        for c in self.components:
            if c.name == name:
                return c
        raise KeyError(f"no component {name!r}")

    def bundle(self, name: str) -> DivisorClass:
        return self.component(name).bundle

    def double_curve(self, name: str) -> DoubleCurve:
        for dc in self.double_curves:
            if dc.name == name:
                return dc
        raise KeyError(f"no double curve {name!r}")

    def side_class(self, side: Side) -> DivisorClass:
        return self.component(side.component).curve(side.curve)

    def curves_on(self, comp: str) -> list[tuple[DoubleCurve, Side]]:
        out = []
        for dc in self.double_curves:
            for sd in dc.sides():
                if sd.component == comp:
                    out.append((dc, sd))
        return out

    def _put(self, comp: Component) -> "Fiber":
        return replace(self, components=tuple(comp if c.name == comp.name else c for c in self.components))

    def _log(self, *entry) -> "Fiber":
        return replace(self, history=self.history + (entry,))


# ---------------------------------------------------------------- operations


def twist(fiber: Fiber, component: str, t: int) -> Fiber:
    """Tensor by O(t * component): minus t times its double curves there, plus t on the other sheet."""
    fiber.component(component)
    if t == 0:
        return fiber._log("twist", component, 0)
    comps = {c.name: c for c in fiber.components}
    for dc in fiber.double_curves:
        if dc.is_self:
            continue
        for here, there in ((dc.a, dc.b), (dc.b, dc.a)):
            if here.component != component:
                continue
            X, N = comps[here.component], comps[there.component]
            comps[X.name] = replace(X, bundle=X.bundle - t * X.curve(here.curve))
            N = comps[N.name]
            comps[N.name] = replace(N, bundle=N.bundle + t * N.curve(there.curve))
    out = replace(fiber, components=tuple(comps[c.name] for c in fiber.components))
    return out._log("twist", component, t)


def _meetings(fiber: Fiber, component: str, C: DivisorClass) -> list[tuple[DoubleCurve, Side, Side, int]]:
    """Double-curve sheets on `component` that C meets: (curve, sheet hit, opposite sheet, count)."""
    X = fiber.component(component)
    out = []
    for dc in fiber.double_curves:
        for here, there in ((dc.a, dc.b), (dc.b, dc.a)):
            if here.component != component:
                continue
            n = pair(C, X.curve(here.curve))
            if n < 0:
                raise TopologyError(f"{dc.name} is a component of the thrown curve")
            if n:
                out.append((dc, here, there, n))
    return out


def _adjust_sheets(fiber: Fiber, component: str, C: DivisorClass, hits) -> Fiber:
    """Pull back each sheet on the thrower through the contraction: R -> R + (R.C) C."""
    X = fiber.component(component)
    for dc, here, _, n in hits:
        X = X.with_curve(here.curve, X.curve(here.curve) + n * C)
    return fiber._put(X)


def _bump(dcs: tuple[DoubleCurve, ...], name: str, triple: int = 0, side: Side | None = None, nodes: int = 0):
    out = []
    for dc in dcs:
        if dc.name == name:
            a, b = dc.a, dc.b
            if side is not None and nodes:
                if a == side:
                    a = replace(a, nodes=a.nodes + nodes)
                elif b == side:
                    b = replace(b, nodes=b.nodes + nodes)
            dc = replace(dc, a=a, b=b, triple_points=dc.triple_points + triple)
        out.append(dc)
    return tuple(out)


def _remove(X: Component, curve: str, cls: DivisorClass, k: int) -> Component:
    return replace(
        X,
        bundle=X.bundle - k * cls,
        curves=tuple((n, c) for n, c in X.curves if n != curve),
        contracted=X.contracted + ((curve, cls),),
    )


def one_throw(fiber: Fiber, component: str, curve: str, label: str) -> Fiber:
    """Throw a (-1)-curve meeting one double curve once; the neighbour gains a k-fold point `label`."""
    X = fiber.component(component)
    C = X.curve(curve)
    k = -pair(X.bundle, C)
    if k <= 0:
        raise ThrowError(f"{curve} meets the bundle on {component} non-negatively ({-k})")
    if pair(C, C) != -1:
        raise TopologyError(f"{curve} is not a (-1)-curve")
    hits = _meetings(fiber, component, C)
    if len(hits) != 1 or hits[0][3] != 1:
        raise TopologyError(f"{curve} must meet the double locus exactly once")
    dc, here, there, _ = hits[0]
    out = _adjust_sheets(fiber, component, C, hits)
    out = out._put(_remove(out.component(component), curve, C, k))
    N = out.component(there.component).extend([PointNode(label)])
    Ep = exceptional(N.config, label)
    N = replace(N, bundle=N.bundle - k * Ep)
    N = N.with_curve(there.curve, N.curve(there.curve) - Ep)
    out = out._put(N)
    return out._log("one_throw", component, curve, label)


@dataclass(frozen=True)
class HitNames:
    """What a 2-throw creates opposite one intersection point of the thrown curve."""

    curve: str  # double curve that is hit
    sheet: str  # the thrower's sheet of it
    point: str  # label of the new [l, l-eps] point on the other sheet's component
    fcurve: str  # E_p' on that component
    gcurve: str  # E_p - E_p' on that component
    gname: str  # double curve between G and the new plane


@dataclass(frozen=True)
class ThrowNames:
    plane: str
    fname: str
    hits: tuple[HitNames, HitNames]


def two_throw(fiber: Fiber, component: str, curve: str, names: ThrowNames, allow_trivial: bool = False) -> Fiber:
    """Throw a (-1)-curve meeting the double locus in two points.

    With k = 2l - eps the curve is removed k times; opposite each intersection
    the other sheet's component gains an [l, l-eps] point, a new plane with a
    degree-eps bundle meets those components along the lines G = E_p - E_p',
    and the two curves F = E_p' are glued to each other.
    allow_trivial admits k = 0, which builds the same combinatorics.
    """
    X = fiber.component(component)
    C = X.curve(curve)
    k = -pair(X.bundle, C)
    if k < 0 or (k == 0 and not allow_trivial):
        raise ThrowError(f"{curve} meets the bundle on {component} non-negatively ({-k})")
    if pair(C, C) != -1:
        raise TopologyError(f"{curve} is not a (-1)-curve")
    hits = _meetings(fiber, component, C)
    if sum(h[3] for h in hits) != 2:
        raise TopologyError(f"{curve} must meet the double locus in exactly two points")
    ell = (k + 1) // 2
    eps = 2 * ell - k
    targets = []
    for dc, here, there, n in hits:
        targets.extend([(dc, here, there)] * n)
    want = sorted((h.curve, h.sheet) for h in names.hits)
    got = sorted((dc.name, here.curve) for dc, here, _ in targets)
    if want != got:
        raise TopologyError(f"{curve} meets {got}, names were given for {want}")

    out = _adjust_sheets(fiber, component, C, hits)
    dcs = out.double_curves
    for dc, here, _, n in hits:
        dcs = _bump(dcs, dc.name, triple=n, side=here, nodes=comb(n, 2))
    out = replace(out, double_curves=dcs)
    out = out._put(_remove(out.component(component), curve, C, k))

    used: set[int] = set()
    fsides: list[Side] = []
    new_curves: list[DoubleCurve] = []
    for i, (dc, here, there) in enumerate(targets):
        j = next(j for j, h in enumerate(names.hits)
                 if j not in used and (h.curve, h.sheet) == (dc.name, here.curve))
        used.add(j)
        h = names.hits[j]
        p, q = h.point, h.point + "'"
        N = out.component(there.component).extend([PointNode(p), PointNode(q, p)])
        Ep, Eq = exceptional(N.config, p), exceptional(N.config, q)
        N = replace(N, bundle=N.bundle - ell * Ep - (ell - eps) * Eq)
        N = N.with_curve(there.curve, N.curve(there.curve) - Ep - Eq)
        N = N.with_curve(h.fcurve, Eq)
        N = N.with_curve(h.gcurve, Ep - Eq)
        out = out._put(N)
        fsides.append(Side(N.name, h.fcurve))
        new_curves.append(DoubleCurve(h.gname, Side(names.plane, f"line{i + 1}"),
                                      Side(N.name, h.gcurve), triple_points=1))

    cfg0 = Configuration()
    H = DivisorClass(1, (), cfg0)
    plane = Component(names.plane, cfg0, DivisorClass(eps, (), cfg0), (("line1", H), ("line2", H)))
    new_curves.insert(0, DoubleCurve(names.fname, fsides[0], fsides[1], triple_points=2))
    comps = out.components + (plane,)
    if fsides[0].component == fsides[1].component:
        N = next(c for c in comps if c.name == fsides[0].component)
        old = N.gluing.pairs if N.gluing else ()
        pts = N.gluing.points if N.gluing else ()
        glued = replace(N, gluing=GluingRecord(old + ((fsides[0].curve, fsides[1].curve),),
                                               pts + tuple(h.point for h in names.hits)))
        comps = tuple(glued if c.name == N.name else c for c in comps)
    out = replace(out, components=comps, double_curves=out.double_curves + tuple(new_curves))
    return out._log("two_throw", component, curve, names.plane, k)


# ---------------------------------------------------------------- validation


@dataclass(frozen=True)
class CurveCheck:
    name: str
    degree_a: int
    degree_b: int
    normal_a: int
    normal_b: int
    triple_points: int

    @property
    def matching(self) -> bool:
        return self.degree_a == self.degree_b

    @property
    def tpf(self) -> int:
        return self.normal_a + self.normal_b + self.triple_points


@dataclass(frozen=True)
class ValidationReport:
    curves: tuple[CurveCheck, ...]
    euler: int
    expected_euler: int
    problems: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.problems

    def render(self) -> str:
        rows = []
        for c in self.curves:
            rows.append(
                f"{c.name:>6}: degrees {c.degree_a} | {c.degree_b}"
                f"   TPF {c.normal_a} + {c.normal_b} + {c.triple_points} = {c.tpf}"
            )
        rows.append(f" chi(X0) = {self.euler}, chi(general fibre) = {self.expected_euler}")
        rows.append(" PASS" if self.ok else " FAIL: " + "; ".join(self.problems))
        return "\n".join(rows)


def euler_characteristic(fiber: Fiber) -> int:
    """chi of the limit bundle from the resolution by normalized components, curves and triple points.

    Every double curve here has a rational normalization, so it contributes deg + 1.
    """
    chi = 0
    for comp in fiber.components:
        chi += virtual_dim(comp.bundle) + 1
    triples = 0
    for dc in fiber.double_curves:
        deg = pair(fiber.bundle(dc.a.component), fiber.side_class(dc.a))
        chi -= deg + 1
        triples += dc.triple_points
    if triples % 3:
        raise ValidationError([f"triple-point incidences {triples} not divisible by 3"])
    return chi + triples // 3


def validate(fiber: Fiber, strict: bool = True) -> ValidationReport:
    """Check matching degrees, the Triple Point Formula and chi against the general fibre."""
    problems = list(fiber.params.check())
    checks = []
    for comp in fiber.components:
        if comp.gluing:
            for f1, f2 in comp.gluing.pairs:
                if pair(comp.bundle, comp.curve(f1)) != pair(comp.bundle, comp.curve(f2)):
                    problems.append(f"glued curves {f1} ~ {f2} on {comp.name} carry different degrees")
    for dc in fiber.double_curves:
        (A, B) = dc.sides()
        ca, cb = fiber.side_class(A), fiber.side_class(B)
        da = pair(fiber.bundle(A.component), ca)
        db = pair(fiber.bundle(B.component), cb)
        na = pair(ca, ca) - 2 * A.nodes
        nb = pair(cb, cb) - 2 * B.nodes
        chk = CurveCheck(dc.name, da, db, na, nb, dc.triple_points)
        checks.append(chk)
        if not chk.matching:
            problems.append(f"{dc.name}: restriction degrees {da} on {A.component} vs {db} on {B.component}")
        if chk.tpf != 0:
            problems.append(f"{dc.name}: triple point formula gives {na} + {nb} + {dc.triple_points} != 0")
    p = fiber.params
    expected = virtual_dim(DivisorClass(p.d, (p.m,) * 10, Configuration.free(10))) + 1
    try:
        chi = euler_characteristic(fiber)
    except ValidationError as exc:
        problems.extend(exc.problems)
        chi = 0
    if chi != expected:
        problems.append(f"chi of the central fibre is {chi}, the general fibre has {expected}")
    report = ValidationReport(tuple(checks), chi, expected, tuple(problems))
    if strict and problems:
        raise ValidationError(problems)
    return report


# ---------------------------------------------------------------- scripted builds


def _window(ok: bool, inequality: str, detail: str = "") -> None:
    if not ok:
        raise HypothesisError(inequality, detail)


def build_first(d: int, m: int, a: int) -> Fiber:
    """V1 (plane at four points) and Z1 (plane at seven points) meeting along E, twisted by (2m+a) Z1."""
    _window(d >= 0 and m >= 0, "d, m >= 0")
    _window(a >= 0, "a >= 0")
    cv = Configuration.free(4)
    cz = Configuration((PointNode("e0"),) + tuple(PointNode(f"p{i}") for i in range(5, 11)))
    V = Component("V", cv, DivisorClass(0, (m,) * 4, cv), (("E", DivisorClass(1, (0,) * 4, cv)),))
    Z = Component("Z", cz, DivisorClass(d, (0,) + (m,) * 6, cz), (("E", exceptional(cz, "e0")),))
    E = DoubleCurve("E", Side("V", "E"), Side("Z", "E"))
    fiber = Fiber(Params(d, m, a), (V, Z), (E,), (("build_first", d, m, a),))
    return twist(fiber, "Z", 2 * m + a)


def _second(d: int, m: int, a: int) -> Fiber:
    fiber = build_first(d, m, a)
    Z = fiber.component("Z")
    fiber = fiber._put(Z.with_curve("C", DivisorClass(3, (2,) + (1,) * 6, Z.config)))
    names = ThrowNames("T", "F", (HitNames("E", "E", "q1", "F1", "G1", "G1"),
                                  HitNames("E", "E", "q2", "F2", "G2", "G2")))
    return two_throw(fiber, "Z", "C", names)


def build_second(d: int, m: int, a: int) -> Fiber:
    """Throw the cubic L(3; 2, 1^6) from Z1: components V (non-normal), Z, T."""
    p = Params(d, m, a)
    _window(5 * d >= 16 * m, "d/m >= 16/5")
    _window(3 * d < 10 * m, "d/m < 10/3")
    _window(a >= 0, "a >= 0")
    _window(2 * p.b - p.e > 0, "2b - e > 0", "the cubic must meet the bundle negatively")
    return _second(d, m, a)


def _third(d: int, m: int, a: int) -> Fiber:
    p = Params(d, m, a)
    _window(p.b > 2 * a, "b > 2a", f"b = {p.b}, a = {a}")
    fiber = twist(_second(d, m, a), "T", -(p.b - 2 * a - p.e))
    V = fiber.component("V")
    for i in (1, 2):
        mults = {f"p{j}": 1 for j in range(1, 5)} | {f"q{i}": 1}
        V = V.with_curve(f"C{i}", DivisorClass.of(V.config, 2, mults))
    fiber = fiber._put(V)
    for i in (1, 2):
        names = ThrowNames(f"U{i}", f"A{i}", (
            HitNames(f"G{i}", f"G{i}", f"y{i}", f"A{i}", f"B{i}", f"B{i}t"),
            HitNames("E", "E", f"x{i}", f"A{i}", f"B{i}", f"B{i}z"),
        ))
        fiber = two_throw(fiber, "V", f"C{i}", names)
    return fiber


# pairs below 19/6 that the lemmas miss; they are treated on this same degeneration by hand
EXCEPTIONAL_PAIRS = ((174, 55), (193, 61), (348, 110))


def build_third(d: int, m: int, a: int) -> Fiber:
    """Twist by -(b-2a-e) T2 and throw the two conics: V, Z, T, U1, U2."""
    if (d, m) not in EXCEPTIONAL_PAIRS:
        _window(6 * d >= 19 * m, "d/m >= 19/6")
        _window(5 * d < 16 * m, "d/m < 16/5")
    _window(a >= 0, "a >= 0")
    return _third(d, m, a)


QUARTICS = ((2, 2, 2, 1), (2, 2, 1, 2), (2, 1, 2, 2), (1, 2, 2, 2))


def _fourth(d: int, m: int, a: int) -> Fiber:
    fiber = _third(d, m, a)
    V = fiber.component("V")
    for j, q in enumerate(QUARTICS, 1):
        mults = {f"p{i}": q[i - 1] for i in range(1, 5)} | {"q1": 1, "q1'": 1, "q2": 1, "q2'": 1}
        V = V.with_curve(f"Q{j}", DivisorClass.of(V.config, 4, mults))
    fiber = fiber._put(V)
    trivial = fiber.params.ell == 0
    for j in range(1, 5):
        # the point opposite the hit on F2 lies on the F1 sheet (t_j), and vice versa (s_j)
        names = ThrowNames(f"Y{j}", f"H{j}", (
            HitNames("F", "F2", f"t{j}", f"H{j}", f"K{j}", f"K{j}"),
            HitNames("F", "F1", f"s{j}", f"H{j}'", f"K{j}'", f"K{j}'"),
        ))
        fiber = two_throw(fiber, "V", f"Q{j}", names, allow_trivial=trivial)
    return fiber


def build_fourth(d: int, m: int, a: int) -> Fiber:
    """Throw the four quartics of V3 across its self-double curve: nine components."""
    _window(55 * d >= 174 * m, "d/m >= 174/55")
    _window(6 * d <= 19 * m, "d/m <= 19/6")
    _window(a >= 0, "a >= 0")
    return _fourth(d, m, a)


BUILDERS = {1: build_first, 2: build_second, 3: build_third, 4: build_fourth}


def build(stage: int, d: int, m: int, a: int) -> Fiber:
    if stage not in BUILDERS:
        raise FiberError(f"stage must be 1..4, got {stage}")
    return BUILDERS[stage](d, m, a)


# ---------------------------------------------------------------- closed forms


def _cls(cfg: Configuration, degree: int, entries) -> DivisorClass:
    mults: list[int] = []
    for e in entries:
        mults.extend(e if isinstance(e, tuple) else (e,))
    return DivisorClass(degree, tuple(mults), cfg)


def closed_forms(fiber: Fiber, stage: int) -> dict[str, DivisorClass]:
    """Bundles each component must carry, written directly from the parameters."""
    p = fiber.params
    d, m, a, b, e, al, mu, l, r, s = p.d, p.m, p.a, p.b, p.e, p.alpha, p.mu, p.ell, p.r, p.s
    cfg = {c.name: c.config for c in fiber.components}
    out: dict[str, DivisorClass] = {}
    if stage == 1:
        out["V"] = _cls(cfg["V"], 2 * m + a, [m] * 4)
        out["Z"] = _cls(cfg["Z"], d, [2 * m + a] + [m] * 6)
    elif stage == 2:
        out["V"] = _cls(cfg["V"], 2 * m + a, [m] * 4 + [(b, b - e)] * 2)
        out["Z"] = _cls(cfg["Z"], 10 * d - 30 * m - 6 * a, [6 * d - 18 * m - 3 * a] + [3 * d - 9 * m - 2 * a] * 6)
        out["T"] = _cls(cfg["T"], e, [])
    elif stage in (3, 4):
        x = b - 2 * a
        if stage == 3:
            out["V"] = _cls(cfg["V"], 9 * a + 2 * mu, [4 * a + mu] * 4 + [(2 * a, 2 * a)] * 2)
        else:
            out["V"] = _cls(cfg["V"], 9 * a - 18 * l,
                            [4 * a - 8 * l] * 4 + [(2 * a - 4 * l,) * 2] * 2 + [(r, r - s)] * 8)
            for j in range(1, 5):
                out[f"Y{j}"] = _cls(cfg[f"Y{j}"], s, [])
        out["Z"] = _cls(cfg["Z"], 10 * al - 6 * a, [6 * al - 3 * a] + [3 * al - 2 * a] * 6 + [(x, x - e)] * 2)
        out["T"] = _cls(cfg["T"], 10 * m - 3 * d - 2 * a, [(x, x - e)] * 2)
        out["U1"] = _cls(cfg["U1"], e, [])
        out["U2"] = _cls(cfg["U2"], e, [])
    return out


def closed_form_mismatches(fiber: Fiber, stage: int) -> list[str]:
    out = []
    want = closed_forms(fiber, stage)
    names = {c.name for c in fiber.components}
    if set(want) != names:
        out.append(f"components {sorted(names)} != {sorted(want)}")
    for name, cls in want.items():
        if name in names and fiber.bundle(name) != cls:
            out.append(f"{name}: {fiber.bundle(name)} != {cls}")
    return out


# ---------------------------------------------------------------- rendering


def fiber_to_json(fiber: Fiber) -> dict:
    comps = []
    for c in fiber.components:
        comps.append({
            "name": c.name,
            "multiplicity": c.multiplicity,
            "normality": c.normality,
            "bundle": c.bundle.to_json(),
            "curves": {n: cls.to_json() for n, cls in c.curves},
            "contracted": {n: cls.to_json() for n, cls in c.contracted},
            "gluing": None if c.gluing is None else {
                "pairs": [list(p) for p in c.gluing.pairs],
                "points": list(c.gluing.points),
                "assumption": c.gluing.assumption,
            },
        })
    dcs = [{
        "name": dc.name,
        "a": {"component": dc.a.component, "curve": dc.a.curve, "nodes": dc.a.nodes},
        "b": {"component": dc.b.component, "curve": dc.b.curve, "nodes": dc.b.nodes},
        "triple_points": dc.triple_points,
    } for dc in fiber.double_curves]
    return {"params": fiber.params.to_json(), "components": comps, "double_curves": dcs,
            "history": [list(h) for h in fiber.history]}


def fiber_from_json(data: dict | str) -> Fiber:
    if isinstance(data, str):
        data = json.loads(data)
    pr = data["params"]
    comps = []
    for c in data["components"]:
        bundle = DivisorClass.from_json(c["bundle"])
        g = c["gluing"]
        comps.append(Component(
            c["name"], bundle.config, bundle,
            tuple((n, DivisorClass.from_json(v)) for n, v in c["curves"].items()),
            c["multiplicity"],
            None if g is None else GluingRecord(tuple(tuple(p) for p in g["pairs"]), tuple(g["points"]),
                                                g["assumption"]),
            tuple((n, DivisorClass.from_json(v)) for n, v in c["contracted"].items()),
        ))
    dcs = tuple(
        DoubleCurve(x["name"], Side(**x["a"]), Side(**x["b"]), x["triple_points"]) for x in data["double_curves"]
    )
    return Fiber(Params(pr["d"], pr["m"], pr["a"]), tuple(comps), dcs, tuple(tuple(h) for h in data["history"]))


def render_fiber(fiber: Fiber) -> str:
    """Adjacency listing: components with bundles, then double curves with self-intersections."""
    p = fiber.params
    rows = [f"d={p.d} m={p.m} a={p.a}  b={p.b} c={p.c} e={p.e} alpha={p.alpha} mu={p.mu} "
            f"ell={p.ell} r={p.r} s={p.s}"]
    for c in fiber.components:
        tag = "" if c.gluing is None else "  non-normal: " + ", ".join(f"{x}~{y}" for x, y in c.gluing.pairs)
        mult = "" if c.multiplicity == 1 else f" x{c.multiplicity}"
        rows.append(f"[{c.name}]{mult} {c.bundle}{tag}")
    for dc in fiber.double_curves:
        A, B = dc.sides()
        ca, cb = fiber.side_class(A), fiber.side_class(B)
        na = pair(ca, ca) - 2 * A.nodes
        nb = pair(cb, cb) - 2 * B.nodes
        deg = pair(fiber.bundle(A.component), ca)
        rows.append(f"  {A.component}.{A.curve} ({na:+d}) --{dc.name}-- {B.component}.{B.curve} ({nb:+d})"
                    f"  deg {deg}, triple {dc.triple_points}")
    return "\n".join(rows)
