"""Intersection theory on iterated blow-ups of the plane.

Classes are written in the total-transform basis H, E_1, ..., E_k with
H^2 = 1, E_i.E_j = -delta_ij and H.E_i = 0.  A class dH - sum m_i E_i is
stored as a degree plus one multiplicity per point of a Configuration.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

Entry = Union[int, tuple]


class ConfigurationError(ValueError):
    """Raised for malformed configurations or mismatched ambient spaces."""


class ParseError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} at position {position}" + (f": {text!r}" if text else ""))
        self.position = position
        self.text = text


@dataclass(frozen=True)
class PointNode:
    label: str
    parent: str | None = None


@dataclass(frozen=True)
class Configuration:
    """Labelled points; a node with a parent is infinitely near to it (first order)."""

    points: tuple[PointNode, ...] = ()

    def __post_init__(self):
        seen: set[str] = set()
        for node in self.points:
            if node.label in seen:
                raise ConfigurationError(f"duplicate label {node.label!r}")
            if node.parent is not None and node.parent not in seen:
                raise ConfigurationError(
                    f"parent {node.parent!r} of {node.label!r} must be an earlier point"
                )
            seen.add(node.label)

    @classmethod
    def free(cls, k: int, prefix: str = "p") -> "Configuration":
        return cls(tuple(PointNode(f"{prefix}{i + 1}") for i in range(k)))

    @classmethod
    def from_shape(cls, shape: Sequence[int], prefix: str = "p") -> "Configuration":
        """Build from chain lengths: shape [1, 1, 2] gives two free points and one [a,b] chain."""
        nodes = []
        for i, length in enumerate(shape):
            if length < 1:
                raise ConfigurationError("chain length must be positive")
            base = f"{prefix}{i + 1}"
            prev = None
            for depth in range(length):
                label = base + "'" * depth
                nodes.append(PointNode(label, prev))
                prev = label
        return cls(tuple(nodes))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(n.label for n in self.points)

    def __len__(self) -> int:
        return len(self.points)

    def index(self, label: str) -> int:
        for i, n in enumerate(self.points):
            if n.label == label:
                return i
        raise ConfigurationError(f"unknown label {label!r}")

    def node(self, label: str) -> PointNode:
        return self.points[self.index(label)]

    def parent_index(self, i: int) -> int | None:
        parent = self.points[i].parent
        return None if parent is None else self.index(parent)

    def depth(self, i: int) -> int:
        d = 0
        j = self.parent_index(i)
        while j is not None:
            d += 1
            j = self.parent_index(j)
        return d

    def children(self, i: int) -> list[int]:
        label = self.points[i].label
        return [j for j, n in enumerate(self.points) if n.parent == label]

    def is_free(self, i: int) -> bool:
        return self.points[i].parent is None

    @property
    def all_free(self) -> bool:
        return all(n.parent is None for n in self.points)

    def chains(self) -> list[list[int]]:
        """Group point indices into chains rooted at free points, in order.

        A root with several children is split into separate chains after the first.
        """
        out: list[list[int]] = []
        used: set[int] = set()
        for i, n in enumerate(self.points):
            if i in used:
                continue
            chain = [i]
            used.add(i)
            cur = i
            while True:
                kids = [j for j in self.children(cur) if j not in used]
                if not kids:
                    break
                cur = kids[0]
                chain.append(cur)
                used.add(cur)
            out.append(chain)
        return out

    def shape(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.chains())

    def extend(self, nodes: Iterable[PointNode]) -> "Configuration":
        return Configuration(self.points + tuple(nodes))

    def to_json(self) -> list[dict]:
        return [{"label": n.label, "parent": n.parent} for n in self.points]


@dataclass(frozen=True)
class DivisorClass:
    """The class dH - sum m_i E_i over a configuration."""

    degree: int
    mults: tuple[int, ...]
    config: Configuration = field(compare=True)

    def __post_init__(self):
        if len(self.mults) != len(self.config):
            raise ConfigurationError(
                f"{len(self.mults)} multiplicities for {len(self.config)} points"
            )

    @classmethod
    def of(cls, config: Configuration, degree: int, mults: dict[str, int] | None = None):
        mults = dict(mults or {})
        unknown = set(mults) - set(config.labels)
        if unknown:
            raise ConfigurationError(f"unknown labels {sorted(unknown)}")
        return cls(int(degree), tuple(int(mults.get(l, 0)) for l in config.labels), config)

    @property
    def k(self) -> int:
        return len(self.mults)

    def mult(self, label: str) -> int:
        return self.mults[self.config.index(label)]

    def mult_map(self) -> dict[str, int]:
        return dict(zip(self.config.labels, self.mults))

    def replace(self, degree: int | None = None, mults: Sequence[int] | None = None) -> "DivisorClass":
        return DivisorClass(
            self.degree if degree is None else int(degree),
            self.mults if mults is None else tuple(int(x) for x in mults),
            self.config,
        )

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        _check_same(self, other)
        return self.replace(self.degree + other.degree, [a + b for a, b in zip(self.mults, other.mults)])

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        return self + (-1) * other

    def __rmul__(self, t: int) -> "DivisorClass":
        return self.replace(t * self.degree, [t * x for x in self.mults])

    def __neg__(self) -> "DivisorClass":
        return (-1) * self

    def entries(self) -> tuple[Entry, ...]:
        """Multiplicities grouped into chains: ints for lone points, tuples for compound points."""
        out: list[Entry] = []
        for chain in self.config.chains():
            if len(chain) == 1:
                out.append(self.mults[chain[0]])
            else:
                out.append(tuple(self.mults[i] for i in chain))
        return tuple(out)

    def signature(self) -> tuple[int, tuple[Entry, ...]]:
        return (self.degree, self.entries())

    def __str__(self) -> str:
        return f"L({format_system(self)})"

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "mults": [
                {"label": n.label, "mult": m, "parent": n.parent}
                for n, m in zip(self.config.points, self.mults)
            ],
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "DivisorClass":
        if isinstance(data, str):
            data = json.loads(data)
        nodes = tuple(PointNode(e["label"], e.get("parent")) for e in data["mults"])
        return cls(int(data["degree"]), tuple(int(e["mult"]) for e in data["mults"]), Configuration(nodes))


def L(degree: int, entries: Iterable[Entry] = (), prefix: str = "p") -> DivisorClass:
    """Shorthand: L(52, [23]*4 + [(12, 12)]*2) is L(52; 23^4, [12,12]^2)."""
    entries = list(entries)
    shape, mults = [], []
    for e in entries:
        if isinstance(e, (tuple, list)):
            shape.append(len(e))
            mults.extend(int(x) for x in e)
        else:
            shape.append(1)
            mults.append(int(e))
    return DivisorClass(int(degree), tuple(mults), Configuration.from_shape(shape, prefix))


def homogeneous(d: int, m: int, k: int) -> DivisorClass:
    return L(d, [m] * k)


def _check_same(a: DivisorClass, b: DivisorClass, cfg: Configuration | None = None) -> None:
    if a.config.labels != b.config.labels:
        raise ConfigurationError("classes live over different configurations")
    if cfg is not None and cfg.labels != a.config.labels:
        raise ConfigurationError("class does not live over the given configuration")


def pair(a: DivisorClass, b: DivisorClass, cfg: Configuration | None = None) -> int:
    _check_same(a, b, cfg)
    return a.degree * b.degree - sum(x * y for x, y in zip(a.mults, b.mults))


def self_int(a: DivisorClass) -> int:
    return pair(a, a)


def canonical_class(cfg: Configuration) -> DivisorClass:
    return DivisorClass(-3, (-1,) * len(cfg), cfg)


def anticanonical(cfg: Configuration) -> DivisorClass:
    return DivisorClass(3, (1,) * len(cfg), cfg)


def virtual_dim(Lc: DivisorClass) -> int:
    d = Lc.degree
    v = d * (d + 3) // 2 - sum(m * (m + 1) // 2 for m in Lc.mults)
    K = canonical_class(Lc.config)
    assert 2 * v == pair(Lc, Lc) - pair(Lc, K), "virtual dimension identity violated"
    return v


def expected_dim(Lc: DivisorClass) -> int:
    return max(-1, virtual_dim(Lc))


def exceptional(cfg: Configuration, label: str) -> DivisorClass:
    """The total transform E_label, written as L(0; ..., -1, ...)."""
    return DivisorClass.of(cfg, 0, {label: -1})


# ---------------------------------------------------------------- negative classes


@dataclass(frozen=True)
class NegClass:
    cls: DivisorClass
    self_int: int
    pairing: int


@dataclass(frozen=True)
class NegClassReport:
    classes: tuple[NegClass, ...]
    degree_bound_used: int
    complete: bool
    justification: str | None = None

    def __iter__(self) -> Iterator[NegClass]:
        return iter(self.classes)

    def __len__(self) -> int:
        return len(self.classes)


def _partitions(total: int, squares: int, parts: int, cap: int) -> Iterator[tuple[int, ...]]:
    """Non-increasing tuples of `parts` non-negative ints <= cap with given sum and sum of squares."""
    if parts == 0:
        if total == 0 and squares == 0:
            yield ()
        return
    if total < 0 or squares < 0:
        return
    hi = min(cap, total)
    for first in range(hi, -1, -1):
        rest_t, rest_s = total - first, squares - first * first
        if rest_s < 0:
            continue
        # remaining parts are <= first: need rest_t <= (parts-1)*first
        if rest_t > (parts - 1) * first:
            break
        # Cauchy-Schwarz: rest_t^2 <= (parts-1)*rest_s
        if rest_t * rest_t > (parts - 1) * rest_s:
            continue
        for tail in _partitions(rest_t, rest_s, parts - 1, first):
            yield (first,) + tail


def _distinct_perms(values: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    """Distinct permutations, lexicographically descending from a non-increasing input."""
    items = list(values)
    n = len(items)
    counts: dict[int, int] = {}
    for v in items:
        counts[v] = counts.get(v, 0) + 1
    keys = sorted(counts, reverse=True)
    out = [0] * n

    def rec(pos: int) -> Iterator[tuple[int, ...]]:
        if pos == n:
            yield tuple(out)
            return
        for key in keys:
            if counts[key]:
                counts[key] -= 1
                out[pos] = key
                yield from rec(pos + 1)
                counts[key] += 1

    yield from rec(0)


def _proximity_ok(cfg: Configuration, c: Sequence[int]) -> bool:
    for i in range(len(cfg)):
        j = cfg.parent_index(i)
        if j is not None and c[i] > c[j]:
            return False
    return True


def negative_classes_raw(cfg: Configuration, degree_bound: int, target: int) -> list[DivisorClass]:
    if target not in (-1, -2):
        raise ValueError("target self-intersection must be -1 or -2")
    k = len(cfg)
    out: list[DivisorClass] = []
    # degree zero: exceptional curves, and E_parent - E_child for proximate pairs
    if target == -1:
        for i in range(k):
            out.append(DivisorClass(0, tuple(-1 if j == i else 0 for j in range(k)), cfg))
    else:
        for i in range(k):
            j = cfg.parent_index(i)
            if j is not None:
                mults = [0] * k
                mults[j], mults[i] = -1, 1
                out.append(DivisorClass(0, tuple(mults), cfg))
    for delta in range(1, degree_bound + 1):
        # C.K = -1 (resp. 0): sum c = 3 delta - 1 (resp. 3 delta); C^2: sum c^2 = delta^2 + 1 (resp. + 2)
        total = 3 * delta - 1 if target == -1 else 3 * delta
        squares = delta * delta - target
        for part in _partitions(total, squares, k, delta):
            for perm in _distinct_perms(part):
                if _proximity_ok(cfg, perm):
                    out.append(DivisorClass(delta, perm, cfg))
    return out


def enumerate_negative_classes(
    cfg: Configuration,
    Lc: DivisorClass | None,
    degree_bound: int,
    target_self_int: int = -1,
    justification: str | None = None,
) -> NegClassReport:
    """All (-1)- or (-2)-classes of degree <= degree_bound, sorted by pairing with Lc.

    Classes of positive degree respect proximity (a child never exceeds its parent).
    `complete` is set only when the caller names why the bound is exhaustive.
    """
    if degree_bound < 0:
        raise ValueError("degree_bound must be non-negative")
    raw = negative_classes_raw(cfg, degree_bound, target_self_int)
    items = []
    for C in raw:
        c2 = pair(C, C)
        ck = pair(C, canonical_class(cfg))
        if c2 != target_self_int or ck != -2 - c2:
            raise AssertionError(f"enumeration produced a bad class {C}")
        items.append(NegClass(C, c2, pair(Lc, C) if Lc is not None else 0))
    items.sort(key=lambda n: (n.pairing, n.cls.degree, tuple(-x for x in n.cls.mults)))
    return NegClassReport(tuple(items), degree_bound, justification is not None, justification)


@dataclass(frozen=True)
class NefVerdict:
    nef: bool
    witness: NegClass | None = None

    @property
    def label(self) -> str:
        return "NEF-UP-TO-BOUND" if self.nef else "NOT-NEF"


def is_nef_bounded(Lc: DivisorClass, cfg: Configuration | None = None, degree_bound: int = 5) -> NefVerdict:
    """Test Lc against the (-1)-classes up to the bound and the (-2)-classes of infinitely near pairs."""
    cfg = cfg or Lc.config
    for target in (-1, -2):
        report = enumerate_negative_classes(cfg, Lc, degree_bound, target)
        for item in report:
            if target == -2 and item.cls.degree > 0:
                continue  # not effective for general points
            if item.pairing < 0:
                return NefVerdict(False, item)
    return NefVerdict(True)


# ---------------------------------------------------------------- notation


def _format_entry(e: Entry) -> str:
    if isinstance(e, tuple):
        return "[" + ",".join(str(x) for x in e) + "]"
    return str(e)


def format_entries(entries: Sequence[Entry]) -> str:
    parts = []
    for key, grp in itertools.groupby(entries):
        n = len(list(grp))
        parts.append(_format_entry(key) + (f"^{n}" if n > 1 else ""))
    return ", ".join(parts)


def format_system(Lc: DivisorClass) -> str:
    body = format_entries(Lc.entries())
    return f"{Lc.degree}; {body}" if body else f"{Lc.degree}"



def parse_system(text: str, prefix: str = "p") -> DivisorClass:
    """Parse 'd; m, m^k, [m1,m2], [m1,m2]^k' (an optional L( ) wrapper is accepted)."""
    src = text.strip()
    offset = len(text) - len(text.lstrip())
    if src.startswith("L(") and src.endswith(")"):
        src = src[2:-1]
        offset += 2
    pos = 0
    n = len(src)

    def err(msg: str) -> ParseError:
        return ParseError(msg, offset + pos, text)

    def skip_ws():
        nonlocal pos
        while pos < n and src[pos].isspace():
            pos += 1

    def integer() -> int:
        nonlocal pos
        skip_ws()
        m = re.match(r"-?\d+", src[pos:])
        if not m:
            raise err("expected an integer")
        pos += m.end()
        return int(m.group())

    def expect(ch: str):
        nonlocal pos
        skip_ws()
        if pos >= n or src[pos] != ch:
            raise err(f"expected {ch!r}")
        pos += 1

    def peek() -> str:
        skip_ws()
        return src[pos] if pos < n else ""

    degree = integer()
    entries: list[Entry] = []
    if peek() == ";":
        expect(";")
        if peek() != "":
            while True:
                if peek() == "[":
                    expect("[")
                    chain = [integer()]
                    while peek() == ",":
                        expect(",")
                        chain.append(integer())
                    expect("]")
                    entry: Entry = tuple(chain)
                else:
                    entry = integer()
                count = 1
                if peek() == "^":
                    expect("^")
                    count = integer()
                    if count < 0:
                        raise err("negative repeat count")
                entries.extend([entry] * count)
                if peek() == ",":
                    expect(",")
                    continue
                break
    if peek() != "":
        raise err("unexpected trailing input")
    return L(degree, entries, prefix)
