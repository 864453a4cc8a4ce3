"""Cremona reduction, classification and the dimension algorithm for few points."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

from .lattice import (
    Configuration,
    ConfigurationError,
    DivisorClass,
    PointNode,
    enumerate_negative_classes,
    exceptional,
    format_entries,
    pair,
    virtual_dim,
)


class InvalidTriple(ValueError):
    pass


class BoundExceeded(RuntimeError):
    pass


PROVEN = "PROVEN"
CONJECTURAL = "CONJECTURAL"


@dataclass(frozen=True)
class QuadraticTransform:
    triple: tuple[str, str, str]
    before: DivisorClass
    after: DivisorClass
    infinitely_near: bool = False

    kind = "quadratic"


@dataclass(frozen=True)
class SplitCurve:
    cls: DivisorClass
    times: int

    kind = "split"


Step = Union[QuadraticTransform, SplitCurve]


def quadratic_transform(Lc: DivisorClass, triple: Sequence[str]) -> DivisorClass:
    """d' = 2d - (m1+m2+m3), mi' = d - mj - mk on the three labels; others untouched."""
    triple = tuple(triple)
    if len(triple) != 3 or len(set(triple)) != 3:
        raise InvalidTriple(f"need three distinct labels, got {triple}")
    idx = [Lc.config.index(t) for t in triple]
    d = Lc.degree
    s = sum(Lc.mults[i] for i in idx)
    mults = list(Lc.mults)
    for i in idx:
        mults[i] = d - (s - Lc.mults[i])
    return Lc.replace(2 * d - s, mults)


@dataclass
class TransformLog:
    start: DivisorClass
    steps: list[Step] = field(default_factory=list)
    empty: bool = False

    @property
    def final(self) -> DivisorClass:
        cur = self.start
        for st in self.steps:
            if isinstance(st, QuadraticTransform):
                cur = st.after
            else:
                cur = cur - st.times * st.cls
        return cur

    def quadratic_steps(self) -> list[QuadraticTransform]:
        return [s for s in self.steps if isinstance(s, QuadraticTransform)]

    def replay(self) -> DivisorClass:
        """Recompute the final class from the start using only the recorded operations."""
        cur = self.start
        for st in self.steps:
            if isinstance(st, QuadraticTransform):
                cur = quadratic_transform(cur, st.triple)
            else:
                cur = cur - st.times * st.cls
        return cur

    def render(self) -> str:
        """One row per state: degree, then every multiplicity; bases of the next transform are _marked_."""
        rows = []
        cur = self.start
        for st in self.steps:
            if isinstance(st, QuadraticTransform):
                rows.append(_row(st.before, set(st.triple)))
                cur = st.after
            else:
                rows.append(f"  split {format_class(st.cls)} x{st.times}")
                cur = cur - st.times * st.cls
        rows.append(_row(cur, set()))
        if self.empty:
            rows.append("  empty: negative degree")
        return "\n".join(rows)

    def to_json(self) -> dict:
        steps = []
        for st in self.steps:
            if isinstance(st, QuadraticTransform):
                steps.append({
                    "kind": "quadratic",
                    "triple": list(st.triple),
                    "before": st.before.to_json(),
                    "after": st.after.to_json(),
                    "infinitely_near": st.infinitely_near,
                })
            else:
                steps.append({"kind": "split", "class": st.cls.to_json(), "times": st.times})
        return {"start": self.start.to_json(), "steps": steps, "empty": self.empty,
                "final": self.final.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "TransformLog":
        steps: list[Step] = []
        for st in data["steps"]:
            if st["kind"] == "quadratic":
                steps.append(QuadraticTransform(tuple(st["triple"]), DivisorClass.from_json(st["before"]),
                                                DivisorClass.from_json(st["after"]), st["infinitely_near"]))
            else:
                steps.append(SplitCurve(DivisorClass.from_json(st["class"]), int(st["times"])))
        return cls(DivisorClass.from_json(data["start"]), steps, bool(data["empty"]))


def _row(Lc: DivisorClass, marked: set[str]) -> str:
    labels = Lc.config.labels
    cells = []
    for chain in Lc.config.chains():
        parts = []
        for i in chain:
            text = str(Lc.mults[i])
            parts.append(f"_{text}_" if labels[i] in marked else text)
        cells.append(parts[0] if len(parts) == 1 else "[" + ",".join(parts) + "]")
    return f"{Lc.degree}; " + ", ".join(cells) if cells else f"{Lc.degree}"


def format_class(Lc: DivisorClass, compact: bool = False) -> str:
    """L(d; ...) notation; compact drops compound points whose multiplicities are all zero."""
    entries = Lc.entries()
    if compact:
        entries = tuple(e for e in entries if not (isinstance(e, tuple) and not any(e)))
    body = format_entries(entries)
    return f"L({Lc.degree}; {body})" if body else f"L({Lc.degree})"


def _pad(Lc: DivisorClass, n: int = 3) -> DivisorClass:
    """Add phantom multiplicity-zero points so that a transform always has three bases."""
    missing = n - Lc.k
    if missing <= 0:
        return Lc
    cfg = Lc.config.extend(PointNode(f"z{i + 1}") for i in range(missing))
    return DivisorClass(Lc.degree, Lc.mults + (0,) * missing, cfg)


def _order(Lc: DivisorClass) -> list[int]:
    """Descending multiplicity; points infinitely near come after free ones, then label order."""
    cfg = Lc.config
    return sorted(range(Lc.k), key=lambda i: (-Lc.mults[i], cfg.depth(i), i))


def is_standard(Lc: DivisorClass) -> bool:
    if Lc.degree < 0 or any(m < 0 for m in Lc.mults):
        return False
    top = sorted(Lc.mults, reverse=True)[:3]
    return sum(top) <= Lc.degree


def reduce_to_standard(Lc: DivisorClass, cap: int | None = None) -> tuple[DivisorClass, TransformLog]:
    """Clamp negative multiplicities, then transform at the three largest while they exceed the degree."""
    cur = _pad(Lc)
    log = TransformLog(cur)
    cap = cap if cap is not None else 10 * (cur.k + abs(cur.degree) + 1)
    for _ in range(cap):
        for i, m in enumerate(cur.mults):
            if m < 0:
                E = exceptional(cur.config, cur.config.labels[i])
                log.steps.append(SplitCurve(E, -m))
                cur = cur + m * E
        if cur.degree < 0:
            log.empty = True
            return cur, log
        order = _order(cur)
        top = order[:3]
        if sum(cur.mults[i] for i in top) <= cur.degree:
            return cur, log
        triple = tuple(cur.config.labels[i] for i in top)
        after = quadratic_transform(cur, triple)
        near = any(not cur.config.is_free(i) for i in top)
        log.steps.append(QuadraticTransform(triple, cur, after, near))
        cur = after
    raise BoundExceeded("reduction did not terminate within the iteration cap")


def split_fixed_neg_curves(
    Lc: DivisorClass, cfg: Configuration | None = None, degree_bound: int = 5
) -> tuple[DivisorClass, list[tuple[DivisorClass, int]]]:
    """Subtract nE for every enumerated (-1)-class E with L.E = -n < 0 until none remain."""
    cfg = cfg or Lc.config
    classes = [c.cls for c in enumerate_negative_classes(cfg, None, degree_bound, -1)]
    residual = Lc
    splits: list[tuple[DivisorClass, int]] = []
    cap = 10 * (len(cfg) + abs(Lc.degree) + 1)
    for _ in range(cap):
        worst = None
        for E in classes:
            p = pair(residual, E)
            if p < 0 and (worst is None or p < worst[1]):
                worst = (E, p)
        if worst is None:
            return residual, splits
        E, p = worst
        residual = residual + p * E
        splits.append((E, -p))
        if residual.degree < 0:
            return residual, splits
    raise BoundExceeded("splitting did not terminate within the iteration cap")


EMPTY = "EMPTY"
STANDARD = "STANDARD"
CREMONA_REDUCIBLE = "CREMONA-REDUCIBLE"
MINUS_ONE_SPECIAL = "MINUS-ONE-SPECIAL"
EXCELLENT = "EXCELLENT"
ALMOST_EXCELLENT = "ALMOST-EXCELLENT"


@dataclass(frozen=True)
class Classification:
    kind: str
    standard_form: DivisorClass | None
    log: TransformLog
    witnesses: tuple = ()

    @property
    def anticanonical_degree(self) -> int | None:
        if self.standard_form is None:
            return None
        f = self.standard_form
        return 3 * f.degree - sum(f.mults)


def classify(Lc: DivisorClass, cfg: Configuration | None = None, degree_bound: int = 5) -> Classification:
    if cfg is not None and cfg.labels != Lc.config.labels:
        raise ConfigurationError("class does not live over the given configuration")
    final, log = reduce_to_standard(Lc)
    if log.empty:
        return Classification(EMPTY, None, log)
    bad = [c for c in enumerate_negative_classes(Lc.config, Lc, degree_bound, -1) if c.pairing <= -2]
    if bad:
        return Classification(MINUS_ONE_SPECIAL, final, log, tuple((c.cls, -c.pairing) for c in bad))
    t = 3 * final.degree - sum(final.mults)
    if t > 0:
        kind = EXCELLENT
    elif t == 0:
        kind = ALMOST_EXCELLENT
    elif not log.steps:
        kind = STANDARD
    else:
        kind = CREMONA_REDUCIBLE
    return Classification(kind, final, log, (final,))


@dataclass(frozen=True)
class DimResult:
    dim: int
    status: str
    log: TransformLog
    residual: DivisorClass | None = None


def shgh_dim(Lc: DivisorClass, cfg: Configuration | None = None) -> DimResult:
    """Dimension predicted by reduction to standard form; proven for at most nine general points."""
    if cfg is not None and cfg.labels != Lc.config.labels:
        raise ConfigurationError("class does not live over the given configuration")
    final, log = reduce_to_standard(Lc)
    essential = sum(1 for m in Lc.mults if m != 0)
    status = PROVEN if (essential <= 9 and Lc.config.all_free) else CONJECTURAL
    if log.empty:
        return DimResult(-1, status, log, final)
    return DimResult(max(-1, virtual_dim(final)), status, log, final)


def dim_by_splitting(Lc: DivisorClass, degree_bound: int = 6) -> int:
    """Second route to the same number: remove negative (-1)-curves, then count."""
    residual, _ = split_fixed_neg_curves(Lc, Lc.config, degree_bound)
    if residual.degree < 0:
        return -1
    return max(-1, virtual_dim(residual))


EMPTY_CONJECTURAL = "EMPTY-CONJECTURAL"
EMPTY_PROVEN = "EMPTY-PROVEN"
NO_PREDICTION = "NO-PREDICTION"


def nagata_empty(Lc: DivisorClass, k: int | None = None) -> str:
    """Emptiness predicted when (sum m)^2 >= d^2 k; unconditional when k is a perfect square."""
    k = Lc.k if k is None else k
    if k < 10:
        raise ValueError("the emptiness prediction is stated for k >= 10 points")
    total = sum(Lc.mults)
    if total >= 0 and total * total >= Lc.degree * Lc.degree * k:
        return EMPTY_PROVEN if math.isqrt(k) ** 2 == k else EMPTY_CONJECTURAL
    return NO_PREDICTION
