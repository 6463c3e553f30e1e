"""Admissible tuples, cross-differences, ``M_d`` and the sub-Möbius axioms."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence

from .extended_line import (
    ExtReal,
    L4Point,
    Pattern,
    Scale,
    degenerate_point,
    format_ext,
    parse_ext,
    signed_permute,
)
from .semimetric import SemiMetricSpace
from .symmetry import S4, act_on_tuple, identity, perm_str, phi, sign4, sorting_perm

Tuple4 = tuple[int, int, int, int]


def is_admissible(p: Sequence) -> bool:
    """No entry three or more times (4-tuples); every deletion admissible (n >= 5)."""
    if len(p) < 4:
        raise ValueError("admissibility is defined for tuples of length >= 4")
    if len(p) == 4:
        return max(Counter(p).values()) < 3
    return all(is_admissible(tuple(p[:i]) + tuple(p[i + 1 :])) for i in range(len(p)))


def is_degenerate(p: Sequence) -> bool:
    return len(set(p)) < len(p)


def degenerate_pattern(p: Sequence) -> Pattern:
    """Pinned value class of an admissible 4-tuple.

    Equal entries inside the pair (12)(34) give A, inside (13)(24) give B,
    inside (14)(23) give C.
    """
    x1, x2, x3, x4 = p
    if x1 == x2 or x3 == x4:
        return Pattern.A
    if x1 == x3 or x2 == x4:
        return Pattern.B
    if x1 == x4 or x2 == x3:
        return Pattern.C
    return Pattern.REGULAR


def admissible_tuples(n: int) -> Iterator[Tuple4]:
    """All admissible 4-tuples over ``range(n)`` in lexicographic order."""
    for p in itertools.product(range(n), repeat=4):
        if max(Counter(p).values()) < 3:
            yield p


def nondegenerate_tuples(n: int) -> Iterator[Tuple4]:
    return itertools.permutations(range(n), 4)


def scale_triples(n: int) -> Iterator[tuple[int, int, int]]:
    return itertools.permutations(range(n), 3)


# -- cross-differences --------------------------------------------------------


def _cd(space: SemiMetricSpace, x1: int, x2: int, x3: int, x4: int) -> ExtReal:
    d = space.dist
    return space.scale.formal_ratio((d[x1][x3], d[x2][x4]), (d[x1][x4], d[x2][x3]))


def cross_difference(space: SemiMetricSpace, p: Sequence[int]) -> ExtReal:
    """``cd(x1,x2,x3,x4) = (x1|x4)+(x2|x3)-(x1|x3)-(x2|x4)`` in the space's scale.

    For ``Scale.MULT`` the returned value is ``e^cd = d13 d24 / (d14 d23)``;
    infinite factors contributed by an infinitely remote point are cancelled
    before evaluation.
    """
    if not is_admissible(p):
        raise ValueError(f"tuple {tuple(p)} is not admissible")
    return _cd(space, *p)


def moebius_value(space: SemiMetricSpace, p: Sequence[int]) -> L4Point:
    """``M_d(P) = (cd(x1,x2,x3,x4), cd(x1,x3,x4,x2), cd(x2,x3,x1,x4))``."""
    x1, x2, x3, x4 = p
    if x1 == x2 or x1 == x3 or x1 == x4 or x2 == x3 or x2 == x4 or x3 == x4:
        pat = degenerate_pattern(p)
        if max(Counter(p).values()) >= 3:
            raise ValueError(f"tuple {tuple(p)} is not admissible")
        return degenerate_point(pat, space.scale)
    d = space.dist
    e1a, e1b = d[x1][x2], d[x3][x4]
    e2a, e2b = d[x1][x3], d[x2][x4]
    e3a, e3b = d[x1][x4], d[x2][x3]
    sc = space.scale
    if space.omega is not None and space.omega in p:
        a = sc.formal_ratio((e2a, e2b), (e3a, e3b))
        b = sc.formal_ratio((e3a, e3b), (e1a, e1b))
        c = sc.formal_ratio((e1a, e1b), (e2a, e2b))
    elif sc is Scale.MULT:
        e1, e2, e3 = e1a * e1b, e2a * e2b, e3a * e3b
        a, b, c = e2 / e3, e3 / e1, e1 / e2
    else:
        e1, e2, e3 = e1a + e1b, e2a + e2b, e3a + e3b
        a, b, c = e2 - e3, e3 - e1, e1 - e2
    return L4Point(a, b, c, sc, Pattern.REGULAR)


# -- sub-Möbius maps ----------------------------------------------------------


@dataclass
class SubMoebiusMap:
    """A map from admissible 4-tuples (of point indices) to the extended plane.

    ``table`` holds explicit values.  With ``representatives=True`` only
    sorted nondegenerate tuples are stored and other tuples are completed by
    signed equivariance on lookup.  Degenerate tuples without an explicit
    entry take the pinned A/B/C values.
    """

    points: tuple[str, ...]
    table: Mapping[tuple, L4Point]
    scale: Scale = Scale.MULT
    representatives: bool = False

    @property
    def n(self) -> int:
        return len(self.points)

    def __call__(self, p: Sequence[int]) -> L4Point:
        p = tuple(p)
        value = self.table.get(p)
        if value is not None:
            return value
        if is_degenerate(p):
            if not is_admissible(p):
                raise KeyError(f"tuple {p} is not admissible")
            return degenerate_point(degenerate_pattern(p), self.scale)
        if self.representatives:
            pi, rep = sorting_perm(p)
            return signed_permute(phi(pi), sign4(pi), self.table[rep])
        raise KeyError(f"no value for tuple {p}")

    def full(self) -> "SubMoebiusMap":
        """Extensional copy listing every nondegenerate tuple explicitly."""
        table = dict(self.table)
        for p in nondegenerate_tuples(self.n):
            table[p] = self(p)
        return SubMoebiusMap(self.points, table, self.scale, False)


def moebius_of(space: SemiMetricSpace, full: bool = False) -> SubMoebiusMap:
    """The Möbius structure ``M_d`` of a semi-metric space.

    By default only sorted representatives are evaluated; ``full=True``
    evaluates the cross-differences on every nondegenerate ordered tuple so
    that the resulting table can be checked for equivariance independently.
    """
    tuples = nondegenerate_tuples(space.n) if full else itertools.combinations(range(space.n), 4)
    table = {p: moebius_value(space, p) for p in tuples}
    return SubMoebiusMap(space.points, table, space.scale, representatives=not full)


@dataclass(order=True)
class AxiomViolation:
    axiom: str
    tuple: tuple
    perm: str = ""
    detail: str = field(default="", compare=False)

    def to_json(self, points: Sequence[str]) -> dict:
        data = {"axiom": self.axiom, "tuple": [points[i] for i in self.tuple], "detail": self.detail}
        if self.perm:
            data["perm"] = self.perm
        return data


@dataclass
class AxiomReport:
    counts: dict = field(default_factory=dict)
    witnesses: list[AxiomViolation] = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.counts

    def __bool__(self):
        return self.ok

    def failed(self, axiom: str) -> bool:
        return self.counts.get(axiom, 0) > 0

    def to_json(self, points: Sequence[str]) -> dict:
        return {
            "ok": self.ok,
            "checked_tuples": self.checked,
            "violation_counts": dict(sorted(self.counts.items())),
            "witnesses": [w.to_json(points) for w in self.witnesses],
        }


def check_axioms(m: SubMoebiusMap, max_witnesses: int = 20) -> AxiomReport:
    """Check (a) signed equivariance, (b) regular iff nondegenerate,
    (c) ``M(x1,x1,x3,x4) = A`` and the six pinned degenerate equalities.

    Every admissible tuple is visited and (a) is tested against all 24
    permutations.  Violations are counted per axiom; the lexicographically
    smallest ones are kept as witnesses.
    """
    found: list[AxiomViolation] = []
    counts: Counter = Counter()

    def flag(v: AxiomViolation):
        counts[v.axiom] += 1
        found.append(v)

    ident = identity(4)
    checked = 0
    values: dict[tuple, Optional[L4Point]] = {}
    for p in admissible_tuples(m.n):
        try:
            values[p] = m(p)
        except KeyError:
            values[p] = None
            flag(AxiomViolation("coverage", p, detail="no value"))
    for p, value in values.items():
        if value is None:
            continue
        checked += 1
        degenerate = is_degenerate(p)
        if value.pattern is Pattern.INVALID:
            flag(AxiomViolation("b", p, detail=f"{value} is not in the extended plane"))
        elif degenerate == value.is_regular:
            flag(AxiomViolation("b", p, detail=f"value {value} for {'degenerate' if degenerate else 'nondegenerate'} tuple"))
        if degenerate:
            expected = degenerate_point(degenerate_pattern(p), m.scale)
            if p[0] == p[1] and value != expected:
                flag(AxiomViolation("c", p, detail=f"expected A, got {value}"))
            elif value != expected:
                flag(AxiomViolation("degenerate", p, detail=f"expected {expected}, got {value}"))
        # sign(pi) is determined by phi(pi), so six images cover all 24 checks
        wants: dict = {}
        for pi in S4:
            if pi == ident:
                continue
            q = act_on_tuple(pi, p)
            other = values.get(q)
            if other is None:
                continue
            key = phi(pi)
            want = wants.get(key)
            if want is None:
                want = wants[key] = signed_permute(key, sign4(pi), value)
            if other != want:
                flag(AxiomViolation("a", p, perm_str(pi), f"M(pi P) = {other}, expected {want}"))
    found.sort()
    kept: Counter = Counter()
    witnesses = []
    for v in found:
        if kept[v.axiom] < max_witnesses:
            kept[v.axiom] += 1
            witnesses.append(v)
    return AxiomReport(dict(counts), witnesses, checked)


# -- JSON ----------------------------------------------------------------------


def table_to_json(m: SubMoebiusMap) -> dict:
    full = m if not m.representatives else m.full()
    entries = [
        {"tuple": [m.points[i] for i in p], "value": full.table[p].to_json()} for p in sorted(full.table)
    ]
    return {"points": list(m.points), "scale": m.scale.value, "table": entries}


def table_from_json(data) -> SubMoebiusMap:
    """Ingest an extensional table; accepts the object form or a bare list."""
    if isinstance(data, list):
        entries = data
        points: list[str] = []
        for e in entries:
            for pid in e["tuple"]:
                if str(pid) not in points:
                    points.append(str(pid))
        scale = Scale.MULT
        mode = "full"
    else:
        entries = data["table"]
        points = [str(p) for p in data["points"]]
        scale = Scale(data.get("scale", "mult"))
        mode = data.get("mode", "full")
    index = {pid: i for i, pid in enumerate(points)}
    table = {}
    for e in entries:
        tup = tuple(index[str(pid)] for pid in e["tuple"])
        if len(tup) != 4:
            raise ValueError(f"table entry {e['tuple']} is not a 4-tuple")
        if len(e["value"]) != 3:
            raise ValueError(f"value for {e['tuple']} must have 3 coordinates")
        table[tup] = L4Point(*(parse_ext(str(x)) for x in e["value"]), scale=scale)
    return SubMoebiusMap(tuple(points), table, scale, representatives=(mode == "representatives"))
