"""Scaled distances of a sub-Möbius structure, the Möbius criterion and
semi-metric reconstruction.

Throughout, ``A = (alpha, beta, omega)`` is a scale triple and the 5-tuple
``(x, y, alpha, beta, omega)`` has the faces

    P1 = (y, alpha, beta, omega)   P2 = (x, alpha, beta, omega)
    P3 = (x, y, beta, omega)       P4 = (x, y, alpha, omega)

Values are computed in the map's scale, so for log-scale maps every
"distance" below is ``ln d``.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .cross_ratio import SubMoebiusMap, check_axioms, is_admissible
from .extended_line import UNDEFINED, ExtReal, format_ext
from .semimetric import SemiMetricSpace

ALPHA = "alpha"
BETA = "beta"


@dataclass(frozen=True, order=True)
class ScaleTriple:
    alpha: int
    beta: int
    omega: int

    def __post_init__(self):
        if len({self.alpha, self.beta, self.omega}) != 3:
            raise ValueError(f"scale triple entries must be pairwise distinct: {tuple(self)}")

    def __iter__(self):
        return iter((self.alpha, self.beta, self.omega))

    def label(self, points) -> str:
        return ",".join(points[i] for i in self)


def parse_scale_triple(text: str, points) -> ScaleTriple:
    parts = [s.strip() for s in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"scale triple needs three comma-separated ids, got {text!r}")
    idx = []
    for pid in parts:
        if pid not in points:
            raise KeyError(f"unknown point id {pid!r} in scale triple")
        idx.append(list(points).index(pid))
    return ScaleTriple(*idx)


def faces(a: ScaleTriple, x: int, y: int):
    al, be, om = a
    return (y, al, be, om), (x, al, be, om), (x, y, be, om), (x, y, al, om)


def _checked(value, what: str):
    if value is UNDEFINED:
        raise ArithmeticError(f"{what} is not well defined")
    return value


def scaled_distance(m: SubMoebiusMap, a: ScaleTriple, x: int, y: int, side: str = ALPHA) -> ExtReal:
    """``d_A^alpha(x,y) = e^{-b(P1)-b(P4)}`` or ``d_A^beta(x,y) = e^{a(P1)-b(P3)}``.

    Returns the scale's zero when ``(x, y, A)`` is not admissible.  The
    alpha side requires ``y != alpha``, the beta side ``y != beta``.
    """
    sc = m.scale
    if not is_admissible((x, y, *a)):
        return sc.zero
    p1, _, p3, p4 = faces(a, x, y)
    if side == ALPHA:
        if y == a.alpha:
            raise ValueError("alpha-side distance is undefined for y == alpha")
        s = _checked(sc.combine(m(p1).b, m(p4).b), "b(P1)+b(P4)")
        return sc.invert(s)
    if side == BETA:
        if y == a.beta:
            raise ValueError("beta-side distance is undefined for y == beta")
        return _checked(sc.divide(m(p1).a, m(p3).b), "a(P1)-b(P3)")
    raise ValueError(f"side must be {ALPHA!r} or {BETA!r}")


@dataclass
class ConditionResult:
    tag: str
    holds: bool
    left: object
    right: object

    def to_json(self) -> dict:
        return {"condition": self.tag, "holds": self.holds, "left": _fmt(self.left), "right": _fmt(self.right)}


def _fmt(x) -> str:
    return "undefined" if x is UNDEFINED else format_ext(x)


def check_conditions(m: SubMoebiusMap, a: ScaleTriple, x: int, y: int) -> list[ConditionResult]:
    """Evaluate conditions (A) and (B) on the 5-tuple ``(x, y, A)``.

    (A)  b(P1) + b(P4) = b(P3) - a(P1)     for y not in {alpha, beta}
    (B)  b(P2) = -a(P4) + b(P1)            for y not in {alpha, omega}

    Both sides are compared exactly in the map's scale.  An undefined side
    (possible only for tables violating the axioms) counts as a failure.
    """
    if not is_admissible((x, y, *a)):
        raise ValueError(f"5-tuple {(x, y, *a)} is not admissible")
    sc = m.scale
    p1, p2, p3, p4 = faces(a, x, y)
    out = []
    if y not in (a.alpha, a.beta):
        m1, m3, m4 = m(p1), m(p3), m(p4)
        left = sc.combine(m1.b, m4.b)
        right = sc.divide(m3.b, m1.a)
        out.append(ConditionResult("A", left is not UNDEFINED and left == right, left, right))
    if y not in (a.alpha, a.omega):
        m1, m2, m4 = m(p1), m(p2), m(p4)
        left = m2.b
        right = sc.divide(m1.b, m4.a)
        out.append(ConditionResult("B", right is not UNDEFINED and left == right, left, right))
    return out


@dataclass
class MoebiusWitness:
    triple: ScaleTriple
    x: int
    y: int
    condition: str
    left: object
    right: object

    def key(self):
        return (self.triple, self.x, self.y, self.condition)

    def to_json(self, points) -> dict:
        return {
            "scale_triple": [points[i] for i in self.triple],
            "five_tuple": [points[i] for i in (self.x, self.y, *self.triple)],
            "condition": self.condition,
            "left": _fmt(self.left),
            "right": _fmt(self.right),
        }


@dataclass
class MoebiusVerdict:
    is_moebius: bool
    witness: Optional[MoebiusWitness] = None
    checked: int = 0
    axioms_ok: Optional[bool] = None

    def __bool__(self):
        return self.is_moebius

    def to_json(self, points) -> dict:
        data = {"is_moebius": self.is_moebius, "checked_five_tuples": self.checked}
        if self.axioms_ok is not None:
            data["axioms_ok"] = self.axioms_ok
        data["witness"] = self.witness.to_json(points) if self.witness else None
        return data


def _scan(m: SubMoebiusMap, triples) -> tuple[Optional[MoebiusWitness], int]:
    checked = 0
    for t in triples:
        a = ScaleTriple(*t)
        for x, y in itertools.product(range(m.n), repeat=2):
            if not is_admissible((x, y, *a)):
                continue
            checked += 1
            for res in check_conditions(m, a, x, y):
                if not res.holds:
                    return MoebiusWitness(a, x, y, res.tag, res.left, res.right), checked
    return None, checked


def _scan_chunk(args):
    m, triples = args
    return _scan(m, triples)


def is_moebius(m: SubMoebiusMap, jobs: int = 1, require_axioms: bool = False) -> MoebiusVerdict:
    """Scan every scale triple and admissible ``(x, y, A)`` for (A)/(B).

    Triples are visited in lexicographic order, then ``(x, y)`` pairs; the
    first failure is the witness (independent of ``jobs``).  With
    ``require_axioms`` the sub-Möbius axioms are checked first and a failing
    table is reported as not Möbius without a witness.
    """
    axioms_ok = None
    if require_axioms:
        axioms_ok = check_axioms(m).ok
        if not axioms_ok:
            return MoebiusVerdict(False, None, 0, False)
    triples = list(itertools.permutations(range(m.n), 3))
    if jobs <= 1 or len(triples) < 2 * jobs:
        witness, checked = _scan(m, triples)
        if witness is None:
            return MoebiusVerdict(True, None, checked, axioms_ok)
        return MoebiusVerdict(False, witness, checked, axioms_ok)
    size = -(-len(triples) // jobs)
    chunks = [triples[i : i + size] for i in range(0, len(triples), size)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(_scan_chunk, [(m, c) for c in chunks]))
    # The first chunk (in order) that failed holds the lexicographic minimum;
    # the count is reported as for a sequential scan up to that witness.
    checked = 0
    for witness, count in results:
        checked += count
        if witness is not None:
            return MoebiusVerdict(False, witness, checked, axioms_ok)
    return MoebiusVerdict(True, None, checked, axioms_ok)


class NotMoebiusError(ValueError):
    def __init__(self, verdict: MoebiusVerdict):
        self.verdict = verdict
        w = verdict.witness
        where = f" (condition {w.condition} fails at x={w.x}, y={w.y}, A={tuple(w.triple)})" if w else ""
        super().__init__("structure is not Möbius" + where)


def reconstruct_semimetric(m: SubMoebiusMap, a: ScaleTriple, check: bool = True) -> SemiMetricSpace:
    """The semi-metric ``d_A`` with ``omega`` infinitely remote and
    ``d_A(alpha, beta) = 1``.

    Uses the alpha-side formula, falling back to the beta side when
    ``y == alpha``.  With ``check`` the Möbius criterion is verified first
    and :class:`NotMoebiusError` carries the failing witness.
    """
    if check:
        verdict = is_moebius(m)
        if not verdict:
            raise NotMoebiusError(verdict)
    rows = []
    for x in range(m.n):
        row = []
        for y in range(m.n):
            side = BETA if y == a.alpha else ALPHA
            row.append(scaled_distance(m, a, x, y, side))
        rows.append(tuple(row))
    return SemiMetricSpace(m.points, tuple(rows), a.omega, m.scale)


def scale_change_factor(m: SubMoebiusMap, a: ScaleTriple, y: int) -> tuple[Optional[ExtReal], Optional[ExtReal]]:
    """Constants ``(lambda, mu)`` with

        d_A^alpha(x, y) * d_{(alpha, omega, y)}^alpha(x, omega) = lambda
        d_A^beta(x, y)  * d_{(omega, beta, y)}^beta(x, omega)  = mu

    i.e. ``lambda = e^{-b(P1)}`` and ``mu = e^{a(P1)}``.  ``lambda`` needs
    ``y not in {alpha, omega}`` and ``mu`` needs ``y not in {beta, omega}``;
    the unavailable one is returned as ``None``.
    """
    if y == a.omega:
        raise ValueError("no scale change factor for y == omega")
    sc = m.scale
    p1 = (y, a.alpha, a.beta, a.omega)
    value = m(p1)
    lam = sc.invert(value.b) if y != a.alpha else None
    mu = value.a if y != a.beta else None
    return lam, mu


@dataclass
class ScaledDistanceTable:
    """Both scaled distance functions of one scale triple, for reports."""

    triple: ScaleTriple
    alpha: dict = field(default_factory=dict)
    beta: dict = field(default_factory=dict)


def scaled_distance_table(m: SubMoebiusMap, a: ScaleTriple) -> ScaledDistanceTable:
    table = ScaledDistanceTable(a)
    for x, y in itertools.product(range(m.n), repeat=2):
        if y != a.alpha:
            table.alpha[(x, y)] = scaled_distance(m, a, x, y, ALPHA)
        if y != a.beta:
            table.beta[(x, y)] = scaled_distance(m, a, x, y, BETA)
    return table
