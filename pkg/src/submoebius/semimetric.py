"""Finite semi-metric spaces, metric inversion and Möbius equivalence."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .extended_line import INF, ExtReal, Scale, as_ext, format_ext, parse_ext


@dataclass(frozen=True)
class SemiMetricSpace:
    """Points ``0..n-1`` with ids ``points`` and a full distance matrix.

    Entries are stored in ``scale``: plain distances for ``Scale.MULT`` and
    ``ln d`` for ``Scale.LOG``.  Nothing is validated on construction beyond
    the matrix shape; see :func:`validate_semimetric`.
    """

    points: tuple[str, ...]
    dist: tuple[tuple[ExtReal, ...], ...]
    omega: Optional[int] = None
    scale: Scale = Scale.MULT

    def __post_init__(self):
        n = len(self.points)
        if len(set(self.points)) != n:
            raise ValueError("point ids must be unique")
        if len(self.dist) != n or any(len(row) != n for row in self.dist):
            raise ValueError(f"distance matrix must be {n}x{n}")
        if self.omega is not None and not 0 <= self.omega < n:
            raise ValueError(f"omega index {self.omega} out of range")

    @classmethod
    def from_matrix(cls, points, matrix, omega=None, scale: Scale = Scale.MULT) -> "SemiMetricSpace":
        points = tuple(str(p) for p in points)
        dist = tuple(tuple(as_ext(x) for x in row) for row in matrix)
        if isinstance(omega, str):
            omega = points.index(omega)
        return cls(points, dist, omega, scale)

    @property
    def n(self) -> int:
        return len(self.points)

    def d(self, i: int, j: int) -> ExtReal:
        return self.dist[i][j]

    def index(self, point_id: str) -> int:
        try:
            return self.points.index(point_id)
        except ValueError:
            raise KeyError(f"unknown point id {point_id!r}") from None

    def infinitely_remote(self) -> list[int]:
        n = self.n
        return [w for w in range(n) if n > 1 and all(self.dist[x][w] == INF for x in range(n) if x != w)]

    def with_omega(self) -> "SemiMetricSpace":
        """Copy with ``omega`` set to the detected infinitely remote point."""
        remote = self.infinitely_remote()
        return SemiMetricSpace(self.points, self.dist, remote[0] if len(remote) == 1 else None, self.scale)


@dataclass
class Violation:
    kind: str
    i: int
    j: int
    detail: str = ""

    def to_json(self, points: Sequence[str]) -> dict:
        return {"kind": self.kind, "pair": [points[self.i], points[self.j]], "detail": self.detail}


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def validate_semimetric(space: SemiMetricSpace) -> ValidationReport:
    """List every violated semi-metric axiom with witnessing indices."""
    sc = space.scale
    out: list[Violation] = []
    n = space.n
    for i in range(n):
        for j in range(n):
            x = space.dist[i][j]
            if not sc.is_valid(x):
                out.append(Violation("value", i, j, f"{format_ext(x)} is not a {sc.value} distance"))
                continue
            if i == j:
                if x != sc.zero:
                    out.append(Violation("diagonal", i, j, f"d(x,x) = {format_ext(x)}"))
                continue
            if x == sc.zero:
                out.append(Violation("positivity", i, j, "d(x,y) = 0 for x != y"))
            if j > i and x != space.dist[j][i]:
                out.append(
                    Violation("symmetry", i, j, f"{format_ext(x)} != {format_ext(space.dist[j][i])}")
                )
    remote = space.infinitely_remote()
    if len(remote) > 1:
        w = remote[1]
        out.append(Violation("remote", remote[0], w, "more than one infinitely remote point"))
    remote_set = set(remote[:1])
    for i in range(n):
        for j in range(n):
            if i != j and space.dist[i][j] == INF and not remote_set & {i, j}:
                out.append(Violation("infinite", i, j, "infinite distance between ordinary points"))
    if space.omega is not None and space.omega not in remote:
        out.append(Violation("omega", space.omega, space.omega, "declared omega is not infinitely remote"))
    out.sort(key=lambda v: (v.i, v.j, v.kind))
    return ValidationReport(out)


def metric_inversion(space: SemiMetricSpace, center: int, r) -> SemiMetricSpace:
    """``d'(x,y) = r^2 d(x,y) / (d(x,c) d(y,c))`` with ``d'(c,c) = 0``.

    ``r`` is in the space's scale (so ``ln r`` for log spaces).  Zero and
    infinite factors cancel formally; in particular, if the input has an
    infinitely remote point ``w != c`` then ``d'(x, w) = r^2 / d(x, c)``.
    """
    sc = space.scale
    r = as_ext(r)
    if not sc.is_positive_finite(r):
        raise ValueError("inversion radius must be positive and finite")
    if center in space.infinitely_remote():
        raise ValueError(f"point {space.points[center]!r} is already infinitely remote")
    r2 = sc.power(r, 2)
    n = space.n
    rows = []
    for x in range(n):
        row = []
        for y in range(n):
            if x == y:
                row.append(sc.zero)
            else:
                row.append(sc.formal_ratio((r2, space.dist[x][y]), (space.dist[x][center], space.dist[y][center])))
        rows.append(tuple(row))
    return SemiMetricSpace(space.points, tuple(rows), center, sc)


def rescale(space: SemiMetricSpace, lam) -> SemiMetricSpace:
    """Multiply every distance by ``lam`` (given in the space's scale)."""
    sc = space.scale
    lam = as_ext(lam)
    if not sc.is_positive_finite(lam):
        raise ValueError("scale factor must be positive and finite")
    rows = tuple(
        tuple(x if (x == sc.zero or x == INF) else sc.combine(lam, x) for x in row) for row in space.dist
    )
    return SemiMetricSpace(space.points, rows, space.omega, sc)


def chart(space: SemiMetricSpace, alpha: int, beta: int, omega: int) -> SemiMetricSpace:
    """The semi-metric in the Möbius class of ``space`` with ``omega``
    infinitely remote and ``d(alpha, beta) = 1``: a radius-1 inversion at
    ``omega`` (unless it is already remote) followed by a rescaling."""
    if len({alpha, beta, omega}) != 3:
        raise ValueError("chart needs three distinct points")
    sc = space.scale
    s = space if omega in space.infinitely_remote() else metric_inversion(space, omega, sc.unit)
    s = SemiMetricSpace(s.points, s.dist, omega, sc)
    return rescale(s, sc.invert(s.dist[alpha][beta]))


@dataclass
class EquivalenceResult:
    equivalent: bool
    witness: Optional[tuple[int, ...]] = None
    left: object = None
    right: object = None

    def __bool__(self):
        return self.equivalent


def moebius_equivalent(s1: SemiMetricSpace, s2: SemiMetricSpace, exhaustive: bool = False) -> EquivalenceResult:
    """Compare ``M_{d1}`` and ``M_{d2}`` exactly.

    By signed equivariance both maps are determined by their values on
    sorted nondegenerate 4-tuples, which is what the default scan visits;
    ``exhaustive=True`` visits every admissible 4-tuple instead.  The first
    differing tuple in lexicographic order is returned as the witness.
    """
    from .cross_ratio import admissible_tuples, moebius_value

    if s1.n != s2.n:
        raise ValueError("spaces must share the point set")
    if s1.scale is not s2.scale:
        raise ValueError("cannot compare spaces with different scales")
    tuples = admissible_tuples(s1.n) if exhaustive else itertools.combinations(range(s1.n), 4)
    for p in tuples:
        a, b = moebius_value(s1, p), moebius_value(s2, p)
        if a != b:
            return EquivalenceResult(False, tuple(p), a, b)
    return EquivalenceResult(True)


# -- builders ---------------------------------------------------------------


def line_space(coords: Sequence, ids: Optional[Sequence[str]] = None) -> SemiMetricSpace:
    """Points on the real line with ``d(s, t) = |s - t|``."""
    coords = [Fraction(c) for c in coords]
    ids = [str(i) for i in ids] if ids is not None else [str(c) for c in coords]
    matrix = [[abs(s - t) for t in coords] for s in coords]
    return SemiMetricSpace.from_matrix(ids, matrix)


def add_remote_point(space: SemiMetricSpace, point_id: str = "w") -> SemiMetricSpace:
    """Append an infinitely remote point to a space without one."""
    if space.infinitely_remote():
        raise ValueError("space already has an infinitely remote point")
    sc = space.scale
    rows = [tuple(row) + (INF,) for row in space.dist]
    rows.append(tuple([INF] * space.n + [sc.zero]))
    return SemiMetricSpace(space.points + (point_id,), tuple(rows), space.n, sc)


def random_space(rng: random.Random, n: int, with_omega: bool = False, max_num: int = 9) -> SemiMetricSpace:
    """Random rational semi-metric (no triangle inequality) on ``n`` points."""
    m = n - 1 if with_omega else n
    matrix = [[Fraction(0)] * m for _ in range(m)]
    for i, j in itertools.combinations(range(m), 2):
        matrix[i][j] = matrix[j][i] = Fraction(rng.randint(1, max_num), rng.randint(1, max_num))
    space = SemiMetricSpace.from_matrix([f"p{i}" for i in range(m)], matrix)
    if with_omega:
        space = add_remote_point(space, f"p{m}")
    return space


# -- JSON -------------------------------------------------------------------


def space_to_json(space: SemiMetricSpace) -> dict:
    data = {
        "points": list(space.points),
        "omega": space.points[space.omega] if space.omega is not None else None,
        "matrix": [[format_ext(x) for x in row] for row in space.dist],
    }
    if space.scale is Scale.LOG:
        data["scale"] = "log"
    return data


def space_from_json(data: dict) -> SemiMetricSpace:
    for key in ("points", "matrix"):
        if key not in data:
            raise KeyError(key)
    scale = Scale(data.get("scale", "mult"))
    matrix = [[parse_ext(str(x)) for x in row] for row in data["matrix"]]
    omega = data.get("omega")
    points = [str(p) for p in data["points"]]
    if omega is not None and str(omega) not in points:
        raise ValueError(f"omega {omega!r} is not among the points")
    return SemiMetricSpace.from_matrix(points, matrix, str(omega) if omega is not None else None, scale)
