"""Finite Gromov-product boundary models and their sub-Möbius structures.

A model stores the Gromov products ``(x|y)_o`` of a finite "boundary" with
respect to a basepoint.  Everything here is log-scale exact: the semi-metric
``d_o = e^{-(x|y)_o}`` is represented by its logarithm ``-(x|y)_o``.
"""

from __future__ import annotations

import itertools
import random
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .cross_ratio import (
    SubMoebiusMap,
    admissible_tuples,
    degenerate_pattern,
    is_degenerate,
    moebius_of,
    nondegenerate_tuples,
)
from .extended_line import INF, L4Point, Pattern, Scale, as_ext, degenerate_point, format_ext, parse_ext, signed_permute
from .semimetric import SemiMetricSpace, validate_semimetric
from .symmetry import S4, act_on_tuple, inverse, phi, sign4


@dataclass(frozen=True)
class GromovProductModel:
    boundary: tuple[str, ...]
    gp: tuple[tuple, ...]
    h: Fraction

    @property
    def n(self) -> int:
        return len(self.boundary)

    def space(self) -> SemiMetricSpace:
        """Log-scale semi-metric ``ln d_o(x, y) = -(x|y)_o``."""
        rows = tuple(tuple(-x for x in row) for row in self.gp)
        return SemiMetricSpace(self.boundary, rows, None, Scale.LOG)


def hyperbolicity_constant(gp: Sequence[Sequence]) -> Fraction:
    """Smallest ``h`` such that in every triple of Gromov products the two
    lowest differ by at most ``h``."""
    h = Fraction(0)
    for x, y, z in itertools.combinations(range(len(gp)), 3):
        lo, mid, _ = sorted((gp[x][y], gp[x][z], gp[y][z]))
        h = max(h, mid - lo)
    return h


def _model(boundary, gp) -> GromovProductModel:
    gp = tuple(tuple(row) for row in gp)
    return GromovProductModel(tuple(boundary), gp, hyperbolicity_constant(gp))


def model_from_gp(boundary: Sequence[str], gp: Sequence[Sequence]) -> GromovProductModel:
    """Validate a raw Gromov-product matrix (diagonal ``inf``, finite and
    symmetric elsewhere) and compute its hyperbolicity constant."""
    n = len(boundary)
    if len(gp) != n or any(len(row) != n for row in gp):
        raise ValueError(f"gp matrix must be {n}x{n}")
    gp = [[as_ext(x) for x in row] for row in gp]
    for i in range(n):
        if gp[i][i] != INF:
            raise ValueError(f"gp[{i}][{i}] must be inf")
        for j in range(n):
            if i != j and (gp[i][j] == INF or gp[i][j] != gp[j][i] or not isinstance(gp[i][j], Fraction)):
                raise ValueError(f"gp[{i}][{j}] must be finite and symmetric")
    if n < 2:
        raise ValueError("a boundary model needs at least two points")
    return _model([str(b) for b in boundary], gp)


def build_from_metric(space: SemiMetricSpace, basepoint: str) -> GromovProductModel:
    """``(y|y')_o = (|yo| + |y'o| - |yy'|) / 2`` over the points other than ``o``."""
    if space.scale is not Scale.MULT:
        raise ValueError("metric source must be given in multiplicative scale")
    report = validate_semimetric(space)
    if not report.ok or space.infinitely_remote():
        raise ValueError("metric source must be a finite semi-metric")
    d = space.dist
    n = space.n
    for x, y, z in itertools.permutations(range(n), 3):
        if d[x][z] > d[x][y] + d[y][z]:
            raise ValueError(f"triangle inequality fails for {space.points[x]}, {space.points[y]}, {space.points[z]}")
    o = space.index(basepoint)
    rest = [i for i in range(n) if i != o]
    gp = [[INF if y == z else (d[y][o] + d[z][o] - d[y][z]) / 2 for z in rest] for y in rest]
    return _model([space.points[i] for i in rest], gp)


@dataclass(frozen=True)
class Tree:
    """Rooted tree given by ``(parent, child, length)`` edges."""

    edges: tuple[tuple[str, str, Fraction], ...]
    root: str

    def children(self) -> dict:
        out = defaultdict(list)
        for parent, child, _ in self.edges:
            out[parent].append(child)
        return out

    def leaves(self) -> list[str]:
        kids = self.children()
        nodes = {self.root} | {c for _, c, _ in self.edges}
        return sorted(v for v in nodes if v != self.root and not kids.get(v))

    def validate(self) -> None:
        parents = {}
        for parent, child, length in self.edges:
            if not isinstance(length, Fraction) or length <= 0:
                raise ValueError(f"edge {parent}-{child} needs a positive rational length")
            if child in parents:
                raise ValueError(f"node {child!r} has two parents")
            if child == self.root:
                raise ValueError("root cannot be a child")
            parents[child] = parent
        for node in parents:
            seen = set()
            v = node
            while v != self.root:
                if v in seen or v not in parents:
                    raise ValueError(f"node {node!r} is not connected to the root")
                seen.add(v)
                v = parents[v]
        if len(self.leaves()) < 2:
            raise ValueError("tree needs at least two leaves")

    def rerooted(self, new_root: str) -> "Tree":
        adj = defaultdict(list)
        for p, c, w in self.edges:
            adj[p].append((c, w))
            adj[c].append((p, w))
        if new_root not in adj:
            raise KeyError(f"unknown vertex {new_root!r}")
        edges, seen, stack = [], {new_root}, [new_root]
        while stack:
            v = stack.pop()
            for u, w in sorted(adj[v]):
                if u not in seen:
                    seen.add(u)
                    edges.append((v, u, w))
                    stack.append(u)
        return Tree(tuple(edges), new_root)


def build_from_tree(tree: Tree, basepoint: Optional[str] = None, boundary: Optional[Sequence[str]] = None) -> GromovProductModel:
    """Leaf boundary of a rooted tree; ``(u|v)_o`` is the depth of the
    lowest common ancestor when the tree hangs from ``o``.

    ``boundary`` defaults to the leaves of ``tree`` as rooted; re-rooting at
    ``basepoint`` keeps that boundary.
    """
    tree.validate()
    leaves = list(boundary) if boundary is not None else tree.leaves()
    if basepoint is not None and basepoint != tree.root:
        if basepoint in leaves:
            raise ValueError("basepoint cannot be a boundary point")
        tree = tree.rerooted(basepoint)
    parent, depth = {}, {tree.root: Fraction(0)}
    kids = defaultdict(list)
    for p, c, w in tree.edges:
        parent[c] = p
        kids[p].append((c, w))
    stack = [tree.root]
    while stack:
        v = stack.pop()
        for c, w in kids[v]:
            depth[c] = depth[v] + w
            stack.append(c)

    def ancestors(v):
        chain = [v]
        while v in parent:
            v = parent[v]
            chain.append(v)
        return chain

    chains = {leaf: ancestors(leaf) for leaf in leaves}
    gp = []
    for u in leaves:
        row = []
        anc_u = set(chains[u])
        for v in leaves:
            if u == v:
                row.append(INF)
            else:
                lca = next(a for a in chains[v] if a in anc_u)
                row.append(depth[lca])
        gp.append(row)
    return _model(leaves, gp)


def binary_tree(depth: int, length=1) -> Tree:
    """Balanced binary tree; node ids are root-to-node bit strings under ``r``."""
    length = Fraction(length)
    edges = []
    level = ["r"]
    for _ in range(depth):
        nxt = []
        for v in level:
            for bit in "01":
                edges.append((v, v + bit, length))
                nxt.append(v + bit)
        level = nxt
    return Tree(tuple(edges), "r")


def caterpillar_tree(n_leaves: int, lengths: Optional[Sequence] = None) -> Tree:
    """A spine ``s0 - s1 - ...`` with one leaf hanging from each spine vertex."""
    if lengths is None:
        lengths = [Fraction(k % 3 + 1, 1) for k in range(2 * n_leaves)]
    lengths = [Fraction(x) for x in lengths]
    edges = []
    for k in range(n_leaves - 1):
        edges.append((f"s{k}", f"s{k + 1}", lengths[2 * k]))
        edges.append((f"s{k}", f"l{k}", lengths[2 * k + 1]))
    edges.append((f"s{n_leaves - 1}", f"l{n_leaves - 1}", lengths[-1]))
    return Tree(tuple(edges), "s0")


# -- Möbius structures --------------------------------------------------------


def basepoint_moebius(model: GromovProductModel, full: bool = False) -> SubMoebiusMap:
    """``M_o``: the Möbius structure of ``d_o = e^{-(x|y)_o}`` in log scale."""
    return moebius_of(model.space(), full=full)


def _noise(seed, p, eps: Fraction, grid: int) -> tuple[Fraction, Fraction]:
    rng = random.Random(f"{seed}:{','.join(map(str, p))}")
    return (eps * Fraction(rng.randint(-grid, grid), grid), eps * Fraction(rng.randint(-grid, grid), grid))


def perturb(model: GromovProductModel, eps, seed: int = 0, grid: int = 64) -> SubMoebiusMap:
    """Raw table: ``M_o`` with the first two coordinates of every
    nondegenerate ordered tuple shifted independently by rational noise in
    ``[-eps, eps]`` and the third re-closed to sum zero.

    Noise is keyed by ``(seed, tuple)``, so the table does not depend on
    iteration order.  The result is generally not equivariant.
    """
    eps = Fraction(eps)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    m_o = basepoint_moebius(model)
    table = {}
    for p in nondegenerate_tuples(model.n):
        value = m_o(p)
        du, dv = _noise(seed, p, eps, grid) if eps else (Fraction(0), Fraction(0))
        u, v = value.u + du, value.v + dv
        table[p] = L4Point(u, v, -u - v, Scale.LOG, Pattern.REGULAR)
    return SubMoebiusMap(model.boundary, table, Scale.LOG)


def symmetrize(raw: SubMoebiusMap) -> SubMoebiusMap:
    """Average over S4 with signs:
    ``M(P) = 1/24 sum_rho sign(rho) phi(rho^-1) Mt(rho P)``.

    Degenerate tuples keep their pinned values; the output lists every
    nondegenerate tuple explicitly.
    """
    if raw.scale is not Scale.LOG:
        raise ValueError("symmetrization averages log coordinates; use a log-scale table")
    n = raw.n
    for p in admissible_tuples(n):
        if is_degenerate(p):
            if raw(p) != degenerate_point(degenerate_pattern(p), Scale.LOG):
                raise ValueError(f"degenerate tuple {p} does not carry its pinned value")
        else:
            value = raw(p)
            if value.pattern is not Pattern.REGULAR:
                raise ValueError(f"value at {p} is not a finite triple with zero sum")
    table = {}
    for p in nondegenerate_tuples(n):
        su = sv = sw = Fraction(0)
        for rho in S4:
            q = signed_permute(phi(inverse(rho)), sign4(rho), raw(act_on_tuple(rho, p)))
            su += q.u
            sv += q.v
            sw += q.w
        table[p] = L4Point(su / 24, sv / 24, sw / 24, Scale.LOG, Pattern.REGULAR)
    return SubMoebiusMap(raw.points, table, Scale.LOG)


@dataclass
class DeviationReport:
    max_sq: Fraction
    witness: Optional[tuple]
    h: Fraction

    @property
    def max_norm(self) -> float:
        return float(self.max_sq) ** 0.5

    @property
    def within_sqrt96(self) -> bool:
        return self.max_sq <= 96 * self.h**2

    @property
    def within_10h(self) -> bool:
        return self.max_sq <= 100 * self.h**2

    @property
    def ok(self) -> bool:
        return self.within_10h

    def to_json(self, points) -> dict:
        return {
            "h": format_ext(self.h),
            "max_deviation_sq": format_ext(self.max_sq),
            "max_deviation": round(self.max_norm, 12),
            "bound_sqrt96_h": self.within_sqrt96,
            "bound_10h": self.within_10h,
            "witness": [points[i] for i in self.witness] if self.witness else None,
        }


def deviation_check(m: SubMoebiusMap, m_o: SubMoebiusMap, h) -> DeviationReport:
    """Largest Euclidean distance between ``M(P)`` and ``M_o(P)`` over
    nondegenerate tuples, kept squared so that it stays rational."""
    if m.scale is not Scale.LOG or m_o.scale is not Scale.LOG:
        raise ValueError("deviation is measured in log coordinates")
    if m.n != m_o.n:
        raise ValueError("structures live on different domains")
    best, witness = Fraction(0), None
    for p in nondegenerate_tuples(m.n):
        a, b = m(p), m_o(p)
        sq = (a.u - b.u) ** 2 + (a.v - b.v) ** 2 + (a.w - b.w) ** 2
        if sq > best:
            best, witness = sq, p
    return DeviationReport(best, witness, Fraction(h))


def perturb_model(model: GromovProductModel, delta, seed: int = 0, grid: int = 64) -> GromovProductModel:
    """Shift every off-diagonal Gromov product by seeded noise in
    ``[-delta, delta]`` (kept nonnegative) and recompute ``h``."""
    delta = Fraction(delta)
    n = model.n
    gp = [list(row) for row in model.gp]
    for i, j in itertools.combinations(range(n), 2):
        rng = random.Random(f"{seed}:gp:{i},{j}")
        shifted = max(Fraction(0), gp[i][j] + delta * Fraction(rng.randint(-grid, grid), grid))
        gp[i][j] = gp[j][i] = shifted
    return _model(model.boundary, gp)


# -- JSON -----------------------------------------------------------------------


def model_to_json(model: GromovProductModel) -> dict:
    return {
        "boundary": list(model.boundary),
        "gp": [[format_ext(x) for x in row] for row in model.gp],
        "h": format_ext(model.h),
    }


def model_from_json(data: dict) -> GromovProductModel:
    return model_from_gp(data["boundary"], [[parse_ext(str(x)) for x in row] for row in data["gp"]])


def tree_from_json(data: dict) -> Tree:
    edges = []
    for e in data["edges"]:
        if len(e) != 3:
            raise ValueError(f"tree edge {e} must be [parent, child, length]")
        edges.append((str(e[0]), str(e[1]), parse_ext(str(e[2]))))
    tree = Tree(tuple(edges), str(data["root"]))
    tree.validate()
    return tree


def tree_to_json(tree: Tree) -> dict:
    return {"root": tree.root, "edges": [[p, c, format_ext(w)] for p, c, w in tree.edges]}
