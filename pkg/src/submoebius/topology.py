"""Subbase sets of the M-topology, scaled Gromov products and the sandwich
inclusions comparing them with the standard topology of a boundary model.

Thresholds are given in the scale of the structure they are compared
against: a positive rational ``t`` for multiplicative maps, a log-threshold
``s = ln t`` for log-scale maps.  ``INF`` is accepted everywhere and means
"no bound", so balls of radius ``INF`` are the whole space.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .cross_ratio import SubMoebiusMap
from .extended_line import INF, ExtReal, Scale, format_ext, is_finite
from .hyperbolic import GromovProductModel
from .reconstruction import ALPHA, BETA, ScaleTriple, scale_change_factor, scaled_distance
from .semimetric import SemiMetricSpace, chart, metric_inversion


class Kind(str, enum.Enum):
    ALPHA_BALL = "alpha-ball"
    BETA_BALL = "beta-ball"
    ALPHA_COMPLEMENT = "alpha-complement"
    BETA_COMPLEMENT = "beta-complement"
    STANDARD_U = "standard-U"
    STANDARD_B = "standard-B"


@dataclass(frozen=True)
class SubbaseSet:
    kind: Kind
    triple: Optional[ScaleTriple]
    y: int
    t: ExtReal
    members: frozenset

    @property
    def mask(self) -> int:
        return sum(1 << i for i in self.members)

    def to_json(self, points) -> dict:
        return {
            "kind": self.kind.value,
            "scale_triple": [points[i] for i in self.triple] if self.triple else None,
            "y": points[self.y],
            "t": format_ext(self.t),
            "members": sorted(points[i] for i in self.members),
        }


def _side(kind: Kind) -> str:
    return ALPHA if kind in (Kind.ALPHA_BALL, Kind.ALPHA_COMPLEMENT) else BETA


def _check_domain(a: ScaleTriple, y: int, kind: Kind) -> None:
    side = _side(kind)
    pole = a.alpha if side == ALPHA else a.beta
    if y == pole:
        raise ValueError(f"{kind.value} needs y != {side}")
    if kind in (Kind.ALPHA_COMPLEMENT, Kind.BETA_COMPLEMENT) and y == a.omega:
        raise ValueError(f"{kind.value} needs y != omega")


def ball(m: SubMoebiusMap, a: ScaleTriple, y: int, t: ExtReal, kind: Kind = Kind.ALPHA_BALL) -> SubbaseSet:
    """``B_{A,t}(y) = {x : d_A(x,y) < t}`` or ``C_{A,t}(y) = {x : d_A(x,y) > t}``."""
    kind = Kind(kind)
    if kind in (Kind.STANDARD_U, Kind.STANDARD_B):
        raise ValueError("standard sets come from a Gromov-product model; see standard_set")
    _check_domain(a, y, kind)
    sc = m.scale
    if sc is Scale.MULT and is_finite(t) and t <= 0:
        raise ValueError("ball radius must be positive")
    side = _side(kind)
    is_ball = kind in (Kind.ALPHA_BALL, Kind.BETA_BALL)
    members = set()
    for x in range(m.n):
        d = scaled_distance(m, a, x, y, side)
        if is_ball:
            inside = t == INF or d < t
        else:
            inside = t != INF and d > t
        if inside:
            members.add(x)
    return SubbaseSet(kind, a, y, t, frozenset(members))


def complement_as_ball(m: SubMoebiusMap, a: ScaleTriple, y: int, t: ExtReal, side: str = ALPHA) -> SubbaseSet:
    """The ball centred at ``omega`` that equals ``C_{A,t}(y)``:
    ``B_{A',lambda/t}(omega)`` with ``A' = (alpha, omega, y)`` on the alpha
    side and ``B_{A'',mu/t}(omega)`` with ``A'' = (omega, beta, y)`` on the
    beta side."""
    if y == a.omega:
        raise ValueError("complement sets need y != omega")
    lam, mu = scale_change_factor(m, a, y)
    sc = m.scale
    if side == ALPHA:
        if lam is None:
            raise ValueError("alpha complement needs y != alpha")
        return ball(m, ScaleTriple(a.alpha, a.omega, y), a.omega, sc.divide(lam, t), Kind.ALPHA_BALL)
    if mu is None:
        raise ValueError("beta complement needs y != beta")
    return ball(m, ScaleTriple(a.omega, a.beta, y), a.omega, sc.divide(mu, t), Kind.BETA_BALL)


def thresholds(values: Iterable[ExtReal], scale: Scale = Scale.LOG) -> list[Fraction]:
    """Every finite value, all midpoints between consecutive ones and one
    point beyond each end: the only places where memberships can change."""
    vals = sorted({v for v in values if is_finite(v)})
    if scale is Scale.MULT:
        vals = [v for v in vals if v > 0]
    if not vals:
        return [Fraction(1) if scale is Scale.MULT else Fraction(0)]
    out = set(vals)
    out.update((p + q) / 2 for p, q in zip(vals, vals[1:]))
    out.add(vals[-1] + 1)
    out.add(vals[0] / 2 if scale is Scale.MULT else vals[0] - 1)
    return sorted(out)


@dataclass
class IdentityFailure:
    triple: ScaleTriple
    y: int
    t: ExtReal
    side: str
    left: frozenset
    right: frozenset

    def to_json(self, points) -> dict:
        return {
            "scale_triple": [points[i] for i in self.triple],
            "y": points[self.y],
            "t": format_ext(self.t),
            "side": self.side,
            "complement": sorted(points[i] for i in self.left),
            "ball_at_omega": sorted(points[i] for i in self.right),
        }


def complement_identity_scan(m: SubMoebiusMap) -> tuple[int, list[IdentityFailure]]:
    """Compare ``C_{A,t}(y)`` with its ball form at ``omega`` for every
    scale triple, every admissible ``y`` and every sampled ``t``, both sides."""
    checked, failures = 0, []
    for a in map(lambda t: ScaleTriple(*t), itertools.permutations(range(m.n), 3)):
        for y in range(m.n):
            if y == a.omega:
                continue
            for side, pole in ((ALPHA, a.alpha), (BETA, a.beta)):
                if y == pole:
                    continue
                kind = Kind.ALPHA_COMPLEMENT if side == ALPHA else Kind.BETA_COMPLEMENT
                values = [scaled_distance(m, a, x, y, side) for x in range(m.n)]
                for t in thresholds(values, m.scale):
                    left = ball(m, a, y, t, kind).members
                    right = complement_as_ball(m, a, y, t, side).members
                    checked += 1
                    if left != right:
                        failures.append(IdentityFailure(a, y, t, side, left, right))
    return checked, failures


def preimage_check(m: SubMoebiusMap, a: ScaleTriple, y: int, low: ExtReal, high: ExtReal, side: str = ALPHA) -> bool:
    """The preimage of the open interval ``(low, high)`` under
    ``x -> d_A(x, y)`` is a ball intersected with a complement set, the
    complement being rewritten as a ball at ``omega``."""
    direct = frozenset(
        x for x in range(m.n) if low < scaled_distance(m, a, x, y, side) < high
    )
    kind = Kind.ALPHA_BALL if side == ALPHA else Kind.BETA_BALL
    upper = ball(m, a, y, high, kind).members
    lower = complement_as_ball(m, a, y, low, side).members
    return direct == upper & lower


# -- Gromov-product side ---------------------------------------------------------


def scaled_gromov_product(model: GromovProductModel, a: ScaleTriple, x: int, y: int) -> ExtReal:
    """``(x|y)_{A,o} = (x|y)_o - (x|w)_o - (y|w)_o - (alpha|beta)_w`` where
    ``(alpha|beta)_w`` is the same expression in ``alpha, beta``."""
    w = a.omega
    if w in (x, y):
        raise ValueError("scaled Gromov product is not defined at omega")
    if x == y:
        return INF
    gp = model.gp
    ab = gp[a.alpha][a.beta] - gp[a.alpha][w] - gp[a.beta][w]
    return gp[x][y] - gp[x][w] - gp[y][w] - ab


def scaled_space_by_inversion(model: GromovProductModel, a: ScaleTriple) -> SemiMetricSpace:
    """``d_{A,o}`` as the inversion of ``d_o`` at ``omega`` with
    ``r^2 = 1 / d_w(alpha, beta)``, all in log scale."""
    gp = model.gp
    w = a.omega
    ab = gp[a.alpha][a.beta] - gp[a.alpha][w] - gp[a.beta][w]
    return metric_inversion(model.space(), w, ab / 2)


def standard_u(model: GromovProductModel, y: int, t: ExtReal) -> frozenset:
    """``U_{t,o}(y) = {x : (x|y)_o > t}``."""
    return frozenset(x for x in range(model.n) if model.gp[x][y] > t)


def standard_ua(model: GromovProductModel, a: ScaleTriple, y: int, t: ExtReal) -> frozenset:
    """``U_{A,t,o}(y) = {x : (x|y)_{A,o} > t}``; ``omega`` is never a member."""
    return frozenset(
        x for x in range(model.n) if x != a.omega and scaled_gromov_product(model, a, x, y) > t
    )


def standard_b(model: GromovProductModel, a: ScaleTriple, y: int, s: ExtReal) -> frozenset:
    """``B_{A,t,o}(y) = {x : d_{A,o}(x,y) < t}`` with ``s = ln t``."""
    if s == INF:
        return frozenset(range(model.n))
    return frozenset(
        x for x in range(model.n) if x != a.omega and -scaled_gromov_product(model, a, x, y) < s
    )


@dataclass
class SandwichFailure:
    t: ExtReal
    inclusion: str
    missing: frozenset

    def to_json(self, points) -> dict:
        return {"t": format_ext(self.t), "inclusion": self.inclusion, "missing": sorted(points[i] for i in self.missing)}


@dataclass
class SandwichReport:
    variant: str
    triple: ScaleTriple
    y: int
    constant: ExtReal
    checked: int = 0
    skipped: int = 0
    failures: list[SandwichFailure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self, points) -> dict:
        return {
            "variant": self.variant,
            "scale_triple": [points[i] for i in self.triple],
            "y": points[self.y],
            "constant": format_ext(self.constant),
            "checked": self.checked,
            "skipped": self.skipped,
            "ok": self.ok,
            "failures": [f.to_json(points) for f in self.failures],
        }


def _sandwich_standard(model: GromovProductModel, a: ScaleTriple, y: int, h: Fraction) -> SandwichReport:
    gp, w = model.gp, a.omega
    ab = gp[a.alpha][a.beta] - gp[a.alpha][w] - gp[a.beta][w]
    c = 2 * gp[y][w] + abs(ab) + h
    report = SandwichReport("standard", a, y, c)
    ga = [scaled_gromov_product(model, a, x, y) for x in range(model.n) if x != w]
    values = [gp[x][y] for x in range(model.n)] + [g + s for g in ga if is_finite(g) for s in (c, -c)]
    for t in thresholds(values):
        if not t > gp[y][w] + h:
            report.skipped += 1
            continue
        report.checked += 1
        inner, mid, outer = standard_ua(model, a, y, t + c), standard_u(model, y, t), standard_ua(model, a, y, t - c)
        if not inner <= mid:
            report.failures.append(SandwichFailure(t, "U_{A,t+c} in U_t", inner - mid))
        if not mid <= outer:
            report.failures.append(SandwichFailure(t, "U_t in U_{A,t-c}", mid - outer))
    return report


def _sandwich_submoebius(model, m: SubMoebiusMap, a: ScaleTriple, y: int, h: Fraction, side: str) -> SandwichReport:
    slack = 20 * h
    report = SandwichReport(f"submoebius-{side}", a, y, slack)
    pole = a.alpha if side == ALPHA else a.beta
    if y == pole:
        report.skipped += 1
        return report
    kind = Kind.ALPHA_BALL if side == ALPHA else Kind.BETA_BALL
    values = [scaled_distance(m, a, x, y, side) for x in range(m.n)]
    ga = [-scaled_gromov_product(model, a, x, y) for x in range(model.n) if x != a.omega]
    values += [g + s for g in ga if is_finite(g) for s in (slack, -slack)]
    for s in thresholds(values):
        report.checked += 1
        inner = standard_b(model, a, y, s - slack)
        mid = ball(m, a, y, s, kind).members
        outer = standard_b(model, a, y, s + slack)
        if not inner <= mid:
            report.failures.append(SandwichFailure(s, "B_{A,s-20h,o} in B_{A,s}", inner - mid))
        if not mid <= outer:
            report.failures.append(SandwichFailure(s, "B_{A,s} in B_{A,s+20h,o}", mid - outer))
    return report


def sandwich_check(
    model: GromovProductModel,
    a: ScaleTriple,
    y: int,
    variant: str = "standard",
    m: Optional[SubMoebiusMap] = None,
    h: Optional[Fraction] = None,
    side: str = ALPHA,
) -> SandwichReport:
    """Verify the inclusions at every sampled threshold.

    ``standard``:  ``U_{A,t+c,o}(y) <= U_{t,o}(y) <= U_{A,t-c,o}(y)`` for
    ``t > (y|w)_o + h`` with ``c = 2(y|w)_o + |(alpha|beta)_w| + h``;
    thresholds below the hypothesis are counted as skipped.  Needs
    nonnegative Gromov products.

    ``submoebius``: ``B_{A,s-20h,o}(y) <= B_{A,s}(y) <= B_{A,s+20h,o}(y)``
    in log-thresholds, for the structure ``m`` (log scale) on the model's
    boundary.
    """
    if y == a.omega:
        raise ValueError("sandwich sets need y != omega")
    h = model.h if h is None else Fraction(h)
    if variant == "standard":
        if any(model.gp[i][j] < 0 for i in range(model.n) for j in range(model.n)):
            raise ValueError("standard sandwich needs nonnegative Gromov products")
        return _sandwich_standard(model, a, y, h)
    if variant == "submoebius":
        if m is None or m.scale is not Scale.LOG or m.n != model.n:
            raise ValueError("submoebius sandwich needs a log-scale structure on the model's boundary")
        return _sandwich_submoebius(model, m, a, y, h, side)
    raise ValueError(f"unknown sandwich variant {variant!r}")


def sandwich_scan(model, variant: str = "standard", m=None, h=None) -> list[SandwichReport]:
    """All scale triples and ``y != omega``, both sides for the submoebius
    variant, in lexicographic order."""
    out = []
    for t in itertools.permutations(range(model.n), 3):
        a = ScaleTriple(*t)
        for y in range(model.n):
            if y == a.omega:
                continue
            if variant == "standard":
                out.append(sandwich_check(model, a, y, "standard", h=h))
            else:
                for side in (ALPHA, BETA):
                    out.append(sandwich_check(model, a, y, "submoebius", m=m, h=h, side=side))
    return out


# -- finite topologies -------------------------------------------------------


def generate_topology(masks: Iterable[int], n: int) -> frozenset:
    """Open sets generated by a subbase of bitmasks over ``range(n)``."""
    full = (1 << n) - 1
    base = {full}
    frontier = set(masks) - base
    base |= frontier
    subbase = set(base)
    while frontier:
        new = {b & s for b in frontier for s in subbase} - base
        base |= new
        frontier = new
    opens = {0}
    for b in sorted(base):
        opens |= {o | b for o in opens}
    return frozenset(opens)


def same_topology(sub1: Iterable, sub2: Iterable, n: int) -> bool:
    """Compare the topologies generated by two subbases (``SubbaseSet``s,
    member sets or bitmasks) on a universe of ``n`` points."""
    return generate_topology(map(_as_mask, sub1), n) == generate_topology(map(_as_mask, sub2), n)


def _as_mask(s) -> int:
    if isinstance(s, SubbaseSet):
        return s.mask
    if isinstance(s, int):
        return s
    return sum(1 << i for i in s)


def moebius_subbase(m: SubMoebiusMap) -> list[SubbaseSet]:
    """All alpha- and beta-balls ``B_{A,t}(y)``, ``y != omega``, over every
    scale triple and every sampled radius."""
    out = []
    for t in itertools.permutations(range(m.n), 3):
        a = ScaleTriple(*t)
        for y in range(m.n):
            if y == a.omega:
                continue
            for side, kind, pole in ((ALPHA, Kind.ALPHA_BALL, a.alpha), (BETA, Kind.BETA_BALL, a.beta)):
                if y == pole:
                    continue
                values = [scaled_distance(m, a, x, y, side) for x in range(m.n)]
                for r in thresholds(values, m.scale):
                    out.append(ball(m, a, y, r, kind))
    return out


def semimetric_subbase(space: SemiMetricSpace) -> list[frozenset]:
    """Open balls ``{x : d_A(x,y) < t}``, ``y != omega``, of every chart
    ``d_A`` of the Möbius class of ``space``, at sampled radii."""
    out = []
    for t in itertools.permutations(range(space.n), 3):
        d = chart(space, *t)
        for y in range(space.n):
            if y == t[2]:
                continue
            values = [d.dist[x][y] for x in range(space.n)]
            for r in thresholds(values, space.scale):
                out.append(frozenset(x for x in range(space.n) if d.dist[x][y] < r))
    return out
