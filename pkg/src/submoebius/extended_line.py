"""Exact extended-rational scalars and the extended cross-ratio plane.

Two numeric backings are supported through :class:`Scale`:

* ``Scale.MULT``: values are extended nonnegative rationals ``[0, inf]``;
  a distance ``d`` is stored as itself and the group operation is
  multiplication.
* ``Scale.LOG``: values are extended rationals ``[-inf, inf]``; a distance
  is stored as ``ln d`` and the group operation is addition.

Every identity between cross-differences holds verbatim in either backing,
so the rest of the package is written once against the ``Scale`` methods.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Union


class Infinity:
    """Signed infinity that orders correctly against :class:`Fraction`."""

    __slots__ = ("positive",)

    def __init__(self, positive: bool):
        self.positive = positive

    def __reduce__(self):
        return (_infinity, (self.positive,))

    def __repr__(self):
        return "INF" if self.positive else "NEG_INF"

    def __str__(self):
        return "inf" if self.positive else "-inf"

    def __neg__(self):
        return NEG_INF if self.positive else INF

    def __eq__(self, other):
        return isinstance(other, Infinity) and other.positive == self.positive

    def __hash__(self):
        return hash(("Infinity", self.positive))

    def __lt__(self, other):
        if isinstance(other, Infinity):
            return not self.positive and other.positive
        return not self.positive

    def __le__(self, other):
        return self == other or self < other

    def __gt__(self, other):
        if isinstance(other, Infinity):
            return self.positive and not other.positive
        return self.positive

    def __ge__(self, other):
        return self == other or self > other


def _infinity(positive: bool) -> Infinity:
    return INF if positive else NEG_INF


INF = Infinity(True)
NEG_INF = Infinity(False)

ExtReal = Union[Fraction, Infinity]


class _Undefined:
    """Marker for sums of opposite infinities (and products ``0 * inf``)."""

    __slots__ = ()

    def __repr__(self):
        return "UNDEFINED"

    def __reduce__(self):
        return "UNDEFINED"


UNDEFINED = _Undefined()


def is_finite(x) -> bool:
    return not isinstance(x, Infinity)


def checked_add(x: ExtReal, y: ExtReal):
    """Extended sum; returns :data:`UNDEFINED` for ``inf + (-inf)``."""
    if isinstance(x, Infinity):
        if isinstance(y, Infinity) and y.positive != x.positive:
            return UNDEFINED
        return x
    if isinstance(y, Infinity):
        return y
    return x + y


def checked_mul(x: ExtReal, y: ExtReal):
    """Extended product of nonnegative values; ``0 * inf`` is undefined."""
    if isinstance(x, Infinity) or isinstance(y, Infinity):
        if x == 0 or y == 0:
            return UNDEFINED
        return INF
    return x * y


def as_ext(value) -> ExtReal:
    """Coerce ints, Fractions, ``"p/q"``/``"inf"`` strings to an ExtReal."""
    if isinstance(value, (Infinity, Fraction)):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_ext(value)
    raise TypeError(f"cannot interpret {value!r} as an exact extended rational")


def parse_ext(text: str) -> ExtReal:
    s = text.strip().lower()
    if s in ("inf", "+inf", "infinity", "+infinity"):
        return INF
    if s in ("-inf", "-infinity"):
        return NEG_INF
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not an exact rational: {text!r}") from exc


def format_ext(x: ExtReal) -> str:
    return str(x)


class Scale(enum.Enum):
    """Numeric backing for distances and cross-ratio coordinates."""

    MULT = "mult"
    LOG = "log"

    @property
    def unit(self) -> Fraction:
        """Image of distance 1 (cross-difference 0)."""
        return Fraction(1) if self is Scale.MULT else Fraction(0)

    @property
    def zero(self) -> ExtReal:
        """Image of distance 0."""
        return Fraction(0) if self is Scale.MULT else NEG_INF

    @property
    def infinite(self) -> ExtReal:
        """Image of distance infinity."""
        return INF

    def combine(self, x: ExtReal, y: ExtReal):
        """Group operation: product (MULT) or sum (LOG), possibly UNDEFINED."""
        if self is Scale.MULT:
            return checked_mul(x, y)
        return checked_add(x, y)

    def invert(self, x: ExtReal) -> ExtReal:
        """Reciprocal (MULT) or negation (LOG); swaps zero and infinite."""
        if self is Scale.MULT:
            if isinstance(x, Infinity):
                return Fraction(0)
            if x == 0:
                return INF
            return 1 / x
        return -x

    def divide(self, x: ExtReal, y: ExtReal):
        return self.combine(x, self.invert(y))

    def power(self, x: Fraction, k: int) -> Fraction:
        """``x**k`` in MULT, ``k*x`` in LOG (finite ``x`` only)."""
        return x**k if self is Scale.MULT else k * x

    def is_positive_finite(self, x) -> bool:
        """True when ``x`` encodes a distance in ``(0, inf)``."""
        if isinstance(x, Infinity):
            return False
        return x > 0 if self is Scale.MULT else True

    def is_valid(self, x) -> bool:
        """True when ``x`` encodes some distance in ``[0, inf]``."""
        if self is Scale.MULT:
            return isinstance(x, Infinity) and x.positive or (isinstance(x, Fraction) and x >= 0)
        return isinstance(x, (Fraction, Infinity))

    def order(self, x: ExtReal) -> tuple[Fraction, int]:
        """Split ``x`` into (finite part, order of vanishing).

        Zero has order +1 and infinity order -1 with finite part ``unit``;
        used to cancel matching zero/infinite factors formally.
        """
        if x == self.zero:
            return self.unit, 1
        if isinstance(x, Infinity):
            return self.unit, -1
        return x, 0

    def formal_ratio(self, num: Iterable[ExtReal], den: Iterable[ExtReal]) -> ExtReal:
        """Product of ``num`` over product of ``den`` with zero/infinite
        factors cancelled pairwise before evaluation."""
        total = 0
        acc = self.unit
        for x in num:
            f, k = self.order(x)
            total += k
            acc = acc * f if self is Scale.MULT else acc + f
        for x in den:
            f, k = self.order(x)
            total -= k
            acc = acc / f if self is Scale.MULT else acc - f
        if total > 0:
            return self.zero
        if total < 0:
            return INF
        return acc

    def to_log_float(self, x: ExtReal) -> float:
        """Presentation-only natural log of the encoded distance."""
        import math

        if self is Scale.LOG:
            return float(x) if is_finite(x) else (math.inf if x == INF else -math.inf)
        if isinstance(x, Infinity):
            return math.inf
        if x == 0:
            return -math.inf
        return math.log(x)


class Pattern(str, enum.Enum):
    REGULAR = "regular"
    A = "A"
    B = "B"
    C = "C"
    INVALID = "invalid"


def degenerate_coords(pattern: Pattern, scale: Scale) -> tuple[ExtReal, ExtReal, ExtReal]:
    """Pinned coordinates of A=(0,inf,-inf), B=(-inf,0,inf), C=(inf,-inf,0)."""
    one, big, small = scale.unit, INF, scale.zero
    if pattern is Pattern.A:
        return (one, big, small)
    if pattern is Pattern.B:
        return (small, one, big)
    if pattern is Pattern.C:
        return (big, small, one)
    raise ValueError(f"{pattern} is not a degenerate pattern")


def _classify(u, v, w, scale: Scale) -> Pattern:
    if all(scale.is_positive_finite(c) for c in (u, v, w)):
        if scale is Scale.MULT:
            ok = u * v * w == 1
        else:
            ok = u + v + w == 0
        return Pattern.REGULAR if ok else Pattern.INVALID
    triple = (u, v, w)
    for pat in (Pattern.A, Pattern.B, Pattern.C):
        if triple == degenerate_coords(pat, scale):
            return pat
    return Pattern.INVALID


@dataclass(frozen=True)
class L4Point:
    """A point of the extended plane ``a+b+c=0`` plus the three points A, B, C.

    Coordinates are stored in the given scale: ``(e^a, e^b, e^c)`` for
    ``Scale.MULT`` and ``(a, b, c)`` for ``Scale.LOG``.  Construct through
    :func:`l4_point` / :func:`l4_log` to get validation; the raw constructor
    keeps malformed triples (``pattern == INVALID``) so that ingested tables
    can be diagnosed instead of rejected.
    """

    u: ExtReal
    v: ExtReal
    w: ExtReal
    scale: Scale = Scale.MULT
    pattern: Pattern = field(default=None, compare=False)  # type: ignore[assignment]

    def __post_init__(self):
        if self.pattern is None:
            object.__setattr__(self, "pattern", _classify(self.u, self.v, self.w, self.scale))

    @property
    def coords(self) -> tuple[ExtReal, ExtReal, ExtReal]:
        return (self.u, self.v, self.w)

    @property
    def is_regular(self) -> bool:
        return self.pattern is Pattern.REGULAR

    @property
    def is_degenerate(self) -> bool:
        return self.pattern in (Pattern.A, Pattern.B, Pattern.C)

    # log-scale coordinate names (a, b, c)
    a = property(lambda self: self.u)
    b = property(lambda self: self.v)
    c = property(lambda self: self.w)

    def log_floats(self) -> tuple[float, float, float]:
        return tuple(self.scale.to_log_float(x) for x in self.coords)  # type: ignore[return-value]

    def to_json(self) -> list[str]:
        return [format_ext(x) for x in self.coords]

    def __str__(self):
        if self.is_degenerate:
            return self.pattern.value
        return "(" + ", ".join(format_ext(x) for x in self.coords) + ")"


def l4_point(u, v, w, scale: Scale = Scale.MULT) -> L4Point:
    """Validated constructor; raises ``ValueError`` outside the extended plane."""
    p = L4Point(as_ext(u), as_ext(v), as_ext(w), scale)
    if p.pattern is Pattern.INVALID:
        raise ValueError(
            f"({u}, {v}, {w}) is neither a regular {scale.value} triple nor one of A, B, C"
        )
    return p


def l4_log(a, b, c) -> L4Point:
    return l4_point(a, b, c, Scale.LOG)


def degenerate_point(pattern: Pattern | str, scale: Scale = Scale.MULT) -> L4Point:
    pattern = Pattern(pattern)
    return L4Point(*degenerate_coords(pattern, scale), scale=scale, pattern=pattern)


def signed_permute(sigma: tuple[int, int, int], sign: int, p: L4Point) -> L4Point:
    """Signed action of ``S3`` on coordinates.

    Coordinate ``i`` of the result is coordinate ``sigma(i)`` of ``p``; with
    ``sign == -1`` every coordinate is also inverted (negated in log scale).
    This is a right action: acting by ``s`` then by ``t`` equals acting by the
    composite ``s o t``.
    """
    c = p.coords
    out = [c[sigma[0] - 1], c[sigma[1] - 1], c[sigma[2] - 1]]
    if sign < 0:
        out = [p.scale.invert(x) for x in out]
    if p.pattern is Pattern.INVALID:
        return L4Point(*out, scale=p.scale)
    if p.pattern is Pattern.REGULAR:
        return L4Point(*out, scale=p.scale, pattern=Pattern.REGULAR)
    return L4Point(*out, scale=p.scale, pattern=_DEGENERATE[p.scale].get(tuple(out), Pattern.INVALID))


_DEGENERATE = {
    sc: {degenerate_coords(pat, sc): pat for pat in (Pattern.A, Pattern.B, Pattern.C)} for sc in Scale
}
