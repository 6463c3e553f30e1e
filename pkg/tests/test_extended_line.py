import pickle
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from submoebius.extended_line import (
    INF,
    NEG_INF,
    UNDEFINED,
    L4Point,
    Pattern,
    Scale,
    checked_add,
    checked_mul,
    degenerate_point,
    l4_log,
    l4_point,
    parse_ext,
    signed_permute,
)
from submoebius.symmetry import S3, sign_of

rationals = st.fractions(max_denominator=50).filter(lambda x: abs(x) < 100)
positive = st.fractions(min_value=F(1, 50), max_value=50, max_denominator=50)


def test_addition():
    assert checked_add(F(3, 2), F(1, 2)) == 2
    assert checked_add(INF, NEG_INF) is UNDEFINED
    assert checked_add(F(0), INF) == INF
    assert checked_add(NEG_INF, F(-3)) == NEG_INF


def test_product_zero_times_infinity_is_undefined():
    assert checked_mul(F(0), INF) is UNDEFINED
    assert checked_mul(F(2), INF) == INF
    assert checked_mul(F(2, 3), F(3, 4)) == F(1, 2)


def test_infinity_ordering_and_pickling():
    assert NEG_INF < F(-10**9) < F(10**9) < INF
    assert not INF < INF and INF <= INF
    assert pickle.loads(pickle.dumps(INF)) is INF
    assert pickle.loads(pickle.dumps(UNDEFINED)) is UNDEFINED


def test_parse():
    assert parse_ext("inf") == INF and parse_ext("-inf") == NEG_INF
    assert parse_ext(" 3/4 ") == F(3, 4)
    with pytest.raises(ValueError):
        parse_ext("pi")


def test_l4_point_regular():
    p = l4_point(F(9, 7), F(7, 2), F(2, 9))
    assert p.pattern is Pattern.REGULAR


def test_l4_point_degenerate_a():
    assert l4_point(1, INF, 0).pattern is Pattern.A
    assert l4_log(0, INF, NEG_INF).pattern is Pattern.A


def test_l4_point_rejects_off_plane():
    with pytest.raises(ValueError):
        l4_point(2, 3, 5)
    with pytest.raises(ValueError):
        l4_log(1, 1, 1)
    with pytest.raises(ValueError):
        l4_point(1, 0, INF)


def test_signed_permute_examples():
    p = l4_point(F(9, 7), F(7, 2), F(2, 9))
    assert signed_permute((1, 2, 3), 1, p) == p
    assert signed_permute((1, 3, 2), -1, p).coords == (F(7, 9), F(9, 2), F(2, 7))
    c = signed_permute((3, 2, 1), -1, degenerate_point("A"))
    assert c.pattern is Pattern.C and c.coords == (INF, 0, 1)


def _compose3(s, t):
    return tuple(s[t[j] - 1] for j in range(3))


@given(st.sampled_from(S3), st.sampled_from(S3), st.sampled_from([1, -1]), st.sampled_from([1, -1]), rationals, rationals)
def test_signed_action_is_a_right_action(s, t, e1, e2, a, b):
    p = l4_log(a, b, -a - b)
    assert signed_permute(t, e2, signed_permute(s, e1, p)) == signed_permute(_compose3(s, t), e1 * e2, p)


@given(st.sampled_from(S3), positive, positive)
def test_signed_action_preserves_the_extended_plane(s, u, v):
    # only pairs (s, sign(s)) arise from S4, since the kernel is even
    e = sign_of(s)
    p = l4_point(u, v, 1 / (u * v))
    assert signed_permute(s, e, p).pattern is Pattern.REGULAR
    for pat in "ABC":
        for sc in Scale:
            assert signed_permute(s, e, degenerate_point(pat, sc)).is_degenerate


def test_degenerate_orbit_is_the_three_points():
    images = {signed_permute(s, e, degenerate_point("A")).pattern for s in S3 for e in (sign_of(s),)}
    assert images == {Pattern.A, Pattern.B, Pattern.C}


@given(positive, positive, positive, positive)
def test_formal_ratio_cancels_infinities(a, b, c, d):
    sc = Scale.MULT
    assert sc.formal_ratio((a, INF), (b, INF)) == a / b
    assert sc.formal_ratio((a, INF), (b, c)) == INF
    assert sc.formal_ratio((a, F(0)), (INF, c)) == 0
    assert sc.formal_ratio((a, b), (c, d)) == a * b / (c * d)


def test_scale_log_mirrors_mult():
    assert Scale.LOG.combine(F(1), F(2)) == 3
    assert Scale.LOG.invert(NEG_INF) == INF
    assert Scale.MULT.invert(F(0)) == INF
    assert Scale.LOG.formal_ratio((F(1), INF), (F(3), INF)) == -2
    assert L4Point(F(1), F(1), F(-2), Scale.LOG).is_regular
