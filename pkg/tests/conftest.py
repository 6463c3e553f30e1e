import itertools
from fractions import Fraction

from hypothesis import HealthCheck, settings, strategies as st

from submoebius.semimetric import SemiMetricSpace, add_remote_point, line_space

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

positive_rationals = st.builds(Fraction, st.integers(1, 12), st.integers(1, 12))


@st.composite
def spaces(draw, min_n=4, max_n=6, omega=None):
    """Random rational semi-metrics, optionally with an infinitely remote point."""
    n = draw(st.integers(min_n, max_n))
    with_omega = draw(st.booleans()) if omega is None else omega
    m = n - 1 if with_omega else n
    matrix = [[Fraction(0)] * m for _ in range(m)]
    for i, j in itertools.combinations(range(m), 2):
        matrix[i][j] = matrix[j][i] = draw(positive_rationals)
    space = SemiMetricSpace.from_matrix([f"p{i}" for i in range(m)], matrix)
    return add_remote_point(space, f"p{m}") if with_omega else space


def the_line():
    return line_space([0, 1, 3, 7])


def the_line_with_omega():
    return add_remote_point(the_line(), "w")
