import itertools
import os
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from conftest import the_line
from submoebius.cross_ratio import SubMoebiusMap, admissible_tuples, check_axioms, is_degenerate
from submoebius.extended_line import INF, L4Point, Scale, degenerate_point, signed_permute
from submoebius.hyperbolic import (
    Tree,
    basepoint_moebius,
    binary_tree,
    build_from_metric,
    build_from_tree,
    caterpillar_tree,
    deviation_check,
    hyperbolicity_constant,
    model_from_gp,
    model_from_json,
    model_to_json,
    perturb,
    perturb_model,
    symmetrize,
    tree_from_json,
    tree_to_json,
)
from submoebius.reconstruction import is_moebius
from submoebius.semimetric import SemiMetricSpace, moebius_equivalent
from submoebius.symmetry import S4, act_on_tuple, phi, sign4


def lca_depth(u, v):
    # binary_tree ids are "r" followed by the path bits
    return len(os.path.commonprefix([u[1:], v[1:]]))


def h_inequality_holds(gp, h):
    for x, y, z in itertools.combinations(range(len(gp)), 3):
        lo, mid, _ = sorted((gp[x][y], gp[x][z], gp[y][z]))
        if mid - lo > h:
            return False
    return True


def test_binary_tree_gromov_products():
    model = build_from_tree(binary_tree(3))
    assert model.n == 8 and model.h == 0
    for i, j in itertools.combinations(range(8), 2):
        u, v = model.boundary[i], model.boundary[j]
        assert model.gp[i][j] == lca_depth(u, v)
    i, j = model.boundary.index("r010"), model.boundary.index("r011")
    assert model.gp[i][j] == 2
    i, j = model.boundary.index("r000"), model.boundary.index("r111")
    assert model.gp[i][j] == 0
    assert all(model.gp[i][i] == INF for i in range(8))


def test_metric_model():
    model = build_from_metric(the_line(), "0")
    assert model.boundary == ("1", "3", "7")
    assert model.gp[0][1] == 1


def test_metric_model_rejects_bad_sources():
    bad = SemiMetricSpace.from_matrix("abc", [[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    with pytest.raises(ValueError):
        build_from_metric(bad, "a")
    with pytest.raises(KeyError):
        build_from_metric(the_line(), "9")


def test_tree_validation():
    with pytest.raises(ValueError):
        Tree((("r", "a", F(1)),), "r").validate()
    with pytest.raises(ValueError):
        Tree((("r", "a", F(1)), ("r", "b", F(0))), "r").validate()
    with pytest.raises(ValueError):
        Tree((("r", "a", F(1)), ("x", "a", F(1)), ("r", "b", F(1))), "r").validate()
    with pytest.raises(ValueError):
        Tree((("r", "a", F(1)), ("x", "b", F(1))), "r").validate()


def test_hyperbolicity_triple_gap():
    gp = [[INF, 5, 3], [5, INF, 1], [3, 1, INF]]
    assert hyperbolicity_constant(gp) == 2


def test_hyperbolicity_is_minimal():
    model = perturb_model(build_from_tree(caterpillar_tree(6)), F(1, 3), seed=2)
    assert model.h > 0
    assert h_inequality_holds(model.gp, model.h)
    assert not h_inequality_holds(model.gp, model.h - F(1, 10**6))


@given(st.integers(0, 20), st.fractions(min_value=0, max_value=2, max_denominator=16))
def test_single_entry_perturbation_moves_h_by_at_most_2delta(k, delta):
    model = build_from_tree(binary_tree(2, length=2))
    pairs = list(itertools.combinations(range(model.n), 2))
    i, j = pairs[k % len(pairs)]
    gp = [list(r) for r in model.gp]
    gp[i][j] = gp[j][i] = gp[i][j] + delta
    assert abs(hyperbolicity_constant(gp) - model.h) <= 2 * delta


def test_tree_models_have_h_zero():
    for tree in (binary_tree(3), caterpillar_tree(6), caterpillar_tree(4, [1, F(1, 2), 3, 2, F(5, 2), 1, 1, 1])):
        assert build_from_tree(tree).h == 0


def test_m_o_on_tree_is_lca_difference():
    model = build_from_tree(binary_tree(2))
    m = basepoint_moebius(model)
    b = model.boundary
    for p in itertools.permutations(range(model.n), 4):
        x1, x2, x3, x4 = (b[i] for i in p)
        want = lca_depth(x1, x4) + lca_depth(x2, x3) - lca_depth(x1, x3) - lca_depth(x2, x4)
        assert m(p).a == want


@pytest.mark.parametrize("tree", [binary_tree(2), caterpillar_tree(5)])
def test_m_o_is_moebius(tree):
    m = basepoint_moebius(build_from_tree(tree), full=True)
    assert check_axioms(m).ok and is_moebius(m)


def test_m_o_of_perturbed_model_is_moebius():
    model = perturb_model(build_from_tree(caterpillar_tree(5)), F(1, 2), seed=9)
    assert is_moebius(basepoint_moebius(model))


def test_m_o_degenerate_patterns():
    m = basepoint_moebius(build_from_tree(binary_tree(2)))
    assert m((0, 0, 1, 2)) == degenerate_point("A", Scale.LOG)
    assert m((0, 1, 0, 2)) == degenerate_point("B", Scale.LOG)
    assert m((0, 1, 2, 0)) == degenerate_point("C", Scale.LOG)


def test_basepoint_independence_on_trees():
    tree = caterpillar_tree(5)
    leaves = tree.leaves()
    root = build_from_tree(tree)
    for v in ("s1", "s2", "s4"):
        other = build_from_tree(tree, basepoint=v, boundary=leaves)
        assert other.boundary == root.boundary
        assert other.gp != root.gp
        assert moebius_equivalent(root.space(), other.space(), exhaustive=True)


def test_rerooting_at_a_leaf_is_rejected():
    with pytest.raises(ValueError):
        build_from_tree(caterpillar_tree(4), basepoint="l0")


def test_perturb_zero_is_m_o():
    model = build_from_tree(caterpillar_tree(5))
    raw = perturb(model, 0, seed=1)
    m_o = basepoint_moebius(model)
    assert all(raw(p) == m_o(p) for p in admissible_tuples(model.n))


def test_perturb_is_deterministic_and_bounded():
    model = perturb_model(build_from_tree(caterpillar_tree(5)), F(1, 2), seed=3)
    eps = 4 * model.h
    a, b = perturb(model, eps, seed=11), perturb(model, eps, seed=11)
    assert a.table == b.table
    assert perturb(model, eps, seed=12).table != a.table
    m_o = basepoint_moebius(model)
    for p, v in a.table.items():
        w = m_o(p)
        assert abs(v.a - w.a) <= eps and abs(v.b - w.b) <= eps
        assert v.a + v.b + v.c == 0


def test_symmetrize_fixes_equivariant_tables():
    model = perturb_model(build_from_tree(caterpillar_tree(5)), F(1, 2), seed=3)
    m_o = basepoint_moebius(model, full=True)
    assert symmetrize(m_o).table == m_o.table


def test_symmetrize_is_equivariant_and_idempotent():
    model = perturb_model(build_from_tree(caterpillar_tree(5)), F(1, 2), seed=3)
    raw = perturb(model, 4 * model.h, seed=5)
    assert not check_axioms(raw).ok
    m = symmetrize(raw)
    for p in itertools.permutations(range(model.n), 4):
        for pi in S4:
            assert m(act_on_tuple(pi, p)) == signed_permute(phi(pi), sign4(pi), m(p))
    assert check_axioms(m).ok
    assert symmetrize(m).table == m.table
    for p in admissible_tuples(model.n):
        if is_degenerate(p):
            assert m(p) == raw(p)


def test_symmetrize_rejects_wrong_degenerate_entries():
    model = build_from_tree(caterpillar_tree(4))
    raw = perturb(model, 0)
    table = dict(raw.table)
    table[(0, 0, 1, 2)] = degenerate_point("B", Scale.LOG)
    with pytest.raises(ValueError):
        symmetrize(SubMoebiusMap(raw.points, table, Scale.LOG))
    table = dict(raw.table)
    table[(0, 1, 2, 3)] = L4Point(F(1), F(1), F(1), Scale.LOG)
    with pytest.raises(ValueError):
        symmetrize(SubMoebiusMap(raw.points, table, Scale.LOG))


def test_deviation_zero_on_trees():
    model = build_from_tree(binary_tree(2))
    m_o = basepoint_moebius(model)
    assert deviation_check(symmetrize(perturb(model, 0)), m_o, 0).max_sq == 0


def test_worst_case_single_tuple_norm():
    # grid oracle: shifts in [-4h, 4h] on two coordinates, third re-closed
    h = F(1)
    grid = [F(k, 4) * h for k in range(-16, 17)]
    best = max(du**2 + dv**2 + (du + dv) ** 2 for du in grid for dv in grid)
    assert best == 96 * h**2 < 100 * h**2


@settings(max_examples=20)
@given(st.integers(0, 10**6))
def test_deviation_bound_for_random_seeds(seed):
    model = perturb_model(build_from_tree(caterpillar_tree(5)), F(1, 2), seed=seed % 50)
    if model.h == 0:
        return
    m = symmetrize(perturb(model, 4 * model.h, seed=seed))
    report = deviation_check(m, basepoint_moebius(model), model.h)
    assert report.within_sqrt96 and report.within_10h


def test_model_json_roundtrip():
    model = perturb_model(build_from_tree(binary_tree(2)), F(1, 4), seed=1)
    assert model_from_json(model_to_json(model)) == model


def test_tree_json_roundtrip():
    tree = caterpillar_tree(4)
    assert tree_from_json(tree_to_json(tree)) == tree
    with pytest.raises(ValueError):
        tree_from_json({"root": "r", "edges": [["r", "a"]]})


def test_model_from_gp_validation():
    with pytest.raises(ValueError):
        model_from_gp(["a", "b"], [[INF, 1], [2, INF]])
    with pytest.raises(ValueError):
        model_from_gp(["a", "b"], [[0, 1], [1, INF]])
