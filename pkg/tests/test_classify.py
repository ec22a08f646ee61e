from fractions import Fraction as Q

import pytest

from corpus import NEGATIVE_TEXT, intro, system, verdict
from sdsehopf.classify import (
    INFINITE,
    MIN_WEIGHT,
    UNDETERMINED,
    classify,
    dep_graph,
    dilatation_classes,
    fit_product_form,
    peel_extensions,
    vertex_levels,
)
from sdsehopf.families import Cycle, Extended, Fundamental, Multicycle
from sdsehopf.sdse import LambdaTable, Sdse, change_vars, check_hopf, load_system
from sdsehopf.series import Series, f_beta, parse_expr

FAMILY_CORPUS = [
    "i0_j0", "j0_j0", "i0_k0", "i0_i1", "i0_i1_log", "i0_i1_j1",
    "selfloop_1", "selfloop_2", "selfloop_0", "selfloop_1/3", "selfloop_-2",
]


def test_four_cycle_graph():
    G = dep_graph(Cycle(4).build(6))
    assert G.edges == {(1, 2), (2, 3), (3, 4), (4, 1)}
    assert G.self_dependent() == []
    assert G.descendants(1) == {1, 2, 3, 4}


def test_five_vertex_graph():
    G = dep_graph(intro(5))
    # 1 and 2 see themselves and each other, 3 and 4 see 1 and 2, 5 sees 1..4
    expected = {(i, j) for i in (1, 2, 3, 4, 5) for j in (1, 2, 3, 4)} - {(3, 3), (4, 4)}
    assert G.edges == expected
    assert G.self_dependent() == [1, 2]
    assert G.pred[5] == []
    assert len(G.components()) == 1


def test_disconnected_graph_components():
    S = Sdse({1: parse_expr("1 + h1", [1, 2], 8), 2: parse_expr("1 + h2", [1, 2], 8)})
    assert dep_graph(S).components() == [[1], [2]]
    c = classify(S, 6)
    assert c.kind == "components" and [p.kind for p in c.parts] == ["fundamental", "fundamental"]


def test_dot_export_marks_classes_and_extensions():
    S = system("extended_multicycle")
    G = dep_graph(S)
    peel, _ = peel_extensions(S)
    dot = G.to_dot(dilatation_classes(S), [x for x, _ in peel])
    assert dot.startswith("digraph")
    assert "4 [shape=box" in dot
    loops = dep_graph(system("selfloop_2")).to_dot()
    assert "1 -> 1" in loops


# -- levels -----------------------------------------------------------------------

def test_geometric_self_loop_has_level_zero_and_slope_two():
    lv = vertex_levels(verdict("selfloop_1", 8).table)
    assert lv.levels == {1: 0}
    assert lv.slopes[(1, 1)] == 2


@pytest.mark.parametrize("name", ["cycle2", "cycle3", "cycle4", "cycle5", "multicycle_2_1_2"])
def test_cycles_have_no_finite_level(name):
    lv = vertex_levels(verdict(name, 8).table)
    assert set(lv.levels.values()) == {INFINITE}


def test_short_tables_are_undetermined():
    t = LambdaTable((1,), 2, {(1, 1, 1): Q(1), (1, 1, 2): Q(3)})
    assert vertex_levels(t).levels == {1: UNDETERMINED}


@pytest.mark.parametrize("name", FAMILY_CORPUS)
def test_levels_match_the_family(name):
    from corpus import HOPF_SPECS

    lv = vertex_levels(verdict(name, 8).table)
    assert lv.levels == HOPF_SPECS[name].expected_levels()


def test_levels_of_the_five_vertex_example():
    lv = vertex_levels(check_hopf(intro(6), 7).table)
    assert lv.levels == {i: 0 for i in range(1, 6)}


def level_invariants(S, lv):
    G = dep_graph(S)
    fin = lv.finite()
    for i, j in G.edges:
        if i in fin and j in fin and i != j:
            assert fin[i] in (fin[j], fin[j] + 1)
            if fin[i] == fin[j]:
                assert fin[i] <= 1
    for j in S.indices:
        slopes = {lv.slopes[(i, j)] for i in fin}
        assert len(slopes) <= 1
        if j in fin and any(j not in G.descendants(k) and k != j for k in S.indices) and slopes:
            assert slopes == {0}


@pytest.mark.parametrize("name", FAMILY_CORPUS + ["extended_selfloop", "dilated_selfloop", "rescaled_i0_j0"])
def test_descent_and_slope_uniformity(name):
    lv = vertex_levels(verdict(name, 8).table)
    level_invariants(system(name), lv)


def test_level_descent_on_a_fixed_case():
    lv = vertex_levels(verdict("i0_i1_j1", 8).table)
    assert lv.levels == {1: 0, 2: 0, 3: 1}
    assert lv.slopes[(3, 1)] == lv.slopes[(1, 1)] == 2


# -- shape fitting ------------------------------------------------------------------

def test_fit_two_factor_product():
    I = [1, 2]
    F = f_beta(2, Series.var(1, I, 6)) * f_beta(1, Series.var(2, I, 6))
    fit = fit_product_form(F)
    assert fit.kind == "product"
    assert fit.groups == [(Q(2), {1: Q(1)}), (Q(1), {2: Q(1)})]
    assert fit.expand(I, 6) == F


def test_fit_affine_series():
    F = parse_expr("1 + h1", [1], 6)
    fit = fit_product_form(F)
    assert fit.kind == "product" and fit.groups == [(Q(-1), {1: Q(1)})]


def test_fit_shifted_product():
    I = [1]
    nu, beta = Q(3), Q(2)
    F = f_beta(beta, Series.var(1, I, 6, nu)) * (1 / nu) + (1 - 1 / nu)
    fit = fit_product_form(F)
    assert fit.kind == "shifted" and fit.nu == nu
    assert fit.groups == [(beta, {1: Q(1)})]


def test_fit_log_shape():
    F = parse_expr("1 + 2*ln1m(h1) + h2", [1, 2], 6)
    fit = fit_product_form(F)
    assert fit.kind == "log" and fit.expand([1, 2], 6) == F


def test_no_fit():
    assert fit_product_form(parse_expr("1 + h1 + h1^3", [1], 6)) is None


# -- recognizer -----------------------------------------------------------------------

def test_multicycle_round_trip():
    S = Multicycle((2, 1, 2)).build(8)
    c = classify(S, 6)
    assert c.kind == "multicyclic" and c.period == 3
    assert sorted(map(sorted, c.cyclic_classes)) == [[1, 2], [3], [4, 5]]
    assert c.regenerate() == S


def test_fundamental_round_trip_with_two_extensions():
    fam = Fundamental(i0={1: 2}, j0=(2,), i1={3: (3, {1: 1, 2: 1})})
    spec = Extended(Extended(fam, 4, ((3, Q(2)),)), 5, ((4, Q(-1)),))
    S = spec.build(8)
    c = classify(S, 6)
    assert c.kind == "fundamental", c.to_text()
    assert c.params.i0 == {1: 2} and c.params.j0 == (2,)
    assert c.params.i1[3][0] == 3
    assert {x for x, _ in c.extensions} == {4, 5}
    assert c.regenerate() == S


def test_rescaled_fundamental_reports_its_scaling():
    S = system("rescaled_i0_j0", 8)
    c = classify(S, 6)
    assert c.kind == "fundamental"
    assert c.params.i0 == {1: 2}
    assert change_vars(c.params.build(8), c.scaling) == S


def test_non_hopf_verdict_carries_a_witness():
    c = classify(load_system(NEGATIVE_TEXT), 6)
    assert c.kind == "not_hopf" and c.witness.is_violation()
    assert c.witness.n <= 4


def test_shallow_weight_is_unknown():
    c = classify(Cycle(3).build(8), MIN_WEIGHT - 1)
    assert c.kind == "unknown" and str(MIN_WEIGHT) in c.reason


def test_classification_text_lists_the_parameters():
    text = classify(intro(6), 6).to_text()
    assert text.splitlines()[:4] == ["verdict fundamental", "I0 1:beta=2 2:beta=3", "J0 3 4", "K0 5"]


def test_extension_over_unequal_equations_is_not_hopf():
    fam = Fundamental(i0={1: 2}, j0=(2,), i1={3: (3, {1: 1, 2: 1})})
    S = Extended(Extended(fam, 4, ((3, Q(2)),)), 5, ((4, Q(1)), (1, Q(-1)))).build(8)
    c = classify(S, 6)
    assert c.kind == "not_hopf" and c.witness.i == 5
