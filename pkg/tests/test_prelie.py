from fractions import Fraction as Q
from itertools import product

import pytest

from corpus import AFFINE_NAMES, HOPF_SPECS, deep_table, intro, intro_verdict, system, verdict
from sdsehopf.classify import dep_graph
from sdsehopf.families import Complete, Cycle, Fundamental
from sdsehopf.sdse import LambdaTable, check_hopf, dilate, path_table, solve_e1
from sdsehopf.prelie import (
    PathAlgebra,
    PathAlgebraElem,
    PreLieElem,
    TableRangeError,
    UnitGroup,
    check_associative,
    check_path_isomorphism,
    check_prelie_identity,
    dilated_product,
    pair_coefficients,
    path_algebra,
    path_system,
    permutative_product,
    prelie_product,
    structure_constants_text,
    unit_group_inverse,
    unit_group_mul,
    uneven_ladders,
)

f = PreLieElem.basis
P = PathAlgebraElem.basis


@pytest.fixture(scope="module")
def cycle4():
    return check_hopf(Cycle(4).build(12), 12).table


def test_four_cycle_products(cycle4):
    assert prelie_product(cycle4, f(2, 1), f(1, 1)) == f(1, 2)
    assert not prelie_product(cycle4, f(3, 1), f(1, 1))
    assert prelie_product(cycle4, f(1, 1) + f(2, 1), 2 * f(1, 1)) == 2 * f(1, 2)


def test_geometric_self_loop_products():
    table = verdict("selfloop_1", 8).table
    for k in range(1, 7):
        assert prelie_product(table, f(1, 1), f(1, k)) == (2 * k - 1) * f(1, k + 1)


def test_products_vanish_off_the_descendants():
    name = "i0_i1_j1"
    S, table = system(name), verdict(name, 7).table
    G = dep_graph(S)
    for i, j, k in product(S.indices, S.indices, range(1, 5)):
        if j not in G.descendants(i):
            assert not prelie_product(table, f(j, 1), f(i, k))


def test_products_past_the_table_raise(cycle4):
    with pytest.raises(TableRangeError):
        prelie_product(cycle4, f(2, 1), f(1, 12))
    with pytest.raises(TableRangeError):
        check_prelie_identity(cycle4, 13)
    bottom = LambdaTable((1,), 2, {(1, 1, 1): Q(1), (1, 1, 2): None})
    with pytest.raises(TableRangeError):
        prelie_product(bottom, f(1, 1), f(1, 2))


def test_extrapolation_needs_a_level_certificate():
    from sdsehopf.classify import vertex_levels

    table = verdict("selfloop_1", 8).table
    lv = vertex_levels(table)
    assert prelie_product(table, f(1, 1), f(1, 20), assume_affine=lv) == 39 * f(1, 21)
    cyc = check_hopf(Cycle(3).build(8), 8).table
    with pytest.raises(TableRangeError):
        prelie_product(cyc, f(2, 1), f(1, 9), assume_affine=vertex_levels(cyc))


def test_text_forms(cycle4):
    assert (f(1, 1) + f(2, 1) + f(1, 2)).to_text() == "f_1(1) + f_2(1) + f_1(2)"
    assert structure_constants_text(cycle4).splitlines()[:2] == ["1\t1\t1\t0", "1\t1\t2\t0"]
    assert "1\t2\t1\t1" in structure_constants_text(cycle4).splitlines()


# -- identity and associativity ---------------------------------------------------

def test_identity_on_the_four_cycle(cycle4):
    assert check_prelie_identity(cycle4, 10) is None


def test_identity_on_the_five_vertex_example():
    scanned = intro_verdict(7).table
    table = path_table(intro(7), 7)
    assert all(table.entries[k] == v for k, v in scanned.entries.items())
    assert check_prelie_identity(table, 8) is None


def test_a_corrupted_table_gives_a_witness(cycle4):
    bad = LambdaTable(cycle4.indices, cycle4.max_n, dict(cycle4.entries))
    bad.entries[(1, 2, 2)] = Q(5)
    w = check_prelie_identity(bad, 6)
    assert w is not None and w.law == "pre-Lie"
    assert "but" in w.describe()


def test_associativity_examples(cycle4):
    assert check_associative(cycle4, 10) == (True, None)
    ok, w = check_associative(check_hopf(Complete((1, 1, 1)).build(8), 7).table, 7)
    assert not ok and w.law == "associative"
    minus_one = Fundamental(i0={1: -1, 2: -1}).build(8)
    assert minus_one.is_affine()
    assert check_associative(check_hopf(minus_one, 8).table, 8)[0]


@pytest.mark.parametrize("name", sorted(HOPF_SPECS))
def test_associative_exactly_when_affine(name):
    table = verdict(name, 7).table
    ok, _ = check_associative(table, 7)
    assert ok == system(name).is_affine()


# -- duality with the coproduct -------------------------------------------------------

@pytest.mark.parametrize("name", ["cycle3", "selfloop_1", "i0_j0", "i0_i1", "complete_2_1", "extended_selfloop"])
def test_structure_constants_are_dual_to_single_cuts(name):
    S = system(name)
    sol = solve_e1(S, 6)
    table = verdict(name, 6).table
    for i, n in product(S.indices, range(2, 7)):
        got = pair_coefficients(sol, i, n)
        for j, k in product(S.indices, range(1, n)):
            l = n - k
            for tp, ap in sol.component(j, l).items():
                for tpp, app in sol.component(i, k).items():
                    assert got.get((tp, tpp), 0) == table[i, j, k] * ap * app
        # nothing outside the supports
        for (tp, tpp), c in got.items():
            if c:
                assert sol.coefficient(tp) and sol.coefficient(tpp)


# -- dilatation ------------------------------------------------------------------------

def test_permutative_axiom():
    labels = "abc"
    m = permutative_product
    for a, b, c in product(labels, repeat=3):
        assert m(m(a, b), c) == m(b, m(a, c)) == c
        assert m(m(a, b), c) == m(a, m(b, c))


def test_singleton_partition_is_the_plain_product(cycle4):
    part = {i: [i] for i in cycle4.indices}
    for x, y in product([f(1, 1), f(2, 3), f(4, 2)], repeat=2):
        assert dilated_product(cycle4, part, x, y) == prelie_product(cycle4, x, y)


def test_dilated_product_matches_the_resolved_system():
    S = system("i0_j0", 6)
    part = {1: [1, 2, 3], 2: [4, 5]}
    base = check_hopf(S, 5).table
    big = check_hopf(dilate(S, part), 5).table
    for x, y in product(big.indices, repeat=2):
        for k, l in product(range(1, 4), repeat=2):
            assert dilated_product(base, part, f(y, l), f(x, k)) == prelie_product(big, f(y, l), f(x, k))


# -- path algebra ------------------------------------------------------------------------

def test_path_algebra_of_the_four_cycle():
    A = path_algebra(dep_graph(Cycle(4).build(4)))
    assert A.condition_c() == (True, "ok")
    assert A.mul(P(2, 1), P(1, 1)) == P(1, 2)
    assert not A.mul(P(3, 1), P(1, 1))
    assert all(A.is_nonzero(i, n) for i in A.vertices for n in range(1, 6))


def test_condition_c_failures():
    sink = PathAlgebra([1, 2], {1: [2]})
    ok, why = sink.condition_c()
    assert not ok and "2" in why
    with pytest.raises(ValueError):
        sink.mul(P(2, 1), P(1, 1))
    fork = PathAlgebra([1, 2, 3], {1: [2, 3], 2: [1], 3: [3]})
    ok, why = fork.condition_c()
    assert not ok and "share" in why


def test_condition_c_decides_the_affine_system_on_small_graphs():
    graphs = [
        {1: [2], 2: [1]},
        {1: [1]},
        {1: [2, 3], 2: [1], 3: [1]},
        {1: [2, 3], 2: [1], 3: [2]},
        {1: [1, 2], 2: [1, 2]},
        {1: [2], 2: [2, 3], 3: [1]},
    ]
    for succ in graphs:
        A = PathAlgebra(succ, succ)
        ok, _ = A.condition_c()
        assert check_hopf(path_system(A, 7), 7).is_hopf == ok, succ


EVEN_AFFINE = [n for n in AFFINE_NAMES if n != "extended_multicycle"]


@pytest.mark.parametrize("name", EVEN_AFFINE)
def test_path_algebra_intertwines_with_the_prelie_product(name):
    S = system(name)
    v = verdict(name, 8)
    assert uneven_ladders(v.solution, 8) is None
    assert check_path_isomorphism(S, v.table, v.solution, 8) is None


def rank(rows):
    rows = [list(map(Q, r)) for r in rows]
    r = 0
    for c in range(len(rows[0]) if rows else 0):
        piv = next((k for k in range(r, len(rows)) if rows[k][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for k in range(len(rows)):
            if k != r and rows[k][c]:
                m = rows[k][c] / rows[r][c]
                rows[k] = [a - m * b for a, b in zip(rows[k], rows[r])]
        r += 1
    return r


def grade_one_annihilator_dim(idx, coeff, depth):
    """dim of {x in grade 1 : x * y = 0 for every y}, from the coefficients coeff(i, m, j)
    of e_j(1) * e_i(m) on e_i(m+1); an isomorphism invariant of a graded algebra
    generated in grade 1."""
    rows = [[coeff(i, m, j) for j in idx] for i in idx for m in range(1, depth + 1)]
    return len(idx) - rank(rows)


def test_uneven_extension_breaks_the_path_algebra_isomorphism():
    name = "extended_multicycle"
    S, v = system(name), verdict(name, 8)
    assert S.is_affine() and check_associative(v.table, 8)[0]
    assert check_path_isomorphism(S, v.table, v.solution, 8)[0] == "uneven"
    A = path_algebra(dep_graph(S))
    assert A.condition_c()[0]
    idx = list(S.indices)
    in_paths = grade_one_annihilator_dim(idx, lambda i, m, j: int(A.has_path(i, m, j)), 6)
    in_prelie = grade_one_annihilator_dim(idx, lambda i, m, j: v.table[i, j, m], 6)
    assert (in_paths, in_prelie) == (2, 1)


# -- unit group ----------------------------------------------------------------------------

def test_unit_group_examples(cycle4):
    G = UnitGroup(cycle4, 4)
    assert not G.one()
    assert G.mul(G.one(), f(1, 1)) == f(1, 1)
    assert G.mul(f(2, 1), f(1, 1)) == f(1, 1) + f(2, 1) + f(1, 2)
    x = f(1, 1)
    y = G.inverse(x)
    assert not G.mul(x, y) and not G.mul(y, x)
    assert unit_group_mul(cycle4, f(2, 1), f(1, 1), 4) == G.mul(f(2, 1), f(1, 1))
    assert unit_group_inverse(cycle4, x, 4) == y


def test_unit_group_rejects_non_associative_tables():
    with pytest.raises(ValueError):
        UnitGroup(verdict("selfloop_1", 8).table, 6)


@pytest.mark.parametrize("name", ["cycle3", "multicycle_2_1_2", "multicycle_1_2", "rescaled_cycle3"])
def test_unit_group_axioms_to_grade_six(name):
    table = deep_table(name, 6)
    G = UnitGroup(table, 6)
    idx = table.indices
    elems = [
        f(idx[0], 1) + 2 * f(idx[-1], 2),
        Q(1, 2) * f(idx[1], 1) - f(idx[0], 3),
        f(idx[-1], 1) + f(idx[0], 1) + 3 * f(idx[1], 2),
    ]
    a, b, c = elems
    assert G.mul(G.mul(a, b), c) == G.mul(a, G.mul(b, c))
    for x in elems:
        y = G.inverse(x)
        assert not G.mul(x, y) and not G.mul(y, x)
        assert G.mul(x, G.one()) == x.truncate(6)
