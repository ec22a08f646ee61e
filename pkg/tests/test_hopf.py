from fractions import Fraction
from itertools import product
from math import factorial
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdsehopf.hopf import (
    TensorPoly,
    TreePoly,
    admissible_cuts,
    all_cuts,
    antipode,
    coassociativity_sides,
    coproduct,
    counit,
    convolve,
    graft_product,
    graft_product_poly,
    graft_sites,
    leaf_cut_count,
    pair_cut_count,
)
from sdsehopf.trees import UNIT, Forest, enumerate_trees, ladder, leaf, parse_forest, parse_tree

GOLDEN = Path(__file__).parent / "golden"
T4 = parse_tree("d[c,b[a]]")


def load_golden(name):
    terms = {}
    for line in (GOLDEN / name).read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        left, right, c = line.split("\t")
        terms[(parse_forest(left), parse_forest(right))] = Fraction(c)
    return TensorPoly(terms)


def trees_upto(I, n):
    return [t for w in range(1, n + 1) for t in enumerate_trees(I, w)]


def test_worked_coproduct_matches_golden_file():
    expected = load_golden("coproduct_d_c_ba.txt")
    assert coproduct(T4) == expected
    assert len(coproduct(T4)) == 7


def test_cut_table():
    F = parse_forest
    # (W, admissible, P, R) for the 8 non-total cuts, in any order
    table = {
        (F("d[c,b[a]]"), True, F("()"), F("d[c,b[a]]")),
        (F("b[a]*d[c]"), True, F("b[a]"), F("d[c]")),
        (F("a*d[c,b]"), True, F("a"), F("d[c,b]")),
        (F("d[b[a]]*c"), True, F("c"), F("d[b[a]]")),
        (F("a*b*d[c]"), False, None, None),
        (F("b[a]*c*d"), True, F("b[a]*c"), F("d")),
        (F("a*d[b]*c"), True, F("a*c"), F("d[b]")),
        (F("a*b*c*d"), False, None, None),
    }
    got = {(c.forest, c.admissible, c.pruned, c.trunk) for c in all_cuts(T4)}
    assert got == table
    assert len(all_cuts(T4)) == 8
    adm = admissible_cuts(T4)
    assert len(adm) == 7
    assert (adm[-1].cut_forest, adm[-1].trunk) == (F("d[c,b[a]]"), UNIT)


def test_single_vertex_cuts_and_coproduct():
    cuts = admissible_cuts(leaf("a"))
    assert [(c.cut_forest, c.trunk) for c in cuts] == [(UNIT, Forest([leaf("a")])), (Forest([leaf("a")]), UNIT)]
    assert coproduct(leaf("a")) == TensorPoly({(Forest([leaf("a")]), UNIT): 1, (UNIT, Forest([leaf("a")])): 1})


@pytest.mark.parametrize("n", range(1, 8))
def test_ladder_cut_count_against_brute_force(n):
    t = ladder(*range(n))
    brute = sum(1 for c in all_cuts(t) if c.admissible) + 1
    assert len(admissible_cuts(t)) == brute == n + 1


def test_cut_weights_add_up():
    for t in trees_upto([1, 2], 5):
        for c in admissible_cuts(t):
            assert c.cut_forest.weight + c.trunk.weight == t.weight


def test_coassociativity_two_decorations_to_weight_six():
    for t in trees_upto([1, 2], 6):
        left, right = coassociativity_sides(t)
        assert left == right


def test_reduced_coproduct_has_positive_legs_and_keeps_the_root():
    for t in trees_upto([1, 2], 5):
        for (a, b), _ in coproduct(t).items():
            if (a, b) in ((Forest([t]), UNIT), (UNIT, Forest([t]))):
                continue
            assert a.weight > 0 and b.weight > 0
            assert len(b) == 1 and b[0].root == t.root


def test_antipode_small_cases():
    a, ab = leaf("a"), parse_tree("a[b]")
    assert antipode(a) == TreePoly.of(a, -1)
    assert antipode(ab) == TreePoly.of(ab, -1) + TreePoly.of(Forest([a, leaf("b")]))


def test_antipode_convolution_identity_to_weight_five():
    S = antipode
    ident = lambda x: x
    for t in trees_upto([1, 2], 5):
        x = TreePoly.of(t)
        assert not convolve(S, ident, x)
        assert not convolve(ident, S, x)
        assert counit(x) == 0


def test_antipode_is_multiplicative():
    f = Forest([parse_tree("1[2]"), parse_tree("2[1,1]")])
    prod = antipode(parse_tree("1[2]")) * antipode(parse_tree("2[1,1]"))
    assert antipode(f) == prod


def test_leaf_counts():
    assert leaf_cut_count(parse_tree("i[j,j]"), parse_tree("i[j]"), "j") == 2
    t = ladder(1, 2, 3)
    assert leaf_cut_count(t, ladder(1, 2), 3) == 1
    assert leaf_cut_count(t, ladder(1, 2), 2) == 0
    with pytest.raises(ValueError):
        leaf_cut_count(t, t, 1)


def symmetry(t):
    """Order of the automorphism group of t."""
    out = 1
    for c in set(t.children):
        m = t.children.count(c)
        out *= factorial(m) * symmetry(c) ** m
    return out


def test_symmetry_oracle():
    assert [symmetry(parse_tree(s)) for s in ("1", "1[1,1]", "1[1[1],1[1]]", "1[1[1,1],1[1,1]]", "1[1,1,1]")] == [1, 2, 2, 8, 6]


@pytest.mark.parametrize("n", range(1, 6))
def test_every_vertex_accepts_one_new_leaf(n):
    # leaf counts see each symmetric leaf separately; weighting by the symmetry
    # ratio turns them back into graft sites, one per vertex of t'
    bigger = enumerate_trees([1], n + 1)
    for tp in enumerate_trees([1], n):
        total = sum(Fraction(leaf_cut_count(t, tp, 1) * symmetry(tp), symmetry(t)) for t in bigger)
        assert total == tp.weight
        assert sum(graft_sites(leaf(1), tp).coefficient(t) for t in bigger) == tp.weight


def test_pair_counts():
    a, b = leaf("a"), leaf("b")
    assert pair_cut_count(a, b, parse_tree("b[a]")) == 1
    assert pair_cut_count(a, a, parse_tree("a[a]")) == 1
    with pytest.raises(ValueError):
        pair_cut_count(a, a, a)


def test_pair_counts_are_the_single_edge_part_of_the_coproduct():
    for t in trees_upto([1, 2], 5):
        single = {}
        for c in admissible_cuts(t):
            if c.num_cut_edges == 1:
                k = (c.cut_forest[0], c.trunk[0])
                single[k] = single.get(k, 0) + 1
        for (p, r), k in single.items():
            assert pair_cut_count(p, r, t) == k


def test_graft_examples():
    assert graft_product(leaf("a"), leaf("b")) == TreePoly.of(parse_tree("b[a]"))
    g = graft_product(leaf("a"), parse_tree("b[c]"))
    assert g == TreePoly.of(parse_tree("b[a,c]")) + TreePoly.of(parse_tree("b[c[a]]"))
    assert g == graft_sites(leaf("a"), parse_tree("b[c]"))


def test_graft_product_counts_cuts_not_sites():
    a, aa = leaf(1), parse_tree("1[1]")
    assert graft_sites(a, aa) == TreePoly.of(parse_tree("1[1,1]")) + TreePoly.of(parse_tree("1[1[1]]"))
    assert graft_product(a, aa) == TreePoly.of(parse_tree("1[1,1]"), 2) + TreePoly.of(parse_tree("1[1[1]]"))


def test_graft_product_matches_pair_counts_to_weight_six():
    ts = trees_upto([1, 2], 5)
    for t, tp in product(ts, ts):
        if t.weight + tp.weight > 6:
            continue
        g = graft_product(t, tp)
        for tpp in enumerate_trees([1, 2], t.weight + tp.weight, root=tp.root):
            assert g.coefficient(tpp) == pair_cut_count(t, tp, tpp)


def test_graft_product_is_pre_lie_to_weight_six():
    ts = [TreePoly.of(t) for t in trees_upto([1, 2], 4)]
    w = lambda x: next(iter(x))[0].weight
    m = graft_product_poly
    for x, y, z in product(ts, repeat=3):
        if w(x) + w(y) + w(z) > 6:
            continue
        assert m(m(x, y), z) - m(x, m(y, z)) == m(m(y, x), z) - m(y, m(x, z))


forests_st = st.lists(st.sampled_from(trees_upto([1, 2], 3)), max_size=3).map(Forest)


@settings(max_examples=40, deadline=None)
@given(forests_st, forests_st)
def test_coproduct_is_multiplicative(f, g):
    assert coproduct(f * g) == coproduct(f) * coproduct(g)
