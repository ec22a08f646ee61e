"""Connes-Kreimer Hopf algebra of decorated rooted trees.

Elements are sparse maps from forests to exact rationals.  The coproduct sums
over admissible cuts; the antipode uses the closed formula over all cuts.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

from .trees import UNIT, Forest, Tree, format_forest

Scalar = Fraction | int


def format_rational(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class TreePoly:
    """Finite linear combination of forests with rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Forest, Scalar] | None = None):
        self.terms: dict[Forest, Fraction] = {}
        if terms:
            for f, c in terms.items():
                if c:
                    self.terms[f] = Fraction(c)

    @classmethod
    def of(cls, x: Tree | Forest, c: Scalar = 1) -> "TreePoly":
        f = Forest._sorted((x,)) if isinstance(x, Tree) else x
        return cls({f: c})

    @classmethod
    def unit(cls) -> "TreePoly":
        return cls({UNIT: 1})

    def _new(self, terms: dict) -> "TreePoly":
        p = TreePoly()
        p.terms = {f: c for f, c in terms.items() if c}
        return p

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[Forest]:
        return iter(self.terms)

    def items(self):
        return self.terms.items()

    def coefficient(self, f: Tree | Forest) -> Fraction:
        if isinstance(f, Tree):
            f = Forest._sorted((f,))
        return self.terms.get(f, Fraction(0))

    def __eq__(self, other) -> bool:
        if isinstance(other, TreePoly):
            return self.terms == other.terms
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other: "TreePoly") -> "TreePoly":
        out = dict(self.terms)
        for f, c in other.terms.items():
            out[f] = out.get(f, 0) + c
        return self._new(out)

    def __neg__(self) -> "TreePoly":
        return self._new({f: -c for f, c in self.terms.items()})

    def __sub__(self, other: "TreePoly") -> "TreePoly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, TreePoly):
            return self.mul(other)
        c = Fraction(other)
        return self._new({f: c * v for f, v in self.terms.items()})

    def __rmul__(self, other):
        return self * other

    def mul(self, other: "TreePoly", weight_bound: int | None = None) -> "TreePoly":
        """Forest product, dropping terms of weight above ``weight_bound``."""
        out: dict = {}
        right = [(g, g.weight, d) for g, d in other.terms.items()]
        for f, c in self.terms.items():
            wf = f.weight
            for g, wg, d in right:
                if weight_bound is not None and wf + wg > weight_bound:
                    continue
                h = f * g
                out[h] = out.get(h, 0) + c * d
        return self._new(out)

    def component(self, n: int) -> "TreePoly":
        return self._new({f: c for f, c in self.terms.items() if f.weight == n})

    def truncate(self, n: int) -> "TreePoly":
        return self._new({f: c for f, c in self.terms.items() if f.weight <= n})

    def weights(self) -> set[int]:
        return {f.weight for f in self.terms}

    def sorted_items(self) -> list[tuple[Forest, Fraction]]:
        return sorted(self.terms.items(), key=lambda e: e[0].key)

    def __repr__(self) -> str:
        if not self.terms:
            return "TreePoly(0)"
        body = " + ".join(f"{format_rational(c)}*{format_forest(f)}" for f, c in self.sorted_items())
        return f"TreePoly({body})"


class TensorPoly:
    """Finite linear combination of pairs of forests (elements of H (x) H)."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[Forest, Forest], Scalar] | None = None):
        self.terms: dict[tuple[Forest, Forest], Fraction] = {}
        if terms:
            for k, c in terms.items():
                if c:
                    self.terms[k] = Fraction(c)

    @classmethod
    def unit(cls) -> "TensorPoly":
        return cls({(UNIT, UNIT): 1})

    def __eq__(self, other) -> bool:
        if isinstance(other, TensorPoly):
            return self.terms == other.terms
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def __len__(self) -> int:
        return len(self.terms)

    def items(self):
        return self.terms.items()

    def __add__(self, other: "TensorPoly") -> "TensorPoly":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return TensorPoly(out)

    def __sub__(self, other: "TensorPoly") -> "TensorPoly":
        return self + other * -1

    def __mul__(self, other):
        if isinstance(other, TensorPoly):
            out: dict = {}
            for (a, b), c in self.terms.items():
                for (x, y), d in other.terms.items():
                    k = (a * x, b * y)
                    out[k] = out.get(k, 0) + c * d
            return TensorPoly(out)
        c = Fraction(other)
        return TensorPoly({k: c * v for k, v in self.terms.items()})

    def triples(self) -> list[tuple[str, str, str]]:
        """Deterministic (left, right, coefficient) rows for golden files."""
        rows = sorted(self.terms.items(), key=lambda e: (e[0][0].key, e[0][1].key))
        return [(format_forest(a), format_forest(b), format_rational(c)) for (a, b), c in rows]

    def __repr__(self) -> str:
        return "TensorPoly(" + " + ".join(f"{c}*{a}(x){b}" for a, b, c in self.triples()) + ")"


# -- cuts -----------------------------------------------------------------

@dataclass(frozen=True)
class CutResult:
    cut_forest: Forest  # P^c
    trunk: Forest  # R^c, a single tree or the unit
    num_cut_edges: int


@lru_cache(maxsize=None)
def _partial_cuts(t: Tree) -> tuple:
    # non-total admissible cuts as (pruned trees, trunk tree, number of cut edges)
    options = [((), (), 0)]
    for c in t.children:
        choices = [((c,), None, 1)] + list(_partial_cuts(c))
        options = [
            (p + q, kids + ((r,) if r is not None else ()), n + m)
            for p, kids, n in options
            for q, r, m in choices
        ]
    return tuple((p, Tree(t.root, kids), n) for p, kids, n in options)


def admissible_cuts(t: Tree) -> list[CutResult]:
    """One entry per admissible edge subset, plus the total cut (listed last)."""
    out = [CutResult(Forest(p), Forest._sorted((r,)), n) for p, r, n in _partial_cuts(t)]
    out.append(CutResult(Forest._sorted((t,)), UNIT, 0))
    return out


@dataclass(frozen=True)
class Cut:
    """An arbitrary (possibly non-admissible) edge subset of a tree.

    Vertices are numbered in preorder; an edge is named by its lower vertex.
    """

    edges: frozenset
    admissible: bool
    forest: Forest  # W^c
    pruned: Forest | None  # P^c when admissible
    trunk: Forest | None  # R^c when admissible


def _preorder(t: Tree) -> list[tuple]:
    out: list[tuple] = []

    def walk(s: Tree, parent: int) -> None:
        me = len(out)
        out.append((s.root, parent))
        for c in s.children:
            walk(c, me)

    walk(t, -1)
    return out


def _rebuild(verts: list[tuple], cut: frozenset) -> list[Tree]:
    # components of the tree after removing the cut edges, root component first
    kids: dict[int, list[Tree]] = {v: [] for v in range(len(verts))}
    tops = []
    built: dict[int, Tree] = {}
    for v in range(len(verts) - 1, -1, -1):
        d, parent = verts[v]
        built[v] = Tree(d, kids[v])
        if parent < 0 or v in cut:
            tops.append(v)
        else:
            kids[parent].append(built[v])
    tops.sort()
    return [built[v] for v in tops]


def all_cuts(t: Tree) -> list[Cut]:
    """Every non-total cut (all 2^(edges) subsets), with admissibility and W/P/R."""
    verts = _preorder(t)
    edges = list(range(1, len(verts)))
    out = []
    for mask in range(1 << len(edges)):
        cut = frozenset(e for k, e in enumerate(edges) if mask >> k & 1)
        parts = _rebuild(verts, cut)
        ok = True
        for v in cut:
            u = verts[v][1]
            while u > 0:
                if u in cut:
                    ok = False
                    break
                u = verts[u][1]
            if not ok:
                break
        w = Forest(parts)
        if ok:
            out.append(Cut(cut, True, w, Forest(parts[1:]), Forest._sorted(parts[:1])))
        else:
            out.append(Cut(cut, False, w, None, None))
    return out


# -- coproduct and antipode -----------------------------------------------

@lru_cache(maxsize=None)
def _coproduct_tree(t: Tree) -> TensorPoly:
    acc: dict = {}
    for c in admissible_cuts(t):
        k = (c.cut_forest, c.trunk)
        acc[k] = acc.get(k, 0) + 1
    return TensorPoly(acc)


def coproduct(x: TreePoly | Tree | Forest) -> TensorPoly:
    if not isinstance(x, TreePoly):
        x = TreePoly.of(x)
    out: dict = {}
    for f, c in x.items():
        d = TensorPoly.unit()
        for t in f:
            d = d * _coproduct_tree(t)
        for k, v in d.items():
            out[k] = out.get(k, 0) + c * v
    return TensorPoly(out)


@lru_cache(maxsize=None)
def _antipode_tree(t: Tree) -> TreePoly:
    acc: dict = {}
    for c in all_cuts(t):
        sign = -1 if len(c.edges) % 2 == 0 else 1
        acc[c.forest] = acc.get(c.forest, 0) + sign
    return TreePoly(acc)


def antipode(x: TreePoly | Tree | Forest) -> TreePoly:
    if not isinstance(x, TreePoly):
        x = TreePoly.of(x)
    out = TreePoly()
    for f, c in x.items():
        s = TreePoly.unit()
        for t in f:
            s = s * _antipode_tree(t)
        out = out + s * c
    return out


def counit(x: TreePoly) -> Fraction:
    return x.coefficient(UNIT)


def coassociativity_sides(t: Tree) -> tuple[dict, dict]:
    """(Delta (x) id) Delta(t) and (id (x) Delta) Delta(t) as maps on forest triples."""
    left: dict = {}
    right: dict = {}
    for (a, b), c in coproduct(t).items():
        for (a1, a2), d in coproduct(a).items():
            k = (a1, a2, b)
            left[k] = left.get(k, 0) + c * d
        for (b1, b2), d in coproduct(b).items():
            k = (a, b1, b2)
            right[k] = right.get(k, 0) + c * d
    return ({k: v for k, v in left.items() if v}, {k: v for k, v in right.items() if v})


def convolve(f, g, x: TreePoly) -> TreePoly:
    """m o (f (x) g) o Delta, for linear maps f, g on TreePoly."""
    out = TreePoly()
    for (a, b), c in coproduct(x).items():
        out = out + f(TreePoly.of(a)).mul(g(TreePoly.of(b))) * c
    return out


# -- counting functions used by the SDSE criteria -------------------------

def _distinct_children(t: Tree) -> Iterator[tuple[Tree, int, tuple]]:
    # (child, multiplicity, the other children)
    kids = t.children
    k = 0
    while k < len(kids):
        c = kids[k]
        m = 1
        while k + m < len(kids) and kids[k + m] is c:
            m += 1
        yield c, m, kids[:k] + kids[k + 1:]
        k += m


@lru_cache(maxsize=None)
def leaf_deletions(t: Tree) -> dict:
    """Map (j, t') -> number of leaves decorated j whose deletion leaves t'."""
    out: Counter = Counter()
    for c, m, rest in _distinct_children(t):
        if not c.children:
            out[(c.root, Tree._make(t.root, rest))] += m
        else:
            for (j, c2), k in leaf_deletions(c).items():
                out[(j, Tree(t.root, rest + (c2,)))] += m * k
    return dict(out)


def leaf_cut_count(t: Tree, t_prime: Tree, j) -> int:
    """n_j(t, t'): leaves of t decorated j whose deletion gives t'."""
    if t.weight != t_prime.weight + 1:
        raise ValueError("leaf_cut_count needs weight(t) = weight(t') + 1")
    return leaf_deletions(t).get((j, t_prime), 0)


@lru_cache(maxsize=None)
def single_cuts(t: Tree) -> dict:
    """Map (pruned tree, trunk tree) -> number of single-edge cuts of t."""
    out: Counter = Counter()
    for c, m, rest in _distinct_children(t):
        out[(c, Tree._make(t.root, rest))] += m
        for (p, c2), k in single_cuts(c).items():
            out[(p, Tree(t.root, rest + (c2,)))] += m * k
    return dict(out)


def pair_cut_count(t_prime: Tree, t_second: Tree, t: Tree) -> int:
    """n(t', t''; t): admissible cuts of t with P^c = t' and R^c = t''."""
    if t_prime.weight + t_second.weight != t.weight:
        raise ValueError("pair_cut_count needs weight(t') + weight(t'') = weight(t)")
    return single_cuts(t).get((t_prime, t_second), 0)


@lru_cache(maxsize=None)
def _grafts(t: Tree, s: Tree) -> dict:
    out: Counter = Counter()
    out[Tree(s.root, s.children + (t,))] += 1
    for c, m, rest in _distinct_children(s):
        for g, k in _grafts(t, c).items():
            out[Tree(s.root, rest + (g,))] += m * k
    return dict(out)


def graft_sites(t: Tree, t_prime: Tree) -> TreePoly:
    """Sum over the vertices v of t' of t' with t grafted at v."""
    return TreePoly({Forest._sorted((g,)): k for g, k in _grafts(t, t_prime).items()})


def graft_product(t: Tree, t_prime: Tree) -> TreePoly:
    """f_t * f_t' in the dual basis: sum of n(t, t'; t'') t''.

    The trees t'' are the graft results; their coefficients count cuts, so
    they differ from graft_sites by symmetry factors.
    """
    return TreePoly({Forest._sorted((g,)): single_cuts(g)[(t, t_prime)] for g in _grafts(t, t_prime)})


def graft_product_poly(x: TreePoly, y: TreePoly) -> TreePoly:
    """Bilinear extension of graft_product to combinations of single trees."""
    out = TreePoly()
    for f, c in x.items():
        for g, d in y.items():
            if len(f) != 1 or len(g) != 1:
                raise ValueError("graft product is defined on trees")
            out = out + graft_product(f[0], g[0]) * (c * d)
    return out


def trees_of(x: TreePoly) -> Iterable[tuple[Tree, Fraction]]:
    for f, c in x.items():
        if len(f) == 1:
            yield f[0], c
