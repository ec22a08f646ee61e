"""The graded pre-Lie algebra attached to a Hopf system, and its relatives.

Basis vectors are f_i(k) (decoration i, grade k >= 1) with

    f_j(l) * f_i(k) = lambda_k^{(i,j)} f_i(k+l)

read off a LambdaTable. The module also holds the path algebra A_G of a
directed graph, the tensor construction with e_a e_b = e_b used for
dilatations, and the group 1 + (completed algebra) in the associative case.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator, Mapping

from .hopf import format_rational, single_cuts
from .sdse import Decoration, LambdaTable, Sdse, Solution, _key
from .series import Series


class TableRangeError(LookupError):
    """A product needed a lambda entry the table does not provide."""


class _Graded:
    """Finite linear combination of basis vectors keyed by (index, grade)."""

    symbol = "x"

    def __init__(self, terms: Mapping[tuple, object] | None = None):
        self.terms: dict = {}
        for key, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                self.terms[key] = c

    @classmethod
    def basis(cls, i: Decoration, k: int, c=1):
        if k < 1:
            raise ValueError("grades start at 1")
        return cls({(i, k): c})

    @classmethod
    def zero(cls):
        return cls()

    def _new(self, terms: dict):
        out = type(self).__new__(type(self))
        out.terms = {k: v for k, v in terms.items() if v}
        return out

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return type(other) is type(self) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return self._new(out)

    def __neg__(self):
        return self._new({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, c):
        c = Fraction(c)
        return self._new({k: c * v for k, v in self.terms.items()})

    def items(self) -> Iterator[tuple[tuple, Fraction]]:
        return iter(self.sorted_items())

    def sorted_items(self) -> list[tuple[tuple, Fraction]]:
        return sorted(self.terms.items(), key=lambda kv: (kv[0][1], _dec_key(kv[0][0])))

    def grade(self) -> int:
        return max((k for _, k in self.terms), default=0)

    def component(self, k: int):
        return self._new({key: c for key, c in self.terms.items() if key[1] == k})

    def truncate(self, k: int):
        return self._new({key: c for key, c in self.terms.items() if key[1] <= k})

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (i, k), c in self.sorted_items():
            name = f"{self.symbol}_{i}({k})"
            if c == 1:
                parts.append(f"+ {name}")
            elif c == -1:
                parts.append(f"- {name}")
            elif c < 0:
                parts.append(f"- {format_rational(-c)}*{name}")
            else:
                parts.append(f"+ {format_rational(c)}*{name}")
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def __repr__(self) -> str:
        return self.to_text()


def _dec_key(i):
    return (0, i, "") if isinstance(i, int) else (1, 0, str(i))


class PreLieElem(_Graded):
    symbol = "f"


class PathAlgebraElem(_Graded):
    symbol = "P"


# -- the product ------------------------------------------------------------

def structure_constant(table: LambdaTable, i: Decoration, j: Decoration, k: int, assume_affine=None) -> Fraction:
    """lambda_k^{(i,j)}; beyond the table only with an explicit level certificate."""
    if k > table.max_n and assume_affine is not None:
        level = assume_affine.levels.get(i)
        if isinstance(level, int):
            return assume_affine.intercepts[(i, j)] + assume_affine.slopes[(i, j)] * (k - 1)
    try:
        v = table.get(i, j, k)
    except (IndexError, KeyError) as exc:
        raise TableRangeError(str(exc)) from None
    if v is None:
        raise TableRangeError(f"lambda_{k}^({i},{j}) is undetermined")
    return v


def prelie_product(table: LambdaTable, x: PreLieElem, y: PreLieElem, assume_affine=None) -> PreLieElem:
    """x * y by bilinearity from f_j(l) * f_i(k) = lambda_k^{(i,j)} f_i(k+l).

    ``assume_affine`` may be a LevelAssignment; entries past the table are
    then extrapolated from its certified slopes and intercepts.
    """
    out: dict = defaultdict(Fraction)
    for (j, l), c in x.terms.items():
        for (i, k), d in y.terms.items():
            lam = structure_constant(table, i, j, k, assume_affine)
            if lam:
                out[(i, k + l)] += c * d * lam
    return PreLieElem(out)


def _basis_triples(indices, grade_bound: int):
    for p in range(1, grade_bound - 1):
        for q in range(1, grade_bound - p):
            for r in range(1, grade_bound - p - q + 1):
                for a, b, c in product(indices, repeat=3):
                    yield (a, p), (b, q), (c, r)


@dataclass(frozen=True)
class PreLieWitness:
    x: tuple
    y: tuple
    z: tuple
    left: PreLieElem
    right: PreLieElem
    law: str

    def describe(self) -> str:
        x, y, z = (f"f_{i}({k})" for i, k in (self.x, self.y, self.z))
        if self.law == "associative":
            return f"({x}*{y})*{z} = {self.left.to_text()} but {x}*({y}*{z}) = {self.right.to_text()}"
        return (
            f"({x}*{y})*{z} - {x}*({y}*{z}) = {self.left.to_text()} but "
            f"({y}*{x})*{z} - {y}*({x}*{z}) = {self.right.to_text()}"
        )


def _sorted_indices(table: LambdaTable) -> list:
    return sorted(table.indices, key=_dec_key)


def _need(table: LambdaTable, grade_bound: int) -> None:
    if grade_bound - 1 > table.max_n:
        raise TableRangeError(
            f"grade bound {grade_bound} needs lambda up to n={grade_bound - 1}, table stops at {table.max_n}"
        )


def associator(table: LambdaTable, x: PreLieElem, y: PreLieElem, z: PreLieElem) -> PreLieElem:
    mul = lambda u, v: prelie_product(table, u, v)
    return mul(mul(x, y), z) - mul(x, mul(y, z))


def check_prelie_identity(table: LambdaTable, grade_bound: int) -> PreLieWitness | None:
    """Exhaustive check of the left pre-Lie identity on basis triples of total grade <= grade_bound.

    Returns None when it holds, else the first failing triple in scan order
    (grades first, then indices).
    """
    _need(table, grade_bound)
    basis = lambda key: PreLieElem.basis(*key)
    for kx, ky, kz in _basis_triples(_sorted_indices(table), grade_bound):
        x, y, z = basis(kx), basis(ky), basis(kz)
        left = associator(table, x, y, z)
        right = associator(table, y, x, z)
        if left != right:
            return PreLieWitness(kx, ky, kz, left, right, "pre-Lie")
    return None


def check_associative(table: LambdaTable, grade_bound: int) -> tuple[bool, PreLieWitness | None]:
    """Whether (x*y)*z = x*(y*z) on all basis triples of total grade <= grade_bound."""
    _need(table, grade_bound)
    mul = lambda u, v: prelie_product(table, u, v)
    for kx, ky, kz in _basis_triples(_sorted_indices(table), grade_bound):
        x, y, z = (PreLieElem.basis(*k) for k in (kx, ky, kz))
        left, right = mul(mul(x, y), z), mul(x, mul(y, z))
        if left != right:
            return False, PreLieWitness(kx, ky, kz, left, right, "associative")
    return True, None


def structure_constants(table: LambdaTable) -> list[tuple]:
    """Rows (i, j, k, lambda_k^{(i,j)}), meaning f_j(l) * f_i(k) = lambda f_i(k+l)."""
    rows = []
    for i in _sorted_indices(table):
        for j in _sorted_indices(table):
            for k in range(1, table.max_n + 1):
                rows.append((i, j, k, table.entries.get((i, j, k))))
    return rows


def structure_constants_text(table: LambdaTable) -> str:
    lines = []
    for i, j, k, v in structure_constants(table):
        lines.append(f"{i}\t{j}\t{k}\t{'⊥' if v is None else format_rational(v)}\n")
    return "".join(lines)


def pair_coefficients(sol: Solution, i: Decoration, n: int) -> dict:
    """Sum of n(t', t''; t) a_t over t in X_i(n), keyed by (t', t'')."""
    out: dict = defaultdict(Fraction)
    for t, a in sol.component(i, n).items():
        for pair, c in single_cuts(t).items():
            out[pair] += c * a
    return out


# -- dilatation -------------------------------------------------------------

def permutative_product(a, b):
    """e_a e_b = e_b on basis labels."""
    return b


def dilated_product(table: LambdaTable, partition: Mapping[Decoration, Iterable[Decoration]], x: PreLieElem, y: PreLieElem) -> PreLieElem:
    """Product on the basis f_x(k), x in J_i, where f_x(k) stands for f_i(k) (x) e_x."""
    owner = {}
    for i, block in partition.items():
        for v in block:
            if v in owner:
                raise ValueError(f"{v!r} occurs in two blocks")
            owner[v] = i
    out: dict = defaultdict(Fraction)
    for (yv, l), c in x.terms.items():
        for (xv, k), d in y.terms.items():
            lam = structure_constant(table, owner[xv], owner[yv], k)
            if lam:
                out[(permutative_product(yv, xv), k + l)] += c * d * lam
    return PreLieElem(out)


# -- path algebra -----------------------------------------------------------

class PathAlgebra:
    """A_G: generated by P_i(1), with P_j(n)P_i(m) = P_i(m+n) when some length-m path runs from i to j."""

    def __init__(self, vertices: Iterable[Decoration], succ: Mapping[Decoration, Iterable[Decoration]]):
        self.vertices = sorted(set(vertices), key=_dec_key)
        self.succ = {v: frozenset(succ.get(v, ())) for v in self.vertices}
        self.pred = {v: {u for u in self.vertices if v in self.succ[u]} for v in self.vertices}
        self._reach: dict = {}

    def reach(self, i: Decoration, m: int) -> frozenset:
        """Endpoints of oriented paths of length m starting at i."""
        key = (i, m)
        if key not in self._reach:
            if m == 0:
                self._reach[key] = frozenset([i])
            else:
                self._reach[key] = frozenset(w for v in self.reach(i, m - 1) for w in self.succ[v])
        return self._reach[key]

    def has_path(self, i: Decoration, m: int, j: Decoration) -> bool:
        return j in self.reach(i, m)

    def condition_c(self) -> tuple[bool, str]:
        for v in self.vertices:
            if not self.succ[v]:
                return False, f"vertex {v} has no direct descendant"
        for a in self.vertices:
            kids = sorted(self.succ[a], key=_dec_key)
            for u in kids:
                for w in kids:
                    if self.succ[u] != self.succ[w]:
                        return False, (
                            f"vertices {u} and {w} share the direct ascendant {a} "
                            f"but have different direct descendants"
                        )
        return True, "ok"

    def is_nonzero(self, i: Decoration, n: int) -> bool:
        """P_i(n) is a basis vector iff a path of length n-1 leaves i (valid under condition (c))."""
        return bool(self.reach(i, n - 1))

    def mul(self, x: PathAlgebraElem, y: PathAlgebraElem) -> PathAlgebraElem:
        ok, why = self.condition_c()
        if not ok:
            raise ValueError(f"the P_i(n) are not a basis: {why}")
        out: dict = defaultdict(Fraction)
        for (j, n), c in x.terms.items():
            for (i, m), d in y.terms.items():
                if self.has_path(i, m, j):
                    out[(i, m + n)] += c * d
        return PathAlgebraElem(out)


def path_algebra(G) -> PathAlgebra:
    """A_G for a DepGraph (or anything with .vertices and .succ)."""
    return PathAlgebra(G.vertices, G.succ)


def path_system(A: PathAlgebra, degree: int = 12) -> Sdse:
    """F_i = 1 + sum of h_j over the direct descendants j of i."""
    idx = A.vertices
    eqs = {}
    for i in idx:
        F = Series.constant(1, idx, degree)
        for j in A.succ[i]:
            F = F + Series.var(j, idx, degree)
        eqs[i] = F
    return Sdse(eqs, normalize=False)


def ladder_coefficient(sol: Solution, i: Decoration, n: int) -> Fraction:
    """a_n^{(i)}: the common coefficient of the ladders in X_i(n) (0 if X_i(n) = 0)."""
    comp = sol.component(i, n)
    if not comp:
        return Fraction(0)
    return comp[min(comp, key=_key)]


def uneven_ladders(sol: Solution, grade_bound: int) -> tuple | None:
    """First (i, n) whose ladders in X_i(n) carry different coefficients, or None."""
    for n in range(1, grade_bound + 1):
        for i in sol.indices:
            if len(set(sol.component(i, n).values())) > 1:
                return i, n
    return None


def check_path_isomorphism(S: Sdse, table: LambdaTable, sol: Solution, grade_bound: int):
    """Check that P_i(n) -> a_n^{(i)} f_i(n) turns the A_G product into the pre-Lie product.

    The rescaling only makes sense when every ladder of X_i(n) has the same
    coefficient; otherwise ("uneven", i, n) is returned.  Returns None on
    success, else the first failing pair of basis keys.
    """
    from .classify import dep_graph

    A = path_algebra(dep_graph(S))
    _need(table, grade_bound)
    bad = uneven_ladders(sol, grade_bound)
    if bad is not None:
        return ("uneven",) + bad
    norm = {(i, n): ladder_coefficient(sol, i, n) for i in A.vertices for n in range(1, grade_bound + 1)}

    def image(p: PathAlgebraElem) -> PreLieElem:
        return PreLieElem({key: c * norm[key] for key, c in p.terms.items()})

    for n in range(1, grade_bound):
        for m in range(1, grade_bound - n + 1):
            for j in A.vertices:
                for i in A.vertices:
                    P, Q = PathAlgebraElem.basis(j, n), PathAlgebraElem.basis(i, m)
                    if image(A.mul(P, Q)) != prelie_product(table, image(P), image(Q)):
                        return (j, n), (i, m)
    return None


# -- unit group -------------------------------------------------------------

class UnitGroup:
    """Elements 1 + x with x of positive grade, truncated at ``grade_bound``.

    An element is stored as its positive part x; (1+x)(1+y) = 1 + x + y + x*y.
    """

    def __init__(self, table: LambdaTable, grade_bound: int):
        ok, w = check_associative(table, grade_bound)
        if not ok:
            raise ValueError(f"the pre-Lie product is not associative: {w.describe()}")
        self.table = table
        self.grade_bound = grade_bound

    def one(self) -> PreLieElem:
        return PreLieElem()

    def mul(self, x: PreLieElem, y: PreLieElem) -> PreLieElem:
        g = self.grade_bound
        x, y = x.truncate(g), y.truncate(g)
        xy = prelie_product(self.table, x.truncate(g - 1), y.truncate(g - 1)).truncate(g)
        return x + y + xy

    def inverse(self, x: PreLieElem) -> PreLieElem:
        """y with x + y + x*y = 0, solved one grade at a time."""
        g = self.grade_bound
        x = x.truncate(g)
        y = PreLieElem()
        for k in range(1, g + 1):
            low = prelie_product(self.table, x.truncate(k - 1), y.truncate(k - 1)).component(k)
            y = y - x.component(k) - low
        return y


def unit_group_mul(table: LambdaTable, x: PreLieElem, y: PreLieElem, grade_bound: int) -> PreLieElem:
    return UnitGroup(table, grade_bound).mul(x, y)


def unit_group_inverse(table: LambdaTable, x: PreLieElem, grade_bound: int) -> PreLieElem:
    return UnitGroup(table, grade_bound).inverse(x)
