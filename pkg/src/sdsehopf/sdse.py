"""Systems of combinatorial Dyson-Schwinger equations X_i = B+_i(F_i(X)).

This module solves a system in the completed tree algebra, decides degree by
degree whether the homogeneous components of the solution span a Hopf
subalgebra, and implements the four transformations of systems (change of
variables, restriction, dilatation, extension).
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from math import factorial, prod
from typing import Iterable, Iterator, Mapping, Sequence

from .hopf import TreePoly, format_rational, leaf_deletions
from .series import ONE, MultiIndex, Series, format_series, parse_expr
from .trees import Decoration, Forest, Tree, format_tree, leaf


class DegenerateSystem(ValueError):
    """Raised when some equation is constant or vanishes at the origin."""

    def __init__(self, message: str, indices: Iterable[Decoration] = ()):
        super().__init__(message)
        self.indices = tuple(indices)


class TruncationError(ValueError):
    """The equations are not known to a high enough degree for the requested weight."""


class Sdse:
    """A system indexed by a finite ordered set, each F_i a truncated series.

    With ``normalize=True`` every F_i is divided by F_i(0).
    """

    __slots__ = ("indices", "equations", "degree")

    def __init__(self, equations: Mapping[Decoration, Series], normalize: bool = True):
        if not equations:
            raise ValueError("a system needs at least one equation")
        indices = tuple(sorted(equations))
        eqs = {}
        for i in indices:
            F = equations[i]
            if F.indices != indices:
                F = F.reindex(indices)
            eqs[i] = F
        zero = [i for i in indices if not eqs[i].const]
        if zero:
            raise DegenerateSystem(f"F_i(0) = 0 for i in {zero}: the solution component X_i vanishes", zero)
        const = [i for i in indices if eqs[i].is_constant()]
        if const:
            raise DegenerateSystem(f"constant equation for i in {const}", const)
        if normalize:
            eqs = {i: F * (1 / F.const) if F.const != 1 else F for i, F in eqs.items()}
        self.indices = indices
        self.equations = eqs
        self.degree = min(F.degree for F in eqs.values())

    def __getitem__(self, i: Decoration) -> Series:
        return self.equations[i]

    def __iter__(self) -> Iterator[Decoration]:
        return iter(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Sdse):
            return NotImplemented
        return self.indices == other.indices and all(
            self.equations[i].coeffs == other.equations[i].coeffs for i in self.indices
        )

    __hash__ = None  # type: ignore[assignment]

    def is_normalized(self) -> bool:
        return all(F.const == 1 for F in self.equations.values())

    def linear(self, i: Decoration, j: Decoration) -> Fraction:
        return self.equations[i].linear(j)

    def quadratic(self, i: Decoration, j: Decoration, k: Decoration) -> Fraction:
        return self.equations[i].quadratic(j, k)

    def is_affine(self) -> bool:
        return all(F.is_affine() for F in self.equations.values())

    def truncate(self, degree: int) -> "Sdse":
        return Sdse({i: F.truncate(degree) for i, F in self.equations.items()}, normalize=False)

    def relabel(self, mapping: Mapping[Decoration, Decoration]) -> "Sdse":
        """Rename indices (a bijection)."""
        new_idx = [mapping[i] for i in self.indices]
        if len(set(new_idx)) != len(new_idx):
            raise ValueError("relabeling must be injective")
        out = {}
        for i, F in self.equations.items():
            coeffs = {MultiIndex({mapping[j]: e for j, e in m}): c for m, c in F.coeffs.items()}
            out[mapping[i]] = Series(new_idx, F.degree, coeffs)
        return Sdse(out, normalize=False)

    def __repr__(self) -> str:
        body = "; ".join(f"F{i} = {format_series(self.equations[i])}" for i in self.indices)
        return f"Sdse({body}, D={self.degree})"


# -- system files ---------------------------------------------------------

def load_system(text: str, normalize: bool = True) -> Sdse:
    """Read the JSON system format: indices, truncation, equations."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"system file is not valid JSON: {exc}") from exc
    for key in ("indices", "truncation", "equations"):
        if key not in data:
            raise ValueError(f"system file lacks the field {key!r}")
    indices = [int(i) for i in data["indices"]]
    D = int(data["truncation"])
    eqs = {int(k): v for k, v in data["equations"].items()}
    if set(eqs) != set(indices):
        raise ValueError("equations must be given for exactly the listed indices")
    return Sdse({i: parse_expr(eqs[i], indices, D) for i in indices}, normalize=normalize)


def dump_system(S: Sdse) -> str:
    data = {
        "indices": list(S.indices),
        "truncation": S.degree,
        "equations": {str(i): format_series(S.equations[i]) for i in S.indices},
    }
    return json.dumps(data, indent=2) + "\n"


# -- solutions ------------------------------------------------------------

@dataclass
class Solution:
    """Homogeneous components X_i(n) as maps tree -> coefficient."""

    indices: tuple
    N: int
    components: dict = field(default_factory=dict)

    def component(self, i: Decoration, n: int) -> dict:
        return self.components.get((i, n), {})

    def coefficient(self, t: Tree) -> Fraction:
        return self.components.get((t.root, t.weight), {}).get(t, Fraction(0))

    def X(self, i: Decoration, upto: int | None = None) -> TreePoly:
        upto = self.N if upto is None else upto
        terms = {}
        for n in range(1, upto + 1):
            for t, c in self.component(i, n).items():
                terms[Forest._sorted((t,))] = c
        return TreePoly(terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Solution):
            return NotImplemented
        keys = set(self.components) | set(other.components)
        return self.indices == other.indices and all(
            self.components.get(k, {}) == other.components.get(k, {}) for k in keys
        )

    def rows(self) -> list[tuple[Decoration, int, str, str]]:
        out = []
        for i in self.indices:
            for n in range(1, self.N + 1):
                comp = self.component(i, n)
                for t in sorted(comp, key=_key):
                    out.append((i, n, format_tree(t), format_rational(comp[t])))
        return out

    def to_text(self) -> str:
        return "".join(f"{i}\t{n}\t{t}\t{c}\n" for i, n, t, c in self.rows())


def _key(t: Tree):
    return t.key


def _check_budget(S: Sdse, N: int) -> None:
    if N < 1:
        raise ValueError("weight bound must be at least 1")
    if N - 1 > S.degree:
        raise TruncationError(
            f"weight {N} needs the equations to degree {N - 1}, but they are truncated at {S.degree}"
        )


def _downward_closure(vectors: Iterable[tuple]) -> set:
    out: set = set()
    stack = list(vectors)
    while stack:
        v = stack.pop()
        if v in out:
            continue
        out.add(v)
        for k, e in enumerate(v):
            if e:
                stack.append(v[:k] + (e - 1,) + v[k + 1:])
    return out


def solve_e1(S: Sdse, N: int) -> Solution:
    """Solve to weight N with the closed product formula over root forests.

    For t = B+_i(t_1^{r_1} ... t_k^{r_k}) with exponent vector p over the
    roots of the t_s, a_t = a^{(i)}_p * prod_j p_j! * prod_s a_{t_s}^{r_s}/r_s!.
    """
    _check_budget(S, N)
    idx = S.indices
    pos = {i: k for k, i in enumerate(idx)}
    width = len(idx)

    def dense(m: MultiIndex) -> tuple:
        v = [0] * width
        for j, e in m:
            v[pos[j]] = e
        return tuple(v)

    tables = {
        i: {dense(m): c for m, c in S.equations[i].coeffs.items() if m.degree <= N - 1}
        for i in idx
    }
    closure = _downward_closure(p for tab in tables.values() for p in tab)
    mult_cache: dict = {}

    sol = Solution(idx, N)
    pool: list[tuple[Tree, Fraction, int]] = []
    bounds: dict[int, tuple[int, int]] = {}
    # forest records: (sorted trees, index of last tree, its multiplicity, exponent vector, coefficient)
    forests: dict[int, list] = {0: [((), -1, 0, (0,) * width, Fraction(1))]}

    for n in range(1, N + 1):
        for i in idx:
            table = tables[i]
            comp = {}
            for trees, _, _, p, coef in forests[n - 1]:
                a = table.get(p)
                if a:
                    m = mult_cache.get(p)
                    if m is None:
                        m = mult_cache[p] = prod(factorial(e) for e in p)
                    comp[Tree._make(i, trees)] = a * m * coef
            sol.components[(i, n)] = comp
        if n == N:
            break
        new = sorted(
            ((t, c, pos[i]) for i in idx for t, c in sol.components[(i, n)].items()),
            key=lambda e: e[0].key,
        )
        bounds[n] = (len(pool), len(pool) + len(new))
        pool.extend(new)
        recs = []
        for w in range(1, n + 1):
            lo, hi = bounds[w]
            for trees, last, mult, p, coef in forests[n - w]:
                for k in range(max(last, lo), hi):
                    t, a, r = pool[k]
                    q = p[:r] + (p[r] + 1,) + p[r + 1:]
                    if q not in closure:
                        continue
                    if k == last:
                        recs.append((trees + (t,), k, mult + 1, q, coef * a / (mult + 1)))
                    else:
                        recs.append((trees + (t,), k, 1, q, coef * a))
        forests[n] = recs
    return sol


def solve_subst(S: Sdse, N: int) -> Solution:
    """Solve to weight N by iterating X_i = B+_i(F_i(X)) one weight at a time."""
    from .series import substitute

    _check_budget(S, N)
    idx = S.indices
    X = {i: TreePoly() for i in idx}
    sol = Solution(idx, N)
    for n in range(1, N + 1):
        new = {}
        for i in idx:
            G = substitute(S.equations[i], X, n - 1).component(n - 1)
            comp = {Tree(i, f): c for f, c in G.items()}
            sol.components[(i, n)] = comp
            new[i] = TreePoly({Forest._sorted((t,)): c for t, c in comp.items()})
        X = {i: X[i] + new[i] for i in idx}
    return sol


# -- the colinearity scan -------------------------------------------------

@dataclass
class LambdaTable:
    """lambda_n^{(i,j)} for 1 <= n <= max_n; None marks an undetermined entry."""

    indices: tuple
    max_n: int
    entries: dict = field(default_factory=dict)

    def get(self, i: Decoration, j: Decoration, n: int):
        if not 1 <= n <= self.max_n:
            raise IndexError(f"lambda_{n} outside the table range 1..{self.max_n}")
        if (i, j, n) not in self.entries:
            raise KeyError(f"lambda_{n}^({i},{j}) was not computed")
        return self.entries[(i, j, n)]

    def __getitem__(self, key):
        return self.get(*key)

    def row(self, i: Decoration, j: Decoration) -> list:
        return [self.entries.get((i, j, n)) for n in range(1, self.max_n + 1)]

    def is_complete(self) -> bool:
        return all(
            (i, j, n) in self.entries
            for i in self.indices for j in self.indices for n in range(1, self.max_n + 1)
        )

    def affine_fit(self, i: Decoration, j: Decoration, start: int) -> tuple[Fraction, Fraction] | None:
        """(slope b, intercept c) with lambda_n = c + b(n-1) for all n >= start, or None."""
        pts = [(n, self.entries.get((i, j, n))) for n in range(start, self.max_n + 1)]
        if len(pts) < 2 or any(v is None for _, v in pts):
            return None
        (n0, v0), (n1, v1) = pts[0], pts[1]
        b = (v1 - v0) / (n1 - n0)
        c = v0 - b * (n0 - 1)
        if all(v == c + b * (n - 1) for n, v in pts):
            return b, c
        return None

    def rows_text(self) -> str:
        out = []
        for (i, j, n) in sorted(self.entries):
            v = self.entries[(i, j, n)]
            out.append(f"{i}\t{j}\t{n}\t{'⊥' if v is None else format_rational(v)}\n")
        return "".join(out)


@dataclass(frozen=True)
class Witness:
    """Two trees t1, t2 of weight n rooted at i whose ratios v/a disagree.

    ``t1`` is None when the whole component X_i(n) vanishes while v does not.
    """

    n: int
    i: Decoration
    j: Decoration
    t1: Tree | None
    a1: Fraction
    v1: Fraction
    t2: Tree
    a2: Fraction
    v2: Fraction

    def describe(self) -> str:
        head = f"n={self.n} i={self.i} j={self.j}"
        if self.t1 is None:
            return f"{head}: X_i(n) = 0 but v({format_tree(self.t2)}) = {format_rational(self.v2)}"
        return (
            f"{head}: v({format_tree(self.t1)})/a = {format_rational(self.v1)}/{format_rational(self.a1)}"
            f" but v({format_tree(self.t2)}) = {format_rational(self.v2)}, a = {format_rational(self.a2)}"
        )

    def is_violation(self) -> bool:
        """Recheck that the two trees really contradict colinearity."""
        if self.t1 is None:
            return self.v2 != 0
        return self.v1 * self.a2 != self.v2 * self.a1


@dataclass
class HopfVerdict:
    status: str
    N: int
    table: LambdaTable
    witness: Witness | None = None
    solution: Solution | None = None

    @property
    def is_hopf(self) -> bool:
        return self.status == "hopf_up_to_N"

    def __bool__(self) -> bool:
        return self.is_hopf

    def to_text(self) -> str:
        if self.is_hopf:
            return f"hopf_up_to_N N={self.N}\n"
        return f"failed N={self.N}\nwitness {self.witness.describe()}\n"


def leaf_vectors(sol: Solution, i: Decoration, n: int) -> dict:
    """v_j(t') = sum over t in X_i(n+1) of (number of j-leaves of t whose removal gives t') * a_t."""
    v: dict = defaultdict(lambda: defaultdict(Fraction))
    for t, a in sol.component(i, n + 1).items():
        for (j, tp), k in leaf_deletions(t).items():
            v[j][tp] += k * a
    return v


def check_hopf(S: Sdse, N: int, solution: Solution | None = None, fail_fast: bool = True) -> HopfVerdict:
    """Test the colinearity criterion for every (n, i, j) with n < N, in that order."""
    sol = solve_e1(S, N) if solution is None else solution
    idx = S.indices
    table = LambdaTable(idx, N - 1)
    first: Witness | None = None
    for n in range(1, N):
        for i in idx:
            a_vec = sol.component(i, n)
            order = sorted(a_vec, key=_key)
            v = leaf_vectors(sol, i, n)
            for j in idx:
                vj = v.get(j, {})
                w = _colinear(n, i, j, order, a_vec, vj)
                if w is None:
                    if order:
                        table.entries[(i, j, n)] = vj.get(order[0], Fraction(0)) / a_vec[order[0]]
                    else:
                        table.entries[(i, j, n)] = None
                    continue
                if first is None:
                    first = w
                if fail_fast:
                    return HopfVerdict("failed", N, table, first, sol)
    if first is not None:
        return HopfVerdict("failed", N, table, first, sol)
    return HopfVerdict("hopf_up_to_N", N, table, None, sol)


def _colinear(n, i, j, order, a_vec, vj) -> Witness | None:
    zero = Fraction(0)
    bad = [t for t, x in vj.items() if x and t not in a_vec]
    if not order:
        if bad:
            t2 = min(bad, key=_key)
            return Witness(n, i, j, None, zero, zero, t2, zero, vj[t2])
        return None
    t1 = order[0]
    a1, v1 = a_vec[t1], vj.get(t1, zero)
    for t in order[1:]:
        x = vj.get(t, zero)
        if x * a1 != v1 * a_vec[t]:
            bad.append(t)
            break
    if not bad:
        return None
    t2 = min(bad, key=_key)
    return Witness(n, i, j, t1, a1, v1, t2, a_vec.get(t2, zero), vj.get(t2, zero))


def is_hopf(S: Sdse, N: int) -> bool:
    return check_hopf(S, N).is_hopf


# -- lambda from the equations --------------------------------------------

def lambda_from_path(S: Sdse, path: Sequence[Decoration], j: Decoration) -> Fraction:
    """lambda_n^{(i_1, j)} computed along a path i_1 -> ... -> i_n from linear and quadratic coefficients."""
    if not path:
        raise ValueError("empty path")
    value = S.linear(path[-1], j)
    for p in range(len(path) - 1):
        u, w = path[p], path[p + 1]
        den = S.linear(u, w)
        if not den:
            raise ValueError(f"no edge {u} -> {w}: the coefficient of h_{w} in F_{u} vanishes")
        value += (2 if j == w else 1) * S.quadratic(u, j, w) / den
    return value


def first_path(S: Sdse, i: Decoration, n: int) -> list | None:
    """The smallest path i = i_1 -> ... -> i_n along nonzero linear coefficients, or None."""
    if n == 1:
        return [i]
    for w in S.indices:
        if S.linear(i, w):
            rest = first_path(S, w, n - 1)
            if rest is not None:
                return [i] + rest
    return None


def path_table(S: Sdse, max_n: int) -> LambdaTable:
    """lambda_n^{(i,j)} for n <= max_n from the path formula along :func:`first_path`.

    For a Hopf system this is the table of the colinearity scan, at a cost
    independent of the number of trees; entries without a path are None.
    """
    table = LambdaTable(S.indices, max_n)
    for i in S.indices:
        for n in range(1, max_n + 1):
            path = first_path(S, i, n)
            for j in S.indices:
                table.entries[(i, j, n)] = None if path is None else lambda_from_path(S, path, j)
    return table


def reconstruct_series(table: LambdaTable, linear: Mapping | None, i: Decoration, degree: int | None = None) -> Series:
    """Rebuild F_i from the table, starting from F_i(0) = 1.

    a_{p + e_j} = (lambda^{(i,j)}_{|p|+1} - sum_l p_l a^{(l)}_j) a_p / (p_j + 1),
    always using the smallest j in the support of the target exponent.
    """
    idx = table.indices
    D = table.max_n if degree is None else min(degree, table.max_n)
    if linear is None:
        linear = {(l, j): table.get(l, j, 1) for l in idx for j in idx}
    coeffs: dict[MultiIndex, Fraction] = {ONE: Fraction(1)}
    layer = {ONE}
    for d in range(1, D + 1):
        targets = {p * MultiIndex.unit(j) for p in layer for j in idx}
        nxt = set()
        for q in sorted(targets):
            j = q[0][0]
            qj = q[0][1]
            p = MultiIndex(q[1:] + ((j, qj - 1),))
            ap = coeffs.get(p)
            if not ap:
                continue
            lam = table.get(i, j, d)
            if lam is None:
                raise ValueError(f"lambda_{d}^({i},{j}) is undetermined but needed")
            s = sum((e * Fraction(linear[(l, j)]) for l, e in p), Fraction(0))
            aq = (lam - s) * ap / qj
            if aq:
                coeffs[q] = aq
                nxt.add(q)
        layer = nxt
    return Series(idx, D, coeffs)


def verify_child_additivity(S: Sdse, table: LambdaTable, N: int | None = None):
    """Additivity of lambda over the children of a root.

    For every root i, target j and multiset of (d_l, n_l) with a^{(i)} nonzero
    at the exponent of the d_l, checks
    lambda_{sum n_l + 1}^{(i,j)} = lambda_{p+1}^{(i,j)} + sum_l (lambda_{n_l}^{(d_l,j)} - a^{(d_l)}_j).
    Entries the scan could not fix (a failed colinearity test) are filled with
    the value the path formula forces on them, when some path exists;
    undetermined entries are skipped.  Returns (ok, counterexample).
    """
    top = table.max_n if N is None else min(N, table.max_n)
    idx = S.indices

    def lam(i, j, n):
        if (i, j, n) in table.entries:
            return table.entries[(i, j, n)]
        path = first_path(S, i, n)
        return None if path is None else lambda_from_path(S, path, j)

    pairs = [(d, n) for d in idx for n in range(1, top)]
    for i in idx:
        F = S.equations[i]
        for p in range(1, top):
            for combo in combinations_with_replacement(pairs, p):
                total = sum(n for _, n in combo) + 1
                if total > top or p + 1 > top:
                    continue
                exps: dict = {}
                for d, _ in combo:
                    exps[d] = exps.get(d, 0) + 1
                if not F[MultiIndex(exps)]:
                    continue
                for j in idx:
                    left = lam(i, j, total)
                    right = lam(i, j, p + 1)
                    parts = [lam(d, j, n) for d, n in combo]
                    if left is None or right is None or any(x is None for x in parts):
                        continue
                    rhs = right + sum(x - S.linear(d, j) for x, (d, _) in zip(parts, combo))
                    if left != rhs:
                        return False, (i, j, combo, left, rhs)
    return True, None


verify_prop19_cond2 = verify_child_additivity  # name used by the interface contract


# -- transformations ------------------------------------------------------

def change_vars(S: Sdse, lam: Mapping[Decoration, Fraction], mu: Mapping[Decoration, Fraction] | None = None) -> Sdse:
    """The system of mu_i F_i(lam_j h_j); scalars default to 1 and must be nonzero."""
    mu = mu or {}
    for d in (lam, mu):
        for k, c in d.items():
            if not Fraction(c):
                raise ValueError(f"zero scalar for index {k!r}")
    out = {i: S.equations[i].scale_vars(lam) * Fraction(mu.get(i, 1)) for i in S.indices}
    return Sdse(out, normalize=False)


def restrict(S: Sdse, subset: Iterable[Decoration]) -> Sdse:
    """Set h_j = 0 outside ``subset`` and keep the equations indexed by it."""
    sub = sorted(set(subset))
    if not sub:
        raise ValueError("cannot restrict to an empty index set")
    missing = [i for i in sub if i not in S.indices]
    if missing:
        raise KeyError(f"unknown indices {missing}")
    drop = [j for j in S.indices if j not in sub]
    out = {i: S.equations[i].kill(drop).reindex(sub) for i in sub}
    const = [i for i in sub if out[i].is_constant()]
    if const:
        raise DegenerateSystem(f"restriction makes F_i constant for i in {const}", const)
    return Sdse(out, normalize=False)


def dilate(S: Sdse, partition: Mapping[Decoration, Iterable[Decoration]]) -> Sdse:
    """Replace index i by the block J_i: F'_x = F_i(sum_{y in J_j} h_y) for x in J_i."""
    blocks = {i: sorted(set(partition[i])) for i in S.indices if i in partition}
    if set(blocks) != set(S.indices):
        raise ValueError("the partition must give a block for every index")
    seen: set = set()
    for i, b in blocks.items():
        if not b:
            raise ValueError(f"empty block for index {i!r}")
        if seen & set(b):
            raise ValueError("blocks overlap")
        seen |= set(b)
    new_idx = sorted(seen)
    D = S.degree
    sums = {j: sum((Series.var(y, new_idx, D) for y in blocks[j]), Series(new_idx, D)) for j in S.indices}
    out = {}
    for i in S.indices:
        G = S.equations[i].compose(sums, new_idx, D)
        for x in blocks[i]:
            out[x] = G
    return Sdse(out, normalize=False)


def adjoin(S: Sdse, a0: Mapping[Decoration, Fraction], new_index: Decoration) -> Sdse:
    """The system S with the extra equation F_0 = 1 + sum a0_i h_i, without any validity check."""
    if new_index in S.indices:
        raise ValueError(f"index {new_index!r} already used")
    new_idx = sorted(S.indices + (new_index,))
    D = S.degree
    out = {i: S.equations[i].reindex(new_idx) for i in S.indices}
    F0 = Series.constant(1, new_idx, D)
    for i, c in a0.items():
        if i not in S.indices:
            raise KeyError(f"unknown index {i!r}")
        F0 = F0 + Series.var(i, new_idx, D, c)
    if F0.is_constant():
        raise DegenerateSystem("the new equation would be constant", (new_index,))
    out[new_index] = F0
    return Sdse(out, normalize=False)


def extend(S: Sdse, a0: Mapping[Decoration, Fraction], new_index: Decoration, N: int = 6) -> tuple[Sdse, bool]:
    """Adjoin F_0 = 1 + sum a0_i h_i under a fresh index.

    The flag says whether the extension is Hopf: S must be Hopf (checked to
    weight N) and the F_i must coincide on the support of a0.
    """
    T = adjoin(S, a0, new_index)
    support = [i for i in S.indices if a0.get(i, 0)]
    same = all(S.equations[k].coeffs == S.equations[support[0]].coeffs for k in support)
    valid = same and check_hopf(S, min(N, S.degree + 1)).is_hopf
    return T, valid
