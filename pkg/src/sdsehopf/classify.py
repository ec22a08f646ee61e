"""Structure recognition for Hopf systems.

The recognizer peels extension vertices, collapses dilatation classes, runs
the colinearity scan on the small quotient, reads levels off its lambda
table, then fits the multicyclic or the fundamental shape and checks the fit
by regenerating the whole system.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping

from .families import Cycle, Fundamental, product_form
from .hopf import format_rational
from .sdse import (
    LambdaTable,
    Sdse,
    Witness,
    adjoin,
    change_vars,
    check_hopf,
    dilate,
    restrict,
)
from .series import Series, f_beta, log1m

INFINITE = "infinite"
UNDETERMINED = "undetermined"

# smallest weight bound at which every vertex of a fundamental core gets a certified level
MIN_WEIGHT = 5


# -- dependence graph -----------------------------------------------------

@dataclass
class DepGraph:
    vertices: tuple
    edges: frozenset

    def __post_init__(self):
        self.succ = {v: sorted(w for u, w in self.edges if u == v) for v in self.vertices}
        self.pred = {v: sorted(u for u, w in self.edges if w == v) for v in self.vertices}

    def self_dependent(self) -> list:
        return [v for v in self.vertices if (v, v) in self.edges]

    def descendants(self, v) -> set:
        """Vertices reachable from v by a path of length >= 1."""
        seen: set = set()
        todo = list(self.succ[v])
        while todo:
            w = todo.pop()
            if w not in seen:
                seen.add(w)
                todo.extend(self.succ[w])
        return seen

    def ascendants(self, v) -> set:
        return {u for u in self.vertices if v in self.descendants(u)}

    def components(self) -> list[list]:
        """Weakly connected components, each sorted, in order of their smallest vertex."""
        left = set(self.vertices)
        out = []
        for v in self.vertices:
            if v not in left:
                continue
            comp, todo = set(), [v]
            while todo:
                w = todo.pop()
                if w in comp:
                    continue
                comp.add(w)
                todo.extend(self.succ[w])
                todo.extend(self.pred[w])
            left -= comp
            out.append(sorted(comp))
        return out

    def strongly_connected(self) -> list[list]:
        """Strongly connected components (Tarjan), each sorted."""
        index: dict = {}
        low: dict = {}
        stack: list = []
        on: set = set()
        out: list = []
        counter = [0]

        def visit(v):
            index[v] = low[v] = counter[0]
            counter[0] += 1
            stack.append(v)
            on.add(v)
            for w in self.succ[v]:
                if w not in index:
                    visit(w)
                    low[v] = min(low[v], low[w])
                elif w in on:
                    low[v] = min(low[v], index[w])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp))

        for v in self.vertices:
            if v not in index:
                visit(v)
        return sorted(out)

    def on_cycle(self) -> set:
        out = set(self.self_dependent())
        for comp in self.strongly_connected():
            if len(comp) > 1:
                out |= set(comp)
        return out

    def period(self, vertices: Iterable | None = None) -> tuple[int, dict]:
        """Period of a strongly connected subgraph and the class (distance mod period) of each vertex."""
        vs = sorted(self.vertices if vertices is None else vertices)
        inside = set(vs)
        dist = {vs[0]: 0}
        queue = deque([vs[0]])
        while queue:
            u = queue.popleft()
            for w in self.succ[u]:
                if w in inside and w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        g = 0
        for u in vs:
            for w in self.succ[u]:
                if w in inside and u in dist and w in dist:
                    g = gcd(g, dist[u] + 1 - dist[w])
        return g, {v: dist[v] % g if g else dist[v] for v in dist}

    def to_dot(self, classes: Iterable[Iterable] = (), peeled: Iterable = ()) -> str:
        palette = ["lightblue", "lightpink", "palegreen", "khaki", "plum", "lightsalmon", "lightcyan", "wheat"]
        lines = ["digraph G {"]
        boxed = set(peeled)
        grouped: set = set()
        for k, cls in enumerate(classes):
            cls = list(cls)
            if len(cls) < 2:
                continue
            lines.append(f"  subgraph cluster_{k} {{")
            lines.append(f'    style=filled; color="{palette[k % len(palette)]}";')
            for v in cls:
                lines.append(f"    {v};")
                grouped.add(v)
            lines.append("  }")
        for v in self.vertices:
            shape = "box" if v in boxed else "circle"
            lines.append(f"  {v} [shape={shape}];")
        for u, w in sorted(self.edges):
            lines.append(f"  {u} -> {w};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def dep_graph(S: Sdse) -> DepGraph:
    """Edge i -> j when F_i depends on h_j at the working truncation."""
    edges = frozenset((i, j) for i in S.indices for j in S.equations[i].variables())
    return DepGraph(S.indices, edges)


# -- levels ---------------------------------------------------------------

@dataclass
class LevelAssignment:
    levels: dict
    slopes: dict = field(default_factory=dict)
    intercepts: dict = field(default_factory=dict)
    max_n: int = 0

    def finite(self) -> dict:
        return {v: l for v, l in self.levels.items() if isinstance(l, int)}


def vertex_levels(table: LambdaTable, N: int | None = None) -> LevelAssignment:
    """Smallest M such that every row n -> lambda_n^{(i,j)} is affine for M < n <= max_n.

    A level is only certified with at least three points in the window; a
    vertex whose last three points already fail is reported as infinite.
    """
    top = table.max_n if N is None else min(N - 1, table.max_n)
    idx = table.indices
    out = LevelAssignment({}, max_n=top)
    for i in idx:
        rows = {j: [table.entries.get((i, j, n)) for n in range(1, top + 1)] for j in idx}
        if top < 3 or any(v is None for r in rows.values() for v in r):
            out.levels[i] = UNDETERMINED
            continue
        out.levels[i] = INFINITE
        for M in range(0, top - 2):
            fits = {}
            for j, r in rows.items():
                fit = _affine(r, M + 1)
                if fit is None:
                    break
                fits[j] = fit
            else:
                out.levels[i] = M
                for j, (b, c) in fits.items():
                    out.slopes[(i, j)] = b
                    out.intercepts[(i, j)] = c
                break
    return out


def _affine(row: list, start: int):
    """(b, c) with row[n-1] = c + b(n-1) for n >= start, or None."""
    pts = [(n, row[n - 1]) for n in range(start, len(row) + 1)]
    (n0, v0), (n1, v1) = pts[0], pts[1]
    b = Fraction(v1 - v0) / (n1 - n0)
    c = v0 - b * (n0 - 1)
    return (b, c) if all(v == c + b * (n - 1) for n, v in pts) else None


# -- single-series shapes -------------------------------------------------

@dataclass
class ProductFit:
    """F = (1/nu) prod_p f_{beta_p}(nu sum_l w_l h_l) + 1 - 1/nu, or the logarithmic shape when nu = 0.

    For the logarithmic shape each group is a single variable and
    F = 1 + sum_l (w_l / beta_l) log1m(beta_l h_l), read as w_l h_l when beta_l = 0.
    """

    kind: str
    nu: Fraction
    groups: list

    def expand(self, I, D: int) -> Series:
        one = Series.constant(1, I, D)
        if self.kind == "log":
            F = one
            for beta, w in self.groups:
                (l, c), = w.items()
                h = Series.var(l, I, D)
                F = F + (h * c if beta == 0 else log1m(h * beta) * (c / beta))
            return F
        G = one
        for beta, w in self.groups:
            inner = sum((Series.var(l, I, D, c * self.nu) for l, c in w.items()), Series(I, D))
            G = G * f_beta(beta, inner)
        return (G - 1) * (1 / self.nu) + 1


def _fit_plain_product(F: Series) -> list | None:
    a = {l: F.linear(l) for l in F.indices if F.linear(l)}
    if not a or F.variables() - set(a):
        return None
    sup = sorted(a)
    parent = {l: l for l in sup}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for x in range(len(sup)):
        for y in range(x + 1, len(sup)):
            l, m = sup[x], sup[y]
            if F.quadratic(l, m) != a[l] * a[m]:
                parent[find(m)] = find(l)
    groups: dict = {}
    for l in sup:
        groups.setdefault(find(l), []).append(l)
    out = []
    for g in sorted(groups.values()):
        l = g[0]
        beta = 2 * F.quadratic(l, l) / a[l] ** 2 - 1
        out.append((beta, {m: a[m] for m in g}))
    return out


def fit_product_form(F: Series) -> ProductFit | None:
    """Recognize F among the product, shifted product and logarithmic shapes (F(0) = 1)."""
    if F.const != 1:
        raise ValueError("the series must satisfy F(0) = 1")
    I, D = F.indices, F.degree
    groups = _fit_plain_product(F)
    if groups is not None:
        fit = ProductFit("product", Fraction(1), groups)
        if fit.expand(I, D) == F:
            return fit
    for nu in _nu_candidates(F):
        G = (F - 1) * nu + 1
        groups = _fit_plain_product(G)
        if groups is None:
            continue
        fit = ProductFit("shifted", nu, [(b, {l: c / nu for l, c in w.items()}) for b, w in groups])
        if fit.expand(I, D) == F:
            return fit
    a = {l: F.linear(l) for l in F.indices if F.linear(l)}
    if a and not F.variables() - set(a):
        fit = ProductFit("log", Fraction(0), [(2 * F.quadratic(l, l) / a[l], {l: a[l]}) for l in sorted(a)])
        if fit.expand(I, D) == F:
            return fit
    return None


def _nu_candidates(F: Series) -> list[Fraction]:
    a = {l: F.linear(l) for l in F.indices if F.linear(l)}
    sup = sorted(a)
    out: list = []
    for x in range(len(sup)):
        for y in range(x + 1, len(sup)):
            l, m = sup[x], sup[y]
            out.append(F.quadratic(l, m) / (a[l] * a[m]))
    for l in sup:
        u = 2 * F.quadratic(l, l) / a[l] ** 2
        if u:
            c3 = F[{l: 3}]
            out.append(2 * u - 6 * c3 / (a[l] ** 3 * u))
    seen: list = []
    for nu in out:
        if nu not in (0, 1) and nu not in seen:
            seen.append(nu)
    return seen


# -- recognizer -----------------------------------------------------------

@dataclass
class Classification:
    """Outcome of :func:`classify`.

    kind is one of multicyclic, fundamental, not_hopf, unknown, components.
    ``extensions`` lists (vertex, coefficients) in peel order; ``scaling``
    maps each core vertex to lambda with F = F_generated(lambda h).
    """

    kind: str
    reason: str = ""
    witness: Witness | None = None
    period: int | None = None
    cyclic_classes: list = field(default_factory=list)
    extensions: list = field(default_factory=list)
    classes: dict = field(default_factory=dict)
    params: Fundamental | None = None
    scaling: dict = field(default_factory=dict)
    levels: LevelAssignment | None = None
    parts: list = field(default_factory=list)
    degree: int = 0

    @property
    def is_hopf(self) -> bool:
        if self.kind == "components":
            return all(p.is_hopf for p in self.parts)
        return self.kind in ("multicyclic", "fundamental")

    def regenerate(self, D: int | None = None) -> Sdse:
        """Rebuild the system from the recorded parameters."""
        D = self.degree if D is None else D
        if self.kind == "multicyclic":
            core = [sorted(c) for c in self.core_classes()]
            base = dilate(Cycle(self.period).build(D), {k + 1: c for k, c in enumerate(core)})
        elif self.kind == "fundamental":
            base = dilate(self.params.build(D), self.classes)
        else:
            raise ValueError(f"nothing to regenerate for a {self.kind} verdict")
        S = change_vars(base, self.scaling)
        for x, a0 in reversed(self.extensions):
            S = adjoin(S, a0, x)
        return S

    def core_classes(self) -> list:
        peeled = {x for x, _ in self.extensions}
        return [[v for v in c if v not in peeled] for c in self.cyclic_classes]

    def to_text(self) -> str:
        lines = [f"verdict {self.kind}"]
        if self.reason:
            lines.append(f"reason {self.reason}")
        if self.witness is not None:
            lines.append(f"witness {self.witness.describe()}")
        if self.kind == "multicyclic":
            lines.append(f"period {self.period}")
            for k, c in enumerate(self.cyclic_classes):
                lines.append(f"class {k + 1} {' '.join(map(str, c))}")
        if self.kind == "fundamental":
            p = self.params
            lines.append("I0 " + " ".join(f"{i}:beta={format_rational(b)}" for i, b in sorted(p.i0.items())))
            lines.append("J0 " + " ".join(map(str, p.j0)))
            lines.append("K0 " + " ".join(map(str, p.k0)))
            for name, part in (("I1", p.i1), ("J1", p.j1)):
                for i, (nu, a) in sorted(part.items()):
                    coeffs = " ".join(f"a{j}={format_rational(c)}" for j, c in sorted(a.items()) if c)
                    lines.append(f"{name} {i}:nu={format_rational(nu)} {coeffs}")
            for rep, members in sorted(self.classes.items()):
                if len(members) > 1:
                    lines.append(f"dilatation {rep} -> {' '.join(map(str, members))}")
        for x, a0 in self.extensions:
            coeffs = " ".join(f"a{j}={format_rational(c)}" for j, c in sorted(a0.items()) if c)
            lines.append(f"extension {x} {coeffs}")
        if self.scaling and any(c != 1 for c in self.scaling.values()):
            lines.append("scaling " + " ".join(f"{v}:{format_rational(c)}" for v, c in sorted(self.scaling.items()) if c != 1))
        for p in self.parts:
            lines.append("component")
            lines.extend("  " + l for l in p.to_text().splitlines())
        return "\n".join(lines) + "\n"


def peel_extensions(S: Sdse) -> tuple[list, list]:
    """Repeatedly remove a vertex without ascendants whose equation is affine
    and whose direct descendants share one equation (smallest index first).

    Returns (peel sequence of (vertex, linear coefficients), remaining vertices).
    """
    G = dep_graph(S)
    remaining = set(S.indices)
    peel = []
    while len(remaining) > 1:
        for x in sorted(remaining):
            if any(x in G.succ[k] for k in remaining):
                continue
            F = S.equations[x]
            if not F.is_affine():
                continue
            sup = G.succ[x]
            if any(S.equations[j].coeffs != S.equations[sup[0]].coeffs for j in sup):
                continue
            if not set(sup) <= remaining - {x}:
                continue
            peel.append((x, {j: F.linear(j) for j in sup}))
            remaining.discard(x)
            break
        else:
            break
    return peel, sorted(remaining)


def dilatation_classes(S: Sdse) -> list[list]:
    """Group x, y when F_x = F_y and every F_k depends on h_x, h_y only through c_x h_x + c_y h_y."""
    derivs = {(k, x): S.equations[k].derivative(x) for k in S.indices for x in S.indices}
    classes: list[list] = []
    for x in S.indices:
        for cls in classes:
            r = cls[0]
            if S.equations[r].coeffs == S.equations[x].coeffs and _proportional(S, derivs, r, x):
                cls.append(x)
                break
        else:
            classes.append([x])
    return classes


def _proportional(S: Sdse, derivs, r, x) -> bool:
    rho = None
    for k in S.indices:
        dr, dx = derivs[(k, r)], derivs[(k, x)]
        for m, c in dr.coeffs.items():
            rho = dx[m] / c
            break
        if rho is not None:
            break
    if rho is None:
        return all(not derivs[(k, x)].coeffs for k in S.indices)
    return all((derivs[(k, r)] * rho).coeffs == derivs[(k, x)].coeffs for k in S.indices)


def classify(S: Sdse, N: int = 6, full_check: bool = False) -> Classification:
    """Recognize a connected Hopf system as extended multicyclic or extended fundamental.

    The colinearity scan runs to weight N on the quotient core (extensions
    peeled, one representative per dilatation class); with ``full_check`` it
    also runs on the whole system first.
    """
    G = dep_graph(S)
    comps = G.components()
    if len(comps) > 1:
        parts = [classify(restrict(S, c), N, full_check) for c in comps]
        return Classification("components", parts=parts, degree=S.degree)
    if N < MIN_WEIGHT:
        return Classification("unknown", reason=f"weight bound {N} is below {MIN_WEIGHT}, levels cannot be certified", degree=S.degree)
    if S.degree < N - 1:
        return Classification("unknown", reason=f"equations truncated at degree {S.degree}; weight {N} needs degree {N - 1}", degree=S.degree)
    if full_check:
        v = check_hopf(S, N)
        if not v.is_hopf:
            return Classification("not_hopf", witness=v.witness, degree=S.degree)

    peel, core = peel_extensions(S)
    C = restrict(S, core)
    classes = dilatation_classes(C)
    reps = [c[0] for c in classes]
    Q = restrict(C, reps)
    verdict = check_hopf(Q, N)
    if not verdict.is_hopf:
        full = verdict if reps == list(S.indices) else check_hopf(S, N)
        if not full.is_hopf:
            return Classification("not_hopf", witness=full.witness, degree=S.degree)
        return Classification("unknown", reason="the quotient core fails the scan but the whole system passes", degree=S.degree)
    levels = vertex_levels(verdict.table)
    vals = list(levels.levels.values())
    if UNDETERMINED in vals:
        return Classification("unknown", reason="undetermined levels", levels=levels, degree=S.degree)
    if all(isinstance(v, int) for v in vals):
        out = _fundamental(S, C, peel, classes)
    elif all(v == INFINITE for v in vals):
        out = _multicyclic(S, G, peel, core)
    else:
        return Classification("unknown", reason="finite and infinite levels mixed; a larger weight bound may separate them", levels=levels, degree=S.degree)
    out.levels = levels
    out.degree = S.degree
    if out.kind in ("multicyclic", "fundamental") and out.regenerate(S.degree) != S:
        return Classification("unknown", reason=f"{out.kind} parameters do not regenerate the system", levels=levels, degree=S.degree)
    return out


def _multicyclic(S: Sdse, G: DepGraph, peel: list, core: list) -> Classification:
    if not S.is_affine():
        return Classification("unknown", reason="no finite level but some equation is not affine")
    P, cls = G.period(core)
    if P < 2 or len(cls) != len(core):
        return Classification("unknown", reason="the core is not a multicycle")
    for x, _ in reversed(peel):
        d = G.succ[x][0]
        cls[x] = (cls[d] - 1) % P
    for x in S.indices:
        for y in G.succ[x]:
            if cls[y] != (cls[x] + 1) % P:
                return Classification("unknown", reason=f"edge {x}->{y} breaks the cyclic partition")
    for z in S.indices:
        kids = G.succ[z]
        for u in kids:
            if S.equations[u].coeffs != S.equations[kids[0]].coeffs:
                return Classification("unknown", reason=f"{u} and {kids[0]} share the ascendant {z} but differ")
    cyclic = [sorted(v for v in S.indices if cls[v] == k) for k in range(P)]
    scaling = {}
    coreset = set(core)
    for y in core:
        x = next(u for u in G.pred[y] if u in coreset)
        scaling[y] = S.linear(x, y)
    return Classification("multicyclic", period=P, cyclic_classes=cyclic, extensions=peel, scaling=scaling)


def _fundamental(S: Sdse, C: Sdse, peel: list, classes: list) -> Classification:
    reps = [c[0] for c in classes]
    members = {c[0]: c for c in classes}
    Q = restrict(C, reps)
    GQ = dep_graph(Q)
    cyc = GQ.on_cycle()
    i0_reps = [r for r in reps if (r, r) in GQ.edges]
    j0_reps = [r for r in reps if r in cyc and r not in i0_reps]
    if not i0_reps and not j0_reps:
        return Classification("unknown", reason="no self-dependent vertex and no cycle in the core")
    GC = dep_graph(C)
    base = {x for r in i0_reps + j0_reps for x in members[r]}
    scaling = {x: Fraction(1) for x in C.indices}
    for r in i0_reps:
        for x in members[r]:
            scaling[x] = C.linear(x, x)
    for r in j0_reps:
        for x in members[r]:
            u = next((u for u in GC.pred[x] if u in base and C.linear(u, x)), None)
            if u is None:
                return Classification("unknown", reason=f"cannot fix the scale of vertex {x}")
            scaling[x] = C.linear(u, x)
    canon = change_vars(C, {x: 1 / c for x, c in scaling.items()})

    i0: dict = {}
    dil: dict = {}
    for r in i0_reps:
        beta = 2 * canon.quadratic(r, r, r) - 1
        if beta == 0:
            for x in members[r]:
                i0[x] = Fraction(0)
                dil[x] = [x]
        else:
            i0[r] = beta
            dil[r] = members[r]
    j0 = list(j0_reps)
    for r in j0_reps:
        dil[r] = members[r]
    betas = {j: b for j, b in i0.items()}
    betas.update({j: Fraction(1) for j in j0})
    default = {j: (1 + b if j in i0 else Fraction(1)) for j, b in betas.items()}

    rest = [x for r in reps if r not in i0_reps and r not in j0_reps for x in members[r]]
    D = C.degree
    I = C.indices

    k0: list = []
    i1: dict = {}
    j1: dict = {}
    basis_vertices = set(base)
    k0_form = product_form(betas, default, I, D)
    k0_form = _dilated(k0_form, dil, I, D)
    for x in rest:
        desc = set(GC.succ[x])
        if desc <= basis_vertices and canon.equations[x].coeffs == k0_form.coeffs:
            k0.append(x)
    level0 = set(i0) | set(j0) | set(k0)
    level0_all = basis_vertices | set(k0)
    for x in rest:
        if x in k0:
            continue
        desc = set(GC.succ[x])
        if not desc <= level0_all:
            continue
        F = canon.equations[x]
        a = {j: F.linear(j) for j in sorted(level0)}
        j = next((j for j in sorted(level0) if a[j]), None)
        if j is None:
            return Classification("unknown", reason=f"vertex {x} has no linear term")
        beta_j = betas.get(j, Fraction(0))
        nu = (2 * F.quadratic(j, j) / a[j] - beta_j) / a[j]
        i1[x] = (nu, {j: c for j, c in a.items() if c})
    for x in rest:
        if x in k0 or x in i1:
            continue
        F = canon.equations[x]
        sup = [j for j in sorted(i1) if F.linear(j)]
        if not sup:
            return Classification("unknown", reason=f"vertex {x} fits no part of the fundamental shape")
        ref = i1[sup[0]][1]
        weights = {}
        for t in sorted(level0):
            b = ref.get(t, Fraction(0))
            weights[t] = b - 1 - i0[t] if t in i0 else (b - 1 if t in j0 else b)
        t = next((t for t in sorted(level0) if weights[t]), None)
        if t is None or not F.linear(t):
            return Classification("unknown", reason=f"vertex {x} fits no part of the fundamental shape")
        nu = weights[t] / F.linear(t)
        j1[x] = (nu, {j: F.linear(j) for j in sup})
    for x in k0 + list(i1) + list(j1):
        dil[x] = [x]
    try:
        params = Fundamental(i0=i0, j0=j0, k0=k0, i1=i1, j1=j1)
        params.validate()
    except ValueError as exc:
        return Classification("unknown", reason=f"fitted parameters are inconsistent: {exc}")
    return Classification("fundamental", extensions=peel, classes=dil, params=params, scaling=scaling)


def _dilated(F: Series, dil: Mapping, I, D: int) -> Series:
    """Substitute h_r -> sum of h over the block of r."""
    sums = {r: sum((Series.var(y, I, D) for y in block), Series(I, D)) for r, block in dil.items()}
    for v in I:
        sums.setdefault(v, Series.var(v, I, D))
    return F.compose(sums, I, D)
