"""Generators for the known families of Hopf systems.

Every family is a small frozen description with a ``build(D)`` method that
returns the system with equations truncated at degree D.  Combinators wrap a
base description with a dilatation, an extension or a change of variables.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .sdse import Sdse, adjoin, change_vars, dilate
from .series import Series, f_scaled, log1m


def product_form(betas: Mapping[int, Fraction], weights: Mapping[int, Fraction], I, D: int) -> Series:
    """prod_j f_{beta_j / w_j}(w_j h_j), a factor being 1 when w_j = 0."""
    F = Series.constant(1, I, D)
    for j, b in betas.items():
        w = weights.get(j, 0)
        if w:
            F = F * f_scaled(b, w, Series.var(j, I, D))
    return F


def _frac_map(d: Mapping) -> dict:
    return {int(k): Fraction(v) for k, v in d.items()}


@dataclass(frozen=True)
class Cycle:
    """F_i = 1 + h_{i+1} on Z/nZ, indices 1..n."""

    n: int

    def build(self, D: int = 12) -> Sdse:
        if self.n < 2:
            raise ValueError("a cycle needs at least two vertices")
        I = list(range(1, self.n + 1))
        return Sdse({i: 1 + Series.var(i % self.n + 1, I, D) for i in I})


@dataclass(frozen=True)
class Multicycle:
    """A cycle dilated by blocks of the given sizes; vertices are numbered block by block."""

    sizes: tuple

    def blocks(self) -> list[list[int]]:
        out, k = [], 1
        for s in self.sizes:
            out.append(list(range(k, k + s)))
            k += s
        return out

    def build(self, D: int = 12) -> Sdse:
        if len(self.sizes) < 2 or min(self.sizes) < 1:
            raise ValueError("a multicycle needs at least two nonempty blocks")
        blocks = self.blocks()
        return dilate(Cycle(len(blocks)).build(D), {k + 1: b for k, b in enumerate(blocks)})


@dataclass(frozen=True)
class Complete:
    """F_x = prod over the other blocks J of (1 - sum_{y in J} h_y)^{-1}."""

    sizes: tuple

    def blocks(self) -> list[list[int]]:
        return Multicycle(self.sizes).blocks()

    def build(self, D: int = 12) -> Sdse:
        if len(self.sizes) < 2 or min(self.sizes) < 1:
            raise ValueError("a complete system needs at least two nonempty blocks")
        blocks = self.blocks()
        I = [x for b in blocks for x in b]
        out = {}
        for k, b in enumerate(blocks):
            F = Series.constant(1, I, D)
            for l, other in enumerate(blocks):
                if l != k:
                    F = F * (1 - sum((Series.var(y, I, D) for y in other), Series(I, D))).inverse()
            for x in b:
                out[x] = F
        return Sdse(out)


@dataclass(frozen=True)
class Fundamental:
    """The five-part family with parameters.

    i0: vertex -> beta; j0, k0: vertex lists; i1: vertex -> (nu, {j in I0+J0+K0: a_j});
    j1: vertex -> (nu, {j in I1: a_j}).
    """

    i0: Mapping = field(default_factory=dict)
    j0: Sequence = ()
    k0: Sequence = ()
    i1: Mapping = field(default_factory=dict)
    j1: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "i0", {int(k): Fraction(v) for k, v in dict(self.i0).items()})
        object.__setattr__(self, "j0", tuple(sorted(int(x) for x in self.j0)))
        object.__setattr__(self, "k0", tuple(sorted(int(x) for x in self.k0)))
        object.__setattr__(self, "i1", {int(k): (Fraction(n), _frac_map(a)) for k, (n, a) in dict(self.i1).items()})
        object.__setattr__(self, "j1", {int(k): (Fraction(n), _frac_map(a)) for k, (n, a) in dict(self.j1).items()})

    def __hash__(self):
        return hash(json.dumps(self.to_dict(), sort_keys=True))

    @property
    def indices(self) -> list[int]:
        return sorted(list(self.i0) + list(self.j0) + list(self.k0) + list(self.i1) + list(self.j1))

    def part(self, x: int) -> str:
        for name in ("i0", "j0", "k0", "i1", "j1"):
            if x in getattr(self, name):
                return name
        raise KeyError(x)

    def beta_of(self, j: int) -> Fraction:
        """beta_j on I0, 1 on J0, 0 on K0: the parameter of the factor attached to h_j."""
        if j in self.i0:
            return self.i0[j]
        if j in self.j0:
            return Fraction(1)
        if j in self.k0:
            return Fraction(0)
        raise KeyError(f"{j} is not in I0, J0 or K0")

    def default_weight(self, j: int) -> Fraction:
        """The linear coefficient of h_j in the K0 equation: 1+beta_j, 1, or 0."""
        if j in self.i0:
            return 1 + self.i0[j]
        if j in self.j0:
            return Fraction(1)
        return Fraction(0)

    def validate(self) -> None:
        idx = self.indices
        if len(set(idx)) != len(idx):
            raise ValueError("the five parts must be disjoint")
        if not self.i0 and not self.j0:
            raise ValueError("I0 and J0 cannot both be empty")
        base = set(self.i0) | set(self.j0) | set(self.k0)
        for i, (nu, a) in self.i1.items():
            if not set(a) <= base:
                raise ValueError(f"I1 vertex {i} uses coefficients outside I0, J0, K0")
            if nu == 1 and all(a.get(j, 0) == self.default_weight(j) for j in base):
                raise ValueError(f"I1 vertex {i} coincides with the K0 equation")
        for i, (nu, a) in self.j1.items():
            if nu == 0:
                raise ValueError(f"J1 vertex {i} needs a nonzero nu")
            sup = [j for j, c in a.items() if c]
            if not sup or not set(sup) <= set(self.i1):
                raise ValueError(f"J1 vertex {i} needs a nonempty support inside I1")
            if any(self.i1[j][0] != 1 for j in sup):
                raise ValueError(f"J1 vertex {i}: the I1 vertices of its support need nu = 1")
            first = self.i1[sup[0]][1]
            if any(self.i1[j][1] != first for j in sup):
                raise ValueError(f"J1 vertex {i}: the I1 vertices of its support must coincide")

    def build(self, D: int = 12) -> Sdse:
        self.validate()
        I = self.indices
        h = {j: Series.var(j, I, D) for j in I}
        one = Series.constant(1, I, D)

        betas = {j: self.beta_of(j) for j in list(self.i0) + list(self.j0) + list(self.k0)}

        def prod_factors(weights: Mapping[int, Fraction]) -> Series:
            return product_form(betas, weights, I, D)

        out = {}
        k0_weights = {j: self.default_weight(j) for j in list(self.i0) + list(self.j0)}
        for i in self.i0:
            w = dict(k0_weights)
            w[i] = Fraction(1)
            F = prod_factors(w)
            # the own factor is f_{beta_i}(h_i), i.e. scaled form with weight 1
            out[i] = F
        for i in self.j0:
            w = dict(k0_weights)
            w[i] = Fraction(0)
            out[i] = prod_factors(w)
        for i in self.k0:
            out[i] = prod_factors(k0_weights)
        for i, (nu, a) in self.i1.items():
            if nu:
                F = prod_factors({j: nu * c for j, c in a.items()})
                out[i] = F * (1 / nu) + (1 - 1 / nu)
            else:
                F = one
                for j, c in a.items():
                    if not c:
                        continue
                    b = self.beta_of(j)
                    if j in self.k0 or b == 0:
                        F = F + h[j] * c
                    else:
                        F = F + log1m(h[j] * b) * (c / b)
                out[i] = F
        for i, (nu, a) in self.j1.items():
            sup = [j for j, c in a.items() if c]
            ref = self.i1[sup[0]][1]
            w = {}
            for j in self.i0:
                w[j] = ref.get(j, 0) - 1 - self.i0[j]
            for j in self.j0:
                w[j] = ref.get(j, 0) - 1
            for j in self.k0:
                w[j] = ref.get(j, 0)
            F = prod_factors(w) * (1 / nu) + (1 - 1 / nu)
            for j in sup:
                F = F + h[j] * a[j]
            out[i] = F
        return Sdse(out)

    def arrays(self):
        """(a, a_tilde, b): lambda_1^{(r,l)} = a[r,l], lambda_n^{(r,l)} = a_tilde[r,l] + b[l](n-1) for n >= 2."""
        I = self.indices
        a, at, b = {}, {}, {}
        for l in I:
            if l in self.i0:
                b[l] = 1 + self.i0[l]
            elif l in self.j0:
                b[l] = Fraction(1)
            else:
                b[l] = Fraction(0)
        for r in I:
            for l in I:
                if l in self.i1 or l in self.j1:
                    base = Fraction(0)
                elif l in self.k0:
                    base = Fraction(0)
                else:
                    base = self.default_weight(l)
                if r in self.i0 or r in self.j0 or r in self.k0:
                    v = base
                    if r == l and l in self.i0:
                        v = Fraction(1)
                    elif r == l and l in self.j0:
                        v = Fraction(0)
                    a[(r, l)] = at[(r, l)] = v
                elif r in self.i1:
                    nu, coeffs = self.i1[r]
                    c = coeffs.get(l, Fraction(0)) if not (l in self.i1 or l in self.j1) else Fraction(0)
                    a[(r, l)] = c
                    at[(r, l)] = nu * c
                else:
                    nu, coeffs = self.j1[r]
                    sup = [j for j, c in coeffs.items() if c]
                    ref = self.i1[sup[0]][1]
                    if l in self.i1:
                        a[(r, l)] = coeffs.get(l, Fraction(0))
                        at[(r, l)] = Fraction(0)
                    elif l in self.j1:
                        a[(r, l)] = at[(r, l)] = Fraction(0)
                    else:
                        lam = ref.get(l, Fraction(0)) - b[l]
                        a[(r, l)] = lam / nu
                        at[(r, l)] = lam
        return a, at, b

    def expected_lambda(self, r: int, l: int, n: int) -> Fraction:
        a, at, b = self.arrays()
        return a[(r, l)] if n == 1 else at[(r, l)] + b[l] * (n - 1)

    def expected_levels(self) -> dict:
        out = {}
        for x in self.indices:
            if x in self.i1:
                out[x] = 0 if self.i1[x][0] == 1 else 1
            elif x in self.j1:
                out[x] = 1
            else:
                out[x] = 0
        return out

    def to_dict(self) -> dict:
        return {
            "family": "fundamental",
            "i0": {str(k): str(v) for k, v in self.i0.items()},
            "j0": list(self.j0),
            "k0": list(self.k0),
            "i1": {str(k): [str(n), {str(j): str(c) for j, c in a.items()}] for k, (n, a) in self.i1.items()},
            "j1": {str(k): [str(n), {str(j): str(c) for j, c in a.items()}] for k, (n, a) in self.j1.items()},
        }


@dataclass(frozen=True)
class Dilated:
    base: object
    partition: tuple  # ((i, (x, y, ...)), ...)

    def build(self, D: int = 12) -> Sdse:
        return dilate(self.base.build(D), {i: xs for i, xs in self.partition})


@dataclass(frozen=True)
class Extended:
    base: object
    new_index: int
    coefficients: tuple  # ((i, a_i), ...)

    def build(self, D: int = 12) -> Sdse:
        return adjoin(self.base.build(D), dict(self.coefficients), self.new_index)


@dataclass(frozen=True)
class Rescaled:
    base: object
    scalars: tuple  # ((i, lambda_i), ...)

    def build(self, D: int = 12) -> Sdse:
        return change_vars(self.base.build(D), dict(self.scalars))


def intro_fundamental(beta1=2, beta2=3) -> Fundamental:
    """The five-vertex example: I0 = {1, 2}, J0 = {3, 4}, K0 = {5}."""
    return Fundamental(i0={1: beta1, 2: beta2}, j0=(3, 4), k0=(5,))


def generate(spec, D: int = 12) -> Sdse:
    """Build a system from a family object or its dict form."""
    if isinstance(spec, Mapping):
        spec = from_dict(spec)
    return spec.build(D)


def from_dict(d: Mapping):
    fam = d.get("family")
    if fam == "cycle":
        return Cycle(int(d["n"]))
    if fam == "multicycle":
        return Multicycle(tuple(int(s) for s in d["sizes"]))
    if fam == "complete":
        return Complete(tuple(int(s) for s in d["sizes"]))
    if fam == "fundamental":
        return Fundamental(
            i0=d.get("i0", {}),
            j0=d.get("j0", ()),
            k0=d.get("k0", ()),
            i1={k: (v[0], v[1]) for k, v in d.get("i1", {}).items()},
            j1={k: (v[0], v[1]) for k, v in d.get("j1", {}).items()},
        )
    if fam == "dilate":
        return Dilated(from_dict(d["base"]), tuple((int(k), tuple(int(x) for x in v)) for k, v in sorted(d["partition"].items(), key=lambda e: int(e[0]))))
    if fam == "extend":
        return Extended(from_dict(d["base"]), int(d["new_index"]), tuple((int(k), Fraction(v)) for k, v in d["coefficients"].items()))
    raise ValueError(f"unknown family {fam!r}")
