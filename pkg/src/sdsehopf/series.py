"""Truncated multivariate power series over the rationals.

A series lives in Q[[h_i, i in I]] modulo terms of total degree > D, where D
is explicit state carried by each value.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping

from .hopf import TreePoly, format_rational
from .trees import Decoration


class MultiIndex(tuple):
    """Sparse exponent vector: sorted ``(index, exponent)`` pairs, exponents > 0."""

    __slots__ = ()

    def __new__(cls, exps: Mapping[Decoration, int] | Iterable[tuple[Decoration, int]] = ()):
        items = exps.items() if isinstance(exps, Mapping) else exps
        return tuple.__new__(cls, sorted((i, e) for i, e in items if e))

    @classmethod
    def unit(cls, j: Decoration, e: int = 1) -> "MultiIndex":
        return tuple.__new__(cls, ((j, e),))

    @property
    def degree(self) -> int:
        return sum(e for _, e in self)

    def get(self, j: Decoration) -> int:
        for i, e in self:
            if i == j:
                return e
        return 0

    def support(self) -> tuple:
        return tuple(i for i, _ in self)

    def as_dict(self) -> dict:
        return dict(self)

    def __mul__(self, other: "MultiIndex") -> "MultiIndex":  # type: ignore[override]
        if not self:
            return other
        if not other:
            return self
        d = dict(self)
        for i, e in other:
            d[i] = d.get(i, 0) + e
        return MultiIndex(d)

    def __repr__(self) -> str:
        return f"MultiIndex({dict(self)})"


ONE = MultiIndex()


class Series:
    """A power series in the variables ``h_i`` (i in ``indices``) truncated at degree D."""

    __slots__ = ("indices", "degree", "coeffs")

    def __init__(self, indices: Iterable[Decoration], degree: int, coeffs: Mapping | None = None):
        if degree < 0:
            raise ValueError("truncation degree must be nonnegative")
        self.indices = tuple(sorted(set(indices)))
        self.degree = degree
        self.coeffs: dict[MultiIndex, Fraction] = {}
        known = set(self.indices)
        for m, c in (coeffs or {}).items():
            if not isinstance(m, MultiIndex):
                m = MultiIndex(m)
            if m.degree > degree or not c:
                continue
            for i, _ in m:
                if i not in known:
                    raise KeyError(f"unknown index {i!r}")
            self.coeffs[m] = self.coeffs.get(m, Fraction(0)) + Fraction(c)
        self.coeffs = {m: c for m, c in self.coeffs.items() if c}

    # construction helpers
    @classmethod
    def constant(cls, c, indices, degree: int) -> "Series":
        return cls(indices, degree, {ONE: c})

    @classmethod
    def var(cls, j, indices, degree: int, c=1) -> "Series":
        return cls(indices, degree, {MultiIndex.unit(j): c})

    def _new(self, coeffs: dict, degree: int | None = None) -> "Series":
        s = object.__new__(Series)
        s.indices = self.indices
        s.degree = self.degree if degree is None else degree
        s.coeffs = {m: c for m, c in coeffs.items() if c and m.degree <= s.degree}
        return s

    def _check(self, other: "Series") -> int:
        if self.indices != other.indices:
            raise ValueError("series over different index sets")
        return min(self.degree, other.degree)

    def _coerce(self, other) -> "Series":
        if isinstance(other, Series):
            return other
        return Series.constant(Fraction(other), self.indices, self.degree)

    # queries
    def __getitem__(self, m) -> Fraction:
        if not isinstance(m, MultiIndex):
            m = MultiIndex(m)
        return self.coeffs.get(m, Fraction(0))

    def coefficient(self, exps: Mapping | MultiIndex) -> Fraction:
        return self[exps]

    @property
    def const(self) -> Fraction:
        return self.coeffs.get(ONE, Fraction(0))

    def linear(self, j) -> Fraction:
        return self.coeffs.get(MultiIndex.unit(j), Fraction(0))

    def quadratic(self, j, k) -> Fraction:
        """a_{j,k}: the coefficient of h_j h_k (of h_j^2 when j = k)."""
        m = MultiIndex.unit(j, 2) if j == k else MultiIndex({j: 1, k: 1})
        return self.coeffs.get(m, Fraction(0))

    def variables(self) -> set:
        """Indices whose variable occurs in some stored term."""
        return {i for m in self.coeffs for i, _ in m}

    def depends_on(self, j) -> bool:
        return any(m.get(j) for m in self.coeffs)

    def is_constant(self) -> bool:
        return all(m == ONE for m in self.coeffs)

    def is_affine(self) -> bool:
        return all(m.degree <= 1 for m in self.coeffs)

    def max_degree(self) -> int:
        return max((m.degree for m in self.coeffs), default=0)

    def sorted_items(self) -> list[tuple[MultiIndex, Fraction]]:
        return sorted(self.coeffs.items(), key=lambda e: (e[0].degree, tuple(e[0])))

    def __eq__(self, other) -> bool:
        if isinstance(other, Series):
            return self.indices == other.indices and self.degree == other.degree and self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self == self._coerce(other)
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def equal_to_degree(self, other: "Series", degree: int | None = None) -> bool:
        d = self._check(other) if degree is None else degree
        return self.truncate(d).coeffs == other.truncate(d).coeffs

    # ring operations
    def __add__(self, other) -> "Series":
        other = self._coerce(other)
        d = self._check(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0) + c
        return self._new(out, d)

    __radd__ = __add__

    def __neg__(self) -> "Series":
        return self._new({m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other) -> "Series":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Series":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Series":
        if not isinstance(other, Series):
            c = Fraction(other)
            return self._new({m: c * v for m, v in self.coeffs.items()})
        d = self._check(other)
        out: dict = {}
        right = [(m, m.degree, c) for m, c in other.coeffs.items()]
        for m1, c1 in self.coeffs.items():
            d1 = m1.degree
            for m2, d2, c2 in right:
                if d1 + d2 <= d:
                    m = m1 * m2
                    out[m] = out.get(m, 0) + c1 * c2
        return self._new(out, d)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Series":
        if isinstance(other, Series):
            return self * other.inverse()
        return self * (1 / Fraction(other))

    def inverse(self) -> "Series":
        a0 = self.const
        if not a0:
            raise ZeroDivisionError("cannot invert a series with zero constant term")
        # 1/(a0 (1 + u)) = (1/a0) sum (-u)^k
        u = self * (1 / a0) - 1
        acc = Series.constant(1, self.indices, self.degree)
        power = Series.constant(1, self.indices, self.degree)
        for k in range(1, self.degree + 1):
            power = power * u
            if not power.coeffs:
                break
            acc = acc + power * (-1) ** k
        return acc * (1 / a0)

    def __pow__(self, k: int) -> "Series":
        if not isinstance(k, int):
            raise TypeError("only integer powers are supported")
        if k < 0:
            return self.inverse() ** (-k)
        out = Series.constant(1, self.indices, self.degree)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def truncate(self, degree: int) -> "Series":
        return self._new(dict(self.coeffs), min(degree, self.degree))

    def with_degree(self, degree: int) -> "Series":
        """Same coefficients at a new truncation (raising it only makes sense for exact polynomials)."""
        s = self._new(dict(self.coeffs), degree)
        return s

    def reindex(self, indices: Iterable[Decoration]) -> "Series":
        s = Series(indices, self.degree)
        s.coeffs = dict(self.coeffs)
        for m in s.coeffs:
            for i, _ in m:
                if i not in s.indices:
                    raise KeyError(f"index {i!r} missing from the new index set")
        return s

    def derivative(self, j) -> "Series":
        """d/dh_j, known to degree D-1."""
        out = {}
        for m, c in self.coeffs.items():
            e = m.get(j)
            if e:
                out[MultiIndex((i, f - (i == j)) for i, f in m)] = c * e
        return self._new(out, max(self.degree - 1, 0))

    # substitutions
    def scale_vars(self, lam: Mapping[Decoration, Fraction]) -> "Series":
        """F(lam_j h_j)."""
        out = {}
        for m, c in self.coeffs.items():
            for i, e in m:
                c = c * Fraction(lam.get(i, 1)) ** e
            out[m] = c
        return self._new(out)

    def kill(self, zero: Iterable[Decoration]) -> "Series":
        """Set h_j = 0 for j in ``zero``."""
        z = set(zero)
        return self._new({m: c for m, c in self.coeffs.items() if not any(i in z for i, _ in m)})

    def compose(self, images: Mapping[Decoration, "Series"], indices=None, degree: int | None = None) -> "Series":
        """Substitute h_j := images[j] (series without constant term) in F."""
        if not images:
            raise ValueError("empty substitution")
        sample = next(iter(images.values()))
        idx = sample.indices if indices is None else tuple(sorted(indices))
        D = min([self.degree] + [g.degree for g in images.values()]) if degree is None else degree
        for g in images.values():
            if g.const:
                raise ValueError("substituted series must have zero constant term")
        powers: dict = {}

        def power(j, e):
            key = (j, e)
            if key not in powers:
                powers[key] = images[j].truncate(D) ** e if e > 1 else images[j].truncate(D)
            return powers[key]

        acc = Series(idx, D)
        for m, c in self.coeffs.items():
            if m.degree > D:
                continue
            term = Series.constant(c, idx, D)
            for j, e in m:
                term = term * power(j, e)
            acc = acc + term
        return acc

    def __repr__(self) -> str:
        return f"Series({format_series(self)!r}, D={self.degree})"

    def __str__(self) -> str:
        return format_series(self)


# -- the f_beta family ----------------------------------------------------

def _univariate(coeffs: list[Fraction], inner: Series, degree: int | None = None) -> Series:
    if inner.const:
        raise ValueError("inner series must have zero constant term")
    D = inner.degree if degree is None else min(degree, inner.degree)
    inner = inner.truncate(D)
    acc = Series.constant(coeffs[0], inner.indices, D)
    power = Series.constant(1, inner.indices, D)
    for k in range(1, D + 1):
        power = power * inner
        if not power.coeffs:
            break
        if coeffs[k]:
            acc = acc + power * coeffs[k]
    return acc


def f_beta_coefficients(beta, D: int) -> list[Fraction]:
    """(1+beta)...(1+(k-1)beta)/k! for k = 0..D."""
    beta = Fraction(beta)
    out = [Fraction(1)]
    for k in range(1, D + 1):
        out.append(out[-1] * (1 + (k - 1) * beta) / k)
    return out


def f_scaled_coefficients(beta, lam, D: int) -> list[Fraction]:
    """Coefficients of f_{beta/lam}(lam h): lam(lam+beta)...(lam+(k-1)beta)/k!; valid for lam = 0."""
    beta, lam = Fraction(beta), Fraction(lam)
    out = [Fraction(1)]
    for k in range(1, D + 1):
        out.append(out[-1] * (lam + (k - 1) * beta) / k)
    return out


def f_beta(beta, inner: Series, D: int | None = None) -> Series:
    """f_beta(inner) = sum_k (1+beta)...(1+(k-1)beta)/k! inner^k."""
    D = inner.degree if D is None else D
    return _univariate(f_beta_coefficients(beta, D), inner, D)


def f_scaled(beta, lam, inner: Series, D: int | None = None) -> Series:
    """f_{beta/lam}(lam * inner), written so that lam = 0 gives the constant 1."""
    D = inner.degree if D is None else D
    return _univariate(f_scaled_coefficients(beta, lam, D), inner, D)


def log1m(inner: Series, D: int | None = None) -> Series:
    """-ln(1 - inner) = sum_{k>=1} inner^k / k."""
    D = inner.degree if D is None else D
    return _univariate([Fraction(0)] + [Fraction(1, k) for k in range(1, D + 1)], inner, D)


# -- text format ----------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int, expected: str | None = None):
        where = f" at position {pos}"
        exp = f" (expected {expected})" if expected else ""
        super().__init__(f"{message}{where}{exp}: {text!r}")
        self.pos = pos
        self.expected = expected
        self.text = text


_TOKEN = re.compile(r"\s*(?:(\d+)|(h\d+)|(fb|ln1m)\b|([-+*/^(),]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            p = pos
            while p < n and text[p].isspace():
                p += 1
            raise ParseError(f"unexpected character {text[p]!r}", text, p)
        start = m.start(m.lastindex)
        num, var, kw, sym = m.groups()
        if num is not None:
            out.append(("num", num, start))
        elif var is not None:
            out.append(("var", var[1:], start))
        elif kw is not None:
            out.append(("kw", kw, start))
        else:
            out.append(("sym", sym, start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, indices: tuple, degree: int):
        self.text = text
        self.toks = _tokenize(text)
        self.k = 0
        self.indices = indices
        self.degree = degree

    def peek(self):
        return self.toks[self.k]

    def take(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect(self, value: str):
        kind, v, pos = self.take()
        if v != value or kind not in ("sym", "kw"):
            raise ParseError(f"unexpected {v or 'end of input'!r}", self.text, pos, repr(value))

    def const(self, c) -> Series:
        return Series.constant(c, self.indices, self.degree)

    def parse(self) -> Series:
        s = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {v!r}", self.text, pos, "operator or end of input")
        return s

    def expr(self) -> Series:
        sign = 1
        kind, v, _ = self.peek()
        if kind == "sym" and v in "+-":
            self.take()
            sign = -1 if v == "-" else 1
        acc = self.term() * sign
        while True:
            kind, v, _ = self.peek()
            if kind == "sym" and v in "+-":
                self.take()
                t = self.term()
                acc = acc + t if v == "+" else acc - t
            else:
                return acc

    def term(self) -> Series:
        acc = self.factor()
        while True:
            kind, v, _ = self.peek()
            if kind == "sym" and v == "*":
                self.take()
                acc = acc * self.factor()
            else:
                return acc

    def factor(self) -> Series:
        base = self.atom()
        kind, v, _ = self.peek()
        if kind == "sym" and v == "^":
            self.take()
            kind, v, pos = self.peek()
            if kind == "sym" and v == "(":
                self.take()
                e = self.signed_int()
                self.expect(")")
            else:
                e = self.signed_int()
            if e < 0 and not base.const:
                raise ParseError("negative power of a series with zero constant term", self.text, pos)
            return base ** e
        return base

    def signed_int(self) -> int:
        sign = 1
        kind, v, pos = self.peek()
        if kind == "sym" and v in "+-":
            self.take()
            sign = -1 if v == "-" else 1
        kind, v, pos = self.take()
        if kind != "num":
            raise ParseError(f"unexpected {v or 'end of input'!r}", self.text, pos, "an integer exponent")
        return sign * int(v)

    def rational(self) -> Fraction:
        kind, v, pos = self.take()
        if kind != "num":
            raise ParseError(f"unexpected {v or 'end of input'!r}", self.text, pos, "a rational")
        num = int(v)
        kind, v2, pos2 = self.peek()
        if kind == "sym" and v2 == "/":
            self.take()
            kind, v3, pos3 = self.take()
            if kind != "num":
                raise ParseError("malformed rational", self.text, pos3, "a denominator")
            if int(v3) == 0:
                raise ParseError("malformed rational: zero denominator", self.text, pos3)
            return Fraction(num, int(v3))
        return Fraction(num)

    def signed_rational(self) -> Fraction:
        kind, v, _ = self.peek()
        if kind == "sym" and v in "+-":
            self.take()
            r = self.rational()
            return -r if v == "-" else r
        return self.rational()

    def atom(self) -> Series:
        kind, v, pos = self.peek()
        if kind == "num":
            return self.const(self.rational())
        if kind == "var":
            self.take()
            j = int(v)
            if j not in self.indices:
                raise ParseError(f"unknown index h{v}", self.text, pos, f"one of {list(self.indices)}")
            return Series.var(j, self.indices, self.degree)
        if kind == "kw" and v == "fb":
            self.take()
            self.expect("(")
            beta = self.signed_rational()
            self.expect(",")
            inner = self.expr()
            self.expect(")")
            if inner.const:
                raise ParseError("fb needs an argument with zero constant term", self.text, pos)
            return f_beta(beta, inner)
        if kind == "kw" and v == "ln1m":
            self.take()
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            if inner.const:
                raise ParseError("ln1m needs an argument with zero constant term", self.text, pos)
            return log1m(inner)
        if kind == "sym" and v == "(":
            self.take()
            s = self.expr()
            self.expect(")")
            return s
        raise ParseError(f"unexpected {v or 'end of input'!r}", self.text, pos, "a number, h<index>, fb, ln1m or '('")


def parse_expr(text: str, I: Iterable[int], D: int) -> Series:
    """Parse an expression in the h<index> variables into a series truncated at D."""
    return _Parser(text, tuple(sorted(set(I))), D).parse()


def _format_monomial(m: MultiIndex) -> str:
    return "*".join(f"h{i}" if e == 1 else f"h{i}^({e})" for i, e in m)


def format_series(s: Series) -> str:
    """Polynomial normal form, readable back by :func:`parse_expr`."""
    items = s.sorted_items()
    if not items:
        return "0"
    parts = []
    for k, (m, c) in enumerate(items):
        neg = c < 0
        a = -c if neg else c
        if m == ONE:
            body = format_rational(a)
        elif a == 1:
            body = _format_monomial(m)
        else:
            body = f"{format_rational(a)}*{_format_monomial(m)}"
        if k == 0:
            parts.append(f"-{body}" if neg else body)
        else:
            parts.append(f"- {body}" if neg else f"+ {body}")
    return " ".join(parts)


# -- evaluation on tree series --------------------------------------------

def substitute(F: Series, X: Mapping[Decoration, TreePoly], weight_bound: int) -> TreePoly:
    """F(X): sum_p a_p prod_j X_j^{p_j}, dropping forests heavier than ``weight_bound``."""
    for j, x in X.items():
        if x.component(0):
            raise ValueError(f"X[{j!r}] has a nonzero weight-0 part")
    powers: dict = {}

    # every remaining factor has weight >= 1, which caps the partial products
    def power(j, e, cap):
        key = (j, e, cap)
        if key not in powers:
            if e == 1:
                powers[key] = X[j].truncate(cap)
            else:
                powers[key] = power(j, e - 1, cap - 1).mul(X[j], cap)
        return powers[key]

    acc: dict = {}
    for m, c in F.coeffs.items():
        left = m.degree
        if left > weight_bound:
            continue
        term = TreePoly.unit() * c
        for j, e in m:
            if j not in X:
                term = TreePoly()
                break
            left -= e
            cap = weight_bound - left
            term = term.mul(power(j, e, cap - _min_weight(term)), cap)
            if not term:
                break
        for f, v in term.items():
            acc[f] = acc.get(f, 0) + v
    return TreePoly(acc)


def _min_weight(p: TreePoly) -> int:
    return min((f.weight for f in p), default=0)
