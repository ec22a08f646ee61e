"""Decorated rooted trees in canonical form.

Trees are hash-consed: building the same tree twice returns the same object,
so equality is identity and hashing is cheap.  Children are kept sorted under
the canonical order ``(weight, root, children...)``.
"""

from __future__ import annotations

import re
from functools import lru_cache
from operator import attrgetter
from typing import Iterable, Sequence, Union

Decoration = Union[int, str]

_key = attrgetter("key")
_INTERN: dict = {}


class Tree:
    """A rooted tree decorated by an ordered index set.

    Use ``Tree(root, children)``; the children may come in any order.
    """

    __slots__ = ("root", "children", "weight", "key", "__weakref__")

    def __new__(cls, root: Decoration, children: Iterable["Tree"] = ()):
        kids = tuple(sorted(children, key=_key))
        return cls._make(root, kids)

    @classmethod
    def _make(cls, root, kids: tuple) -> "Tree":
        # kids must already be sorted
        tag = (root, kids)
        t = _INTERN.get(tag)
        if t is None:
            t = object.__new__(cls)
            t.root = root
            t.children = kids
            t.weight = 1 + sum(c.weight for c in kids)
            t.key = (t.weight, root, tuple(c.key for c in kids))
            _INTERN[tag] = t
        return t

    def __reduce__(self):
        return (Tree, (self.root, self.children))

    def __lt__(self, other: "Tree") -> bool:
        return self.key < other.key

    def __le__(self, other: "Tree") -> bool:
        return self.key <= other.key

    def __gt__(self, other: "Tree") -> bool:
        return self.key > other.key

    def __ge__(self, other: "Tree") -> bool:
        return self.key >= other.key

    def __repr__(self) -> str:
        return f"Tree({format_tree(self)!r})"

    def __str__(self) -> str:
        return format_tree(self)

    @property
    def forest(self) -> "Forest":
        """The forest of root children, so that ``graft_bplus(t.forest, t.root) is t``."""
        return Forest._sorted(self.children)

    def is_leaf(self) -> bool:
        return not self.children

    def decorations(self) -> list:
        out = [self.root]
        for c in self.children:
            out.extend(c.decorations())
        return out


class Forest(tuple):
    """A commutative monomial of trees, stored as a sorted tuple.

    The empty forest is the unit of the algebra.
    """

    __slots__ = ()

    def __new__(cls, trees: Iterable[Tree] = ()):
        return tuple.__new__(cls, sorted(trees, key=_key))

    @classmethod
    def _sorted(cls, trees: Sequence[Tree]) -> "Forest":
        return tuple.__new__(cls, trees)

    @property
    def weight(self) -> int:
        return sum(t.weight for t in self)

    @property
    def key(self):
        return (self.weight, tuple(t.key for t in self))

    def __mul__(self, other: "Forest") -> "Forest":  # type: ignore[override]
        if not self:
            return other
        if not other:
            return self
        return Forest(tuple.__add__(self, other))

    def __repr__(self) -> str:
        return f"Forest({format_forest(self)!r})"

    def __str__(self) -> str:
        return format_forest(self)


UNIT = Forest()


def canonicalize(root: Decoration, children: Iterable[Tree]) -> Tree:
    return Tree(root, children)


def graft_bplus(f: Iterable[Tree], d: Decoration) -> Tree:
    """B+_d: graft the trees of ``f`` on a new root decorated ``d``."""
    return Tree(d, f)


def leaf(d: Decoration) -> Tree:
    return Tree._make(d, ())


def ladder(*decorations: Decoration) -> Tree:
    """The ladder l(d1, ..., dn) with root d1."""
    if not decorations:
        raise ValueError("a ladder needs at least one vertex")
    t = leaf(decorations[-1])
    for d in reversed(decorations[:-1]):
        t = Tree._make(d, (t,))
    return t


# -- enumeration ----------------------------------------------------------

def enumerate_trees(I: Iterable[Decoration], n: int, root: Decoration | None = None) -> list[Tree]:
    """All trees of weight ``n`` decorated by ``I``, in canonical order."""
    if n < 1:
        raise ValueError("weight must be at least 1")
    idx = tuple(sorted(set(I)))
    if root is not None and root not in idx:
        raise ValueError(f"root {root!r} not in the index set")
    trees = _trees(idx, n)
    if root is None:
        return list(trees)
    return [t for t in trees if t.root == root]


def enumerate_forests(I: Iterable[Decoration], m: int) -> list[Forest]:
    """All forests of weight ``m`` decorated by ``I`` (the empty forest for m = 0)."""
    if m < 0:
        raise ValueError("weight must be nonnegative")
    idx = tuple(sorted(set(I)))
    return [f for f, _ in _forests(idx, m)]


@lru_cache(maxsize=None)
def _trees(idx: tuple, n: int) -> tuple:
    out = [Tree._make(r, tuple(f)) for r in idx for f, _ in _forests(idx, n - 1)]
    out.sort(key=_key)
    return tuple(out)


@lru_cache(maxsize=None)
def _forests(idx: tuple, m: int) -> tuple:
    # each entry is (forest, position of its largest tree in the global list)
    if m == 0:
        return ((UNIT, -1),)
    pool: list[Tree] = []
    start = {}
    for w in range(1, m + 1):
        start[w] = len(pool)
        pool.extend(_trees(idx, w))
    start[m + 1] = len(pool)
    out = []
    for w in range(1, m + 1):
        for f, last in _forests(idx, m - w):
            for k in range(max(last, start[w]), start[w + 1]):
                out.append((Forest._sorted(f + (pool[k],)), k))
    out.sort(key=lambda e: e[0].key)
    return tuple(out)


# -- text notation --------------------------------------------------------

def format_decoration(d: Decoration) -> str:
    return str(d)


def format_tree(t: Tree) -> str:
    if not t.children:
        return format_decoration(t.root)
    return f"{format_decoration(t.root)}[{','.join(format_tree(c) for c in t.children)}]"


def format_forest(f: Iterable[Tree]) -> str:
    f = tuple(f)
    if not f:
        return "()"
    return "*".join(format_tree(t) for t in f)


_NAME = re.compile(r"[A-Za-z0-9_]+")


class TreeSyntaxError(ValueError):
    def __init__(self, msg: str, text: str, pos: int):
        super().__init__(f"{msg} at position {pos} in {text!r}")
        self.pos = pos


def _decoration(tok: str) -> Decoration:
    return int(tok) if tok.isdigit() else tok


def _parse_tree(text: str, pos: int) -> tuple[Tree, int]:
    m = _NAME.match(text, pos)
    if not m:
        raise TreeSyntaxError("expected a decoration", text, pos)
    root = _decoration(m.group())
    pos = m.end()
    kids = []
    if pos < len(text) and text[pos] == "[":
        pos += 1
        while True:
            t, pos = _parse_tree(text, pos)
            kids.append(t)
            if pos < len(text) and text[pos] == ",":
                pos += 1
                continue
            if pos < len(text) and text[pos] == "]":
                pos += 1
                break
            raise TreeSyntaxError("expected ',' or ']'", text, pos)
    return Tree(root, kids), pos


def parse_tree(text: str) -> Tree:
    """Parse the bracket notation, e.g. ``d[c,b[a]]``."""
    text = text.strip()
    t, pos = _parse_tree(text, 0)
    if pos != len(text):
        raise TreeSyntaxError("trailing input", text, pos)
    return t


def parse_forest(text: str) -> Forest:
    text = text.strip()
    if text == "()":
        return UNIT
    trees = []
    pos = 0
    while True:
        t, pos = _parse_tree(text, pos)
        trees.append(t)
        if pos == len(text):
            break
        if text[pos] != "*":
            raise TreeSyntaxError("expected '*'", text, pos)
        pos += 1
    return Forest(trees)
