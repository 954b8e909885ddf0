"""Canonical decorated rooted trees and exact-rational linear combinations.

A tree carries a node decoration (a multi-index) at every node and a
label together with an edge decoration on every edge.  Trees are
non-planar: children are kept sorted by a canonical total order, so two
planar presentations of the same tree compare equal and hash equal.
Canonical trees are hash-consed through a module-level interning table.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator

OMEGA = "O"
H = "H"
K = "K"
LABELS = (OMEGA, H, K)
_LABEL_RANK = {OMEGA: 0, H: 1, K: 2}

MultiIndex = tuple


def mi_zero(d: int) -> MultiIndex:
    return (0,) * d

def mi_add(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))

def mi_sub(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x - y for x, y in zip(a, b))

def mi_leq(a: MultiIndex, b: MultiIndex) -> bool:
    return all(x <= y for x, y in zip(a, b))

def mi_abs(a: MultiIndex) -> int:
    return sum(a)

def mi_weight(a: MultiIndex, scaling) -> Fraction:
    """|k|_s = sum_j s_j k_j with exact rationals."""
    return sum((Fraction(s) * k for s, k in zip(scaling, a)), Fraction(0))

def mi_factorial(a: MultiIndex) -> int:
    out = 1
    for x in a:
        for j in range(2, x + 1):
            out *= j
    return out

def mi_binom(a: MultiIndex, b: MultiIndex) -> int:
    """Product of componentwise binomial coefficients binom(a_j, b_j)."""
    from math import comb
    out = 1
    for x, y in zip(a, b):
        if y > x:
            return 0
        out *= comb(x, y)
    return out

def mi_range(bound: MultiIndex) -> Iterator[MultiIndex]:
    """All multi-indices l with l <= bound componentwise."""
    if not bound:
        yield ()
        return
    head, rest = bound[0], bound[1:]
    for tail in mi_range(rest):
        for x in range(head + 1):
            yield (x,) + tail


class Tree:
    """Canonical decorated rooted tree.

    ``n`` is the root decoration; ``children`` is a tuple of
    ``(label, edge_decoration, subtree)`` triples sorted canonically.
    Instances are interned: equality is identity.
    """

    __slots__ = ("n", "children", "_enc", "_hash", "_stats")

    _intern: dict = {}

    def __new__(cls, n: MultiIndex, children: tuple):
        children = tuple(sorted(
            children,
            key=lambda c: (_LABEL_RANK[c[0]], c[1], c[2]._enc)))
        enc = (tuple(n), tuple(
            (_LABEL_RANK[lab], tuple(e), sub._enc)
            for lab, e, sub in children))
        cached = cls._intern.get(enc)
        if cached is not None:
            return cached
        self = object.__new__(cls)
        self.n = tuple(n)
        self.children = children
        self._enc = enc
        self._hash = hash(enc)
        self._stats = None
        cls._intern[enc] = self
        return self

    @property
    def dim(self) -> int:
        return len(self.n)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __lt__(self, other):
        return self._enc < other._enc

    def __le__(self, other):
        return self._enc <= other._enc

    def __repr__(self):
        return f"Tree({format_tree(self)!r})"

    def is_poly(self) -> bool:
        """True for bare polynomial nodes X^k (no edges)."""
        return not self.children

    def is_unit(self) -> bool:
        return not self.children and not any(self.n)

    def is_planted(self) -> bool:
        """True for I_k^l(tau): zero root decoration, single edge."""
        return len(self.children) == 1 and not any(self.n)

    def stats(self):
        if self._stats is None:
            omega = edges = hcount = 0
            for lab, _e, sub in self.children:
                s = sub.stats()
                omega += s[0] + (lab == OMEGA)
                edges += s[1] + 1
                hcount += s[2] + (lab == H)
            self._stats = (omega, edges, hcount)
        return self._stats

    def omega_count(self) -> int:
        return self.stats()[0]

    def edge_count(self) -> int:
        return self.stats()[1]

    def h_count(self) -> int:
        return self.stats()[2]

    def iter_nodes(self):
        yield self
        for _lab, _e, sub in self.children:
            yield from sub.iter_nodes()


def X(k: MultiIndex) -> Tree:
    return Tree(tuple(k), ())

def unit(d: int) -> Tree:
    return X(mi_zero(d))

def has_k_leaf(t: Tree) -> bool:
    for lab, _e, sub in t.children:
        if lab == K and sub.is_poly():
            return True
        if has_k_leaf(sub):
            return True
    return False


def canonicalize(n: Iterable[int], children: Iterable[tuple]) -> Tree:
    """Build the canonical tree from a raw (possibly unsorted) node.

    ``children`` are ``(label, edge_decoration, subtree)`` triples where
    subtrees are already Tree values (build bottom-up).  Raises
    ValueError on dimension mismatches.
    """
    n = tuple(n)
    cs = []
    for lab, e, sub in children:
        e = tuple(e)
        if lab not in _LABEL_RANK:
            raise ValueError(f"unknown edge label {lab!r}")
        if len(e) != len(n) or sub.dim != len(n):
            raise ValueError("dimension mismatch in multi-index")
        cs.append((lab, e, sub))
    return Tree(n, tuple(cs))


def tree_product(a: Tree, b: Tree) -> Tree:
    """Product by root identification; root decorations add."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    return Tree(mi_add(a.n, b.n), a.children + b.children)


def tree_product_many(ts: Iterable[Tree], d: int) -> Tree:
    out = unit(d)
    for t in ts:
        out = tree_product(out, t)
    return out


class LinComb:
    """Finite formal sum of canonical trees with Fraction coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for t, c in (terms.items() if isinstance(terms, dict) else terms):
                self.add(t, c)

    @classmethod
    def single(cls, t: Tree, c=1) -> "LinComb":
        v = cls()
        v.add(t, c)
        return v

    def add(self, t: Tree, c) -> None:
        c = self.terms.get(t, Fraction(0)) + Fraction(c)
        if c:
            self.terms[t] = c
        else:
            self.terms.pop(t, None)

    def __add__(self, other: "LinComb") -> "LinComb":
        out = LinComb(dict(self.terms))
        for t, c in other.terms.items():
            out.add(t, c)
        return out

    def __sub__(self, other: "LinComb") -> "LinComb":
        out = LinComb(dict(self.terms))
        for t, c in other.terms.items():
            out.add(t, -c)
        return out

    def scale(self, c) -> "LinComb":
        c = Fraction(c)
        return LinComb({t: v * c for t, v in self.terms.items()} if c else {})

    def __eq__(self, other):
        return isinstance(other, LinComb) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        if not self.terms:
            return "LinComb(0)"
        parts = [f"{c}*{format_tree(t)}" for t, c in sorted(
            self.terms.items(), key=lambda tc: tc[0]._enc)]
        return "LinComb(" + " + ".join(parts) + ")"

    def map_trees(self, f) -> "LinComb":
        """Apply a Tree -> LinComb map linearly."""
        out = LinComb()
        for t, c in self.terms.items():
            for s, c2 in f(t):
                out.add(s, c * c2)
        return out

    def product(self, other: "LinComb") -> "LinComb":
        out = LinComb()
        for t, c in self.terms.items():
            for s, c2 in other.terms.items():
                out.add(tree_product(t, s), c * c2)
        return out


def plant(label: str, k: MultiIndex, t: Tree) -> LinComb:
    """Graft t below a new root along a label edge with decoration k.

    Returns the zero combination when planting a bare polynomial along a
    K edge: such trees lie in the ideal of K-labeled leaves.
    """
    k = tuple(k)
    if len(k) != t.dim:
        raise ValueError("dimension mismatch")
    if label == K and t.is_poly():
        return LinComb()
    return LinComb.single(Tree(mi_zero(t.dim), ((label, k, t),)))


def plant_tree(label: str, k: MultiIndex, t: Tree) -> Tree:
    """Planting that must not vanish; raises if it falls in the ideal."""
    v = plant(label, k, t)
    if not v:
        raise ValueError("planted tree lies in the K-leaf ideal")
    (tree, _c), = v
    return tree


def quotient_by_K_leaves(v: LinComb) -> LinComb:
    out = LinComb()
    for t, c in v:
        if not has_k_leaf(t):
            out.add(t, c)
    return out


def noise(d: int) -> Tree:
    """The single-noise tree (an Omega leaf below the root)."""
    return plant_tree(OMEGA, mi_zero(d), unit(d))

def dot_noise(d: int, k: MultiIndex = None) -> Tree:
    """The derivative-noise tree: an H leaf below the root, decoration k."""
    if k is None:
        k = mi_zero(d)
    return plant_tree(H, k, unit(d))


# Serialization.  Grammar:
#   tree  := "(" ["n=" mi] child* ")"
#   child := label ["^" mi] tree
#   label := "O" | "H" | "K"
#   mi    := "(" int {"," int} ")"
# "O()" / "H()" denote leaf children (label + empty subtree).

class ParseError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at byte {pos}")
        self.pos = pos


class _Parser:
    def __init__(self, text: str, dim: int | None):
        self.text = text
        self.pos = 0
        self.dim = dim

    def _skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip()
        if self.pos >= len(self.text):
            raise ParseError("unexpected end of input", self.pos)
        return self.text[self.pos]

    def _expect(self, ch: str):
        if self._peek() != ch:
            raise ParseError(f"expected {ch!r}", self.pos)
        self.pos += 1

    def _int(self) -> int:
        self._skip()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] == "-":
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise ParseError("expected integer", start)
        return int(self.text[start:self.pos])

    def _mi(self) -> MultiIndex:
        self._expect("(")
        entries = [self._int()]
        while self._peek() == ",":
            self.pos += 1
            entries.append(self._int())
        self._expect(")")
        mi = tuple(entries)
        if self.dim is None:
            self.dim = len(mi)
        elif len(mi) != self.dim:
            raise ParseError(
                f"multi-index of length {len(mi)}, expected {self.dim}",
                self.pos)
        if any(x < 0 for x in mi):
            raise ParseError("negative multi-index entry", self.pos)
        return mi

    def _looks_like_mi(self) -> bool:
        # Inside "(": a following "(" starts a multi-index only if the
        # grammar position allows it, which callers decide; here we
        # distinguish "n=" already.
        return False

    def tree(self) -> Tree:
        self._expect("(")
        n = None
        if self._peek() == "n":
            self.pos += 1
            self._expect("=")
            n = self._mi()
        children = []
        while self._peek() != ")":
            children.append(self.child())
        self.pos += 1
        if n is None:
            if self.dim is None:
                raise ParseError(
                    "dimension undetermined; pass dim or decorate", self.pos)
            n = mi_zero(self.dim)
        return canonicalize(n, children)

    def child(self):
        ch = self._peek()
        if ch not in _LABEL_RANK:
            raise ParseError("expected edge label O, H or K", self.pos)
        self.pos += 1
        e = None
        if self._peek() == "^":
            self.pos += 1
            e = self._mi()
        sub = self.tree()
        if e is None:
            e = mi_zero(self.dim)
        return (ch, e, sub)


def parse(text: str, dim: int | None = None) -> Tree:
    p = _Parser(text, dim)
    t = p.tree()
    p._skip()
    if p.pos != len(p.text):
        raise ParseError("trailing input", p.pos)
    return t


def _fmt_mi(mi: MultiIndex) -> str:
    return "(" + ",".join(str(x) for x in mi) + ")"


def format_tree(t: Tree) -> str:
    parts = []
    if any(t.n):
        parts.append("n=" + _fmt_mi(t.n))
    for lab, e, sub in t.children:
        s = lab
        if any(e):
            s += "^" + _fmt_mi(e)
        s += format_tree(sub)
        parts.append(s)
    return "(" + " ".join(parts) + ")"
