"""Truncated coproducts, the positive-degree projection, the antipode,
characters and recentering operators.

A forest X^k * prod_i I_{k_i}^{l_i}(tau_i) is represented as a Tree
whose root decoration is k and whose children are the planted factors;
tree_product then doubles as the forest product.  Two independent
coproduct implementations are provided: the recursive one (primary) and
the graphical one enumerating root subtrees (oracle).
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product as iproduct

from .grading import (GenericityError, Params, degree_eval, degree_form,
                      label_form)
from .trees import (K, LinComb, Tree, X, has_k_leaf, mi_abs, mi_add,
                    mi_binom, mi_factorial, mi_range, mi_sub, mi_weight,
                    mi_zero, plant, plant_tree, tree_product, unit)


class TensorSum:
    """Finite sum of left (x) right pairs with exact coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for (a, b), c in (terms.items() if isinstance(terms, dict)
                              else terms):
                self.add(a, b, c)

    def add(self, left: Tree, right: Tree, c) -> None:
        key = (left, right)
        c = self.terms.get(key, Fraction(0)) + Fraction(c)
        if c:
            self.terms[key] = c
        else:
            self.terms.pop(key, None)

    def __add__(self, other: "TensorSum") -> "TensorSum":
        out = TensorSum(dict(self.terms))
        for (a, b), c in other.terms.items():
            out.add(a, b, c)
        return out

    def __sub__(self, other: "TensorSum") -> "TensorSum":
        out = TensorSum(dict(self.terms))
        for (a, b), c in other.terms.items():
            out.add(a, b, -c)
        return out

    def scale(self, c) -> "TensorSum":
        c = Fraction(c)
        return TensorSum({k: v * c for k, v in self.terms.items()}
                         if c else {})

    def pair_product(self, other: "TensorSum") -> "TensorSum":
        """Componentwise product: trees on the left, forests on the right."""
        out = TensorSum()
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                out.add(tree_product(a1, a2), tree_product(b1, b2), c1 * c2)
        return out

    def __eq__(self, other):
        return isinstance(other, TensorSum) and self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        from .trees import format_tree
        parts = [f"{c}*{format_tree(a)}(x){format_tree(b)}"
                 for (a, b), c in sorted(
                     self.terms.items(),
                     key=lambda kv: (kv[0][0]._enc, kv[0][1]._enc))]
        return "TensorSum(" + (" + ".join(parts) or "0") + ")"


def forest_factors(f: Tree):
    """Split a forest tree into its polynomial part and planted factors."""
    return f.n, f.children


class Character:
    """Multiplicative functional determined by values on generators.

    Generators are the coordinate polynomials X^{e_j} and planted trees;
    the value on a forest is the product over its factors."""

    def __init__(self, values: dict, d: int):
        self.values = dict(values)
        self.d = d

    def __call__(self, forest: Tree):
        out = 1
        for j, power in enumerate(forest.n):
            if power:
                e_j = tuple(1 if i == j else 0 for i in range(self.d))
                out *= self._value(X(e_j)) ** power
        for lab, e, sub in forest.children:
            out *= self._value(Tree(mi_zero(self.d), ((lab, e, sub),)))
        return out

    def _value(self, gen: Tree):
        try:
            return self.values[gen]
        except KeyError:
            raise KeyError(f"character undefined on generator {gen!r}")

    def on_lincomb(self, v: LinComb):
        return sum((c * self(t) for t, c in v), Fraction(0))


class Hopf:
    """Coproduct machinery for a fixed parameter set, with memoization."""

    def __init__(self, params: Params):
        self.params = params
        self.d = params.d
        self._cop = {}
        self._cop_plus = {}
        self._antipode = {}

    # degree of the planted tree I_k^lab(sub) at (eps, 1/p)
    def planted_degree(self, lab: str, k, sub: Tree, eps, invp) -> Fraction:
        form = degree_form(sub, self.params) + label_form(lab)
        return (degree_eval(form, self.params, eps, invp)
                - mi_weight(k, self.params.scaling))

    def _poly_coproduct(self, n) -> TensorSum:
        out = TensorSum()
        for l in mi_range(n):
            out.add(X(l), X(mi_sub(n, l)), mi_binom(n, l))
        return out

    def _decoration_candidates(self, lab, k, sub, eps, invp, ideal_zero):
        """Extra decorations l with I_{k+l}^lab(sub) of positive degree.

        Yields (l, remaining degree); raises GenericityError when some
        admissible l puts the degree exactly at zero.  ``ideal_zero``
        marks plantings that vanish in the K-leaf quotient, for which no
        terms (and no genericity complaints) are produced."""
        if ideal_zero:
            return
        base = self.planted_degree(lab, k, sub, eps, invp)
        if base < 0:
            return
        bounds = tuple(int(base / s) + 1 for s in self.params.scaling)
        for l in mi_range(bounds):
            w = mi_weight(l, self.params.scaling)
            if w > base:
                continue
            if w == base:
                raise GenericityError(
                    f"planted degree vanishes: label {lab}, k+l={mi_add(k, l)}")
            yield l

    # recursive coproduct ------------------------------------------------

    def coproduct(self, t: Tree, eps, invp) -> TensorSum:
        """Delta_{eps,p} via the recursive formula (primary route)."""
        eps, invp = Fraction(eps), Fraction(invp)
        key = (t, eps, invp)
        cached = self._cop.get(key)
        if cached is not None:
            return cached
        out = self._poly_coproduct(t.n)
        for lab, e, sub in t.children:
            out = out.pair_product(
                self._coproduct_planted(lab, e, sub, eps, invp))
        self._cop[key] = out
        return out

    def _coproduct_planted(self, lab, k, sub, eps, invp) -> TensorSum:
        out = TensorSum()
        for (sigma, forest), c in self.coproduct(sub, eps, invp):
            for pt, pc in plant(lab, k, sigma):
                out.add(pt, forest, c * pc)
        ideal_zero = (lab == K and sub.is_poly())
        for l in self._decoration_candidates(lab, k, sub, eps, invp,
                                             ideal_zero):
            out.add(X(l), plant_tree(lab, mi_add(k, l), sub),
                    Fraction(1, mi_factorial(l)))
        return out

    # graphical coproduct ------------------------------------------------

    def coproduct_graphical(self, t: Tree, eps, invp) -> TensorSum:
        """Delta_{eps,p} by enumerating root subtrees (oracle route)."""
        eps, invp = Fraction(eps), Fraction(invp)
        out = TensorSum()
        for sigma, forest, excess, coeff in self._graph_node(t, eps, invp):
            if has_k_leaf(sigma):
                continue
            out.add(sigma, tree_product(X(excess), forest), coeff)
        return out

    def _graph_node(self, t: Tree, eps, invp):
        """All ways to realize the root node of t inside a root subtree.

        Yields (sigma, boundary forest, polynomial excess, coefficient);
        cut edges contribute planted factors with an extra derivative
        decoration delta added at the parent node, kept edges recurse."""
        child_options = []
        for lab, e, sub in t.children:
            opts = []
            ideal_zero = (lab == K and sub.is_poly())
            for delta in self._decoration_candidates(lab, e, sub, eps, invp,
                                                     ideal_zero):
                factor = plant_tree(lab, mi_add(e, delta), sub)
                opts.append((delta, None, factor, mi_zero(t.dim),
                             Fraction(1, mi_factorial(delta))))
            for sig_sub, forest_sub, excess_sub, c_sub in self._graph_node(
                    sub, eps, invp):
                opts.append((mi_zero(t.dim), (lab, e, sig_sub), forest_sub,
                             excess_sub, c_sub))
            child_options.append(opts)
        results = []
        for combo in iproduct(*child_options):
            delta_sum = mi_zero(t.dim)
            excess = mi_zero(t.dim)
            forest = unit(t.dim)
            coeff = Fraction(1)
            sigma_children = []
            for delta, kept, factor_or_forest, excess_sub, c in combo:
                delta_sum = mi_add(delta_sum, delta)
                excess = mi_add(excess, excess_sub)
                coeff *= c
                forest = tree_product(forest, factor_or_forest)
                if kept is not None:
                    sigma_children.append(kept)
            for n_sigma in mi_range(t.n):
                sigma = Tree(mi_add(n_sigma, delta_sum),
                             tuple(sigma_children))
                results.append((
                    sigma, forest, mi_add(excess, mi_sub(t.n, n_sigma)),
                    coeff * mi_binom(t.n, n_sigma)))
        return results

    # projection and Delta+ ----------------------------------------------

    def forest_survives(self, f: Tree, eps, invp) -> bool:
        for lab, e, sub in f.children:
            deg = self.planted_degree(lab, e, sub, eps, invp)
            if deg == 0:
                raise GenericityError(
                    "planted factor degree vanishes under P+")
            if deg < 0:
                return False
        return True

    def project_plus(self, v: LinComb, eps, invp) -> LinComb:
        out = LinComb()
        for f, c in v:
            if self.forest_survives(f, eps, invp):
                out.add(f, c)
        return out

    def coproduct_plus(self, f: Tree, eps, invp) -> TensorSum:
        """Delta+_{eps,p} on a forest in the P+ range."""
        eps, invp = Fraction(eps), Fraction(invp)
        key = (f, eps, invp)
        cached = self._cop_plus.get(key)
        if cached is not None:
            return cached
        out = self._poly_coproduct(f.n)
        for lab, e, sub in f.children:
            out = out.pair_product(
                self._coproduct_plus_planted(lab, e, sub, eps, invp))
        self._cop_plus[key] = out
        return out

    def _coproduct_plus_planted(self, lab, k, sub, eps, invp) -> TensorSum:
        out = TensorSum()
        for (sigma, forest), c in self.coproduct(sub, eps, invp):
            for pt, pc in plant(lab, k, sigma):
                deg = self.planted_degree(lab, k, sigma, eps, invp)
                if deg == 0:
                    raise GenericityError(
                        "planted factor degree vanishes under P+")
                if deg > 0:
                    out.add(pt, forest, c * pc)
        ideal_zero = (lab == K and sub.is_poly())
        for l in self._decoration_candidates(lab, k, sub, eps, invp,
                                             ideal_zero):
            out.add(X(l), plant_tree(lab, mi_add(k, l), sub),
                    Fraction(1, mi_factorial(l)))
        return out

    # antipode -----------------------------------------------------------

    def antipode(self, f: Tree, eps, invp) -> LinComb:
        """S+_{eps,p} of a forest, as a LinComb of forests."""
        eps, invp = Fraction(eps), Fraction(invp)
        out = LinComb.single(X(tuple(f.n)), (-1) ** mi_abs(f.n))
        for lab, e, sub in f.children:
            out = out.product(self._antipode_planted(lab, e, sub, eps, invp))
        return out

    def _antipode_planted(self, lab, k, sub, eps, invp) -> LinComb:
        key = (lab, tuple(k), sub, eps, invp)
        cached = self._antipode.get(key)
        if cached is not None:
            return cached
        out = LinComb()
        for (sigma, forest), c in self.coproduct(sub, eps, invp):
            if lab == K and sigma.is_poly():
                continue
            base = self.planted_degree(lab, k, sigma, eps, invp)
            if base < 0:
                continue
            s_forest = self.antipode(forest, eps, invp)
            bounds = tuple(int(base / s) + 1 for s in self.params.scaling)
            for l in mi_range(bounds):
                w = mi_weight(l, self.params.scaling)
                if w > base:
                    continue
                if w == base:
                    raise GenericityError(
                        "planted degree vanishes in antipode recursion")
                left = tree_product(X(l),
                                    plant_tree(lab, mi_add(k, l), sigma))
                sign = -Fraction((-1) ** mi_abs(l), mi_factorial(l))
                for g, cg in s_forest:
                    out.add(tree_product(left, g), sign * c * cg)
        self._antipode[key] = out
        return out

    # characters and recentering -----------------------------------------

    @staticmethod
    def counit(f: Tree):
        return 1 if f.is_unit() else 0

    def char_antipode(self, gx: Character, f: Tree, eps, invp):
        """Evaluate gx on S+(f)."""
        return sum(c * gx(g) for g, c in self.antipode(f, eps, invp))

    def char_recenter(self, gy: Character, gx: Character, mu: Tree,
                      eps, invp):
        """g_{yx}(mu) = (g_y (x) (g_x o S+)) Delta+(mu)."""
        total = 0
        for (f1, f2), c in self.coproduct_plus(mu, eps, invp):
            total += c * gy(f1) * self.char_antipode(gx, f2, eps, invp)
        return total

    def recenter_character(self, gy: Character, gx: Character, generators,
                           eps, invp) -> Character:
        """Materialize g_{yx} as a character on the given generators."""
        values = {gen: self.char_recenter(gy, gx, gen, eps, invp)
                  for gen in generators}
        return Character(values, self.d)

    def gamma_recenter(self, gyx: Character, t: Tree, eps, invp) -> LinComb:
        """Gamma_{yx} = (id (x) g_{yx}) Delta_{eps,p}."""
        out = LinComb()
        for (sigma, forest), c in self.coproduct(t, eps, invp):
            out.add(sigma, c * Fraction(gyx(forest)))
        return out

    def comodule_check(self, t: Tree, eps, invp) -> bool:
        """(Delta (x) id)Delta equals (id (x) Delta+)Delta on t."""
        lhs, rhs = {}, {}
        for (a, b), c in self.coproduct(t, eps, invp):
            for (a1, a2), c2 in self.coproduct(a, eps, invp):
                key = (a1, a2, b)
                lhs[key] = lhs.get(key, Fraction(0)) + c * c2
            for (b1, b2), c2 in self.coproduct_plus(b, eps, invp):
                key = (a, b1, b2)
                rhs[key] = rhs.get(key, Fraction(0)) + c * c2
        lhs = {k: v for k, v in lhs.items() if v}
        rhs = {k: v for k, v in rhs.items() if v}
        return lhs == rhs

    def coassociativity_plus_check(self, f: Tree, eps, invp) -> bool:
        """(Delta+ (x) id)Delta+ equals (id (x) Delta+)Delta+ on f."""
        lhs, rhs = {}, {}
        for (a, b), c in self.coproduct_plus(f, eps, invp):
            for (a1, a2), c2 in self.coproduct_plus(a, eps, invp):
                key = (a1, a2, b)
                lhs[key] = lhs.get(key, Fraction(0)) + c * c2
            for (b1, b2), c2 in self.coproduct_plus(b, eps, invp):
                key = (a, b1, b2)
                rhs[key] = rhs.get(key, Fraction(0)) + c * c2
        lhs = {k: v for k, v in lhs.items() if v}
        rhs = {k: v for k, v in rhs.items() if v}
        return lhs == rhs

    def convolution_check(self, f: Tree, eps, invp) -> bool:
        """M(S+ (x) id)Delta+ equals unit o counit on f."""
        out = LinComb()
        for (f1, f2), c in self.coproduct_plus(f, eps, invp):
            for g, cg in self.antipode(f1, eps, invp):
                out.add(tree_product(g, f2), c * cg)
        expected = (LinComb.single(unit(self.d), 1) if self.counit(f)
                    else LinComb())
        return out == expected
