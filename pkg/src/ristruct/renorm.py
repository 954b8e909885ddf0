"""Preparation maps, the extraction-contraction family R_c, axiom
verification and the renormalization map M^R."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .grading import degree
from .hopf import Hopf, TensorSum
from .sector import Sector, derive
from .trees import (H, K, OMEGA, LinComb, Tree, X, mi_zero, plant,
                    plant_tree, unit)


def negative_basis(s: Sector):
    """B_-: noise trees of negative r_{0,inf} degree, neither the noise
    itself nor planted."""
    out = []
    for t in s.basis_o:
        if degree(t, s.params, 0, 0) >= 0:
            continue
        if t.is_planted():
            continue
        if len(t.children) == 1 and t.children[0][0] == OMEGA:
            continue
        out.append(t)
    return out


@dataclass
class CounterTerms:
    """Scalar values on B_-; zero elsewhere."""
    values: dict

    def __call__(self, t: Tree):
        return self.values.get(t, 0)

    def check_support(self, s: Sector) -> None:
        allowed = set(negative_basis(s))
        for t, v in self.values.items():
            if v and t not in allowed:
                raise ValueError(f"counterterm outside B_-: {t!r}")


class SectorEscape(ValueError):
    """A renormalization product left the sector span."""


class PreparationMap:
    """Base class: linear maps given extensionally or by a formula."""

    def apply(self, t: Tree) -> LinComb:
        raise NotImplementedError

    def apply_lincomb(self, v: LinComb) -> LinComb:
        return v.map_trees(self.apply)


class DictPreparationMap(PreparationMap):
    """Extensional table on the basis; identity off the table."""

    def __init__(self, action: dict):
        self.action = dict(action)

    def apply(self, t: Tree) -> LinComb:
        return self.action.get(t) or LinComb.single(t, 1)


class IdentityMap(PreparationMap):
    def apply(self, t: Tree) -> LinComb:
        return LinComb.single(t, 1)


class RcMap(PreparationMap):
    """R_c tau = tau + (c (x) id) Delta_{0,2} tau.

    The extraction pairs counterterm values on left coproduct factors
    with the corresponding right forests; the formula extends beyond the
    basis, so subtrees reached during the M^R recursion are covered."""

    def __init__(self, c: CounterTerms, hopf: Hopf, sector: Sector,
                 strict_sector: bool = True):
        c.check_support(sector)
        self.c = c
        self.hopf = hopf
        self.sector = sector
        self.strict_sector = strict_sector
        self._memo = {}

    def apply(self, t: Tree) -> LinComb:
        cached = self._memo.get(t)
        if cached is not None:
            return cached
        out = LinComb.single(t, 1)
        if not (t.is_poly() or t.is_planted()):
            for (left, right), coeff in self.hopf.coproduct(
                    t, 0, Fraction(1, 2)):
                cv = self.c(left)
                if cv:
                    out.add(right, Fraction(cv) * coeff)
        if self.strict_sector:
            # the formula extends beyond the basis, so the input itself
            # may sit outside; only extraction remainders must stay in
            members = set(self.sector.members())
            for term in out.terms:
                if term is not t and term not in members:
                    raise SectorEscape(
                        f"R_c({t!r}) contains {term!r} outside the sector "
                        "span; the rule is not complete at these bounds")
        self._memo[t] = out
        return out


def make_Rc(c: CounterTerms, s: Sector, hopf: Hopf,
            strict_sector: bool = True) -> RcMap:
    return RcMap(c, hopf, s, strict_sector)


@dataclass
class PrepReport:
    ok: bool = True
    failures: list = field(default_factory=list)

    def fail(self, axiom: str, tree: Tree, detail: str):
        self.ok = False
        self.failures.append({"axiom": axiom, "tree": tree,
                              "detail": detail})


def verify_preparation(R: PreparationMap, s: Sector, hopf: Hopf)\
        -> PrepReport:
    """Check the five preparation-map axioms over the sector basis.

    (a) polynomials and the two noises are fixed; (b) every non-leading
    term strictly gains degree at p in {2, inf} and loses Omega edges;
    (c) K-planted trees are fixed; (d) R commutes with Delta_{0,2};
    (e) R commutes with the derivative map."""
    report = PrepReport()
    params = s.params
    half = Fraction(1, 2)

    for t in s.polys:
        if R.apply(t) != LinComb.single(t, 1):
            report.fail("a", t, "polynomial not fixed")
    d = params.d
    ocirc = plant_tree(OMEGA, mi_zero(d), unit(d))
    odot = plant_tree(H, mi_zero(d), unit(d))
    for t in (ocirc, odot):
        if R.apply(t) != LinComb.single(t, 1):
            report.fail("a", t, "noise not fixed")

    for t in s.members():
        rt = R.apply(t)
        lead = rt.terms.get(t, 0)
        if lead != 1:
            report.fail("b", t, f"leading coefficient {lead}")
        for term, _c in rt:
            if term is t:
                continue
            if term.omega_count() >= t.omega_count():
                report.fail("b", t, f"term {term!r} does not drop the "
                            "Omega count")
            for invp in (Fraction(0), half):
                if not (degree(term, params, 0, invp)
                        > degree(t, params, 0, invp)):
                    report.fail("b", t, f"term {term!r} does not gain "
                                f"degree at 1/p={invp}")

    for sub in s.basis_o + s.dot_basis:
        for planted, _c in plant(K, mi_zero(d), sub):
            if R.apply(planted) != LinComb.single(planted, 1):
                report.fail("c", planted, "planted tree not fixed")

    for t in s.members():
        lhs = _tensor_apply_left(R, hopf.coproduct(t, 0, half))
        rhs = TensorSum()
        for term, c in R.apply(t):
            for (a, b), c2 in hopf.coproduct(term, 0, half):
                rhs.add(a, b, c * c2)
        if lhs != rhs:
            report.fail("d", t, "coproduct commutation fails")

    for t in s.basis:
        lhs = derive(t).map_trees(R.apply)
        rhs = R.apply(t).map_trees(derive)
        if lhs != rhs:
            report.fail("e", t, "derivative commutation fails")
    return report


def _tensor_apply_left(R: PreparationMap, ts):
    out = TensorSum()
    for (a, b), c in ts:
        for a2, c2 in R.apply(a):
            out.add(a2, b, c * c2)
    return out


class Renormalizer:
    """M^R = hat(M)^R R with hat(M)^R multiplicative and passing through
    K-planted factors after an inner application of R."""

    def __init__(self, R: PreparationMap, hopf: Hopf):
        self.R = R
        self.hopf = hopf
        self._hat = {}

    def hat(self, t: Tree) -> LinComb:
        cached = self._hat.get(t)
        if cached is not None:
            return cached
        out = LinComb.single(X(t.n), 1)
        for lab, e, sub in t.children:
            if lab == K:
                inner = self.R.apply(sub).map_trees(self.hat)
                factor = LinComb()
                for s2, c in inner:
                    for p, cp in plant(K, e, s2):
                        factor.add(p, c * cp)
            else:
                factor = LinComb.single(Tree((0,) * t.dim, ((lab, e, sub),)),
                                        1)
            out = out.product(factor)
        self._hat[t] = out
        return out

    def apply(self, t: Tree) -> LinComb:
        return self.R.apply(t).map_trees(self.hat)


def renorm_map(R: PreparationMap, hopf: Hopf, t: Tree) -> LinComb:
    return Renormalizer(R, hopf).apply(t)
