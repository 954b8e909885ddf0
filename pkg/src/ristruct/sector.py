"""Rule-driven sector generation, the noise-derivative map, the preorder
and the filtration used by the inductive machinery.

A rule assigns to the K label a family of node types (multisets of
labeled, decorated outgoing edges); trees strongly conform when every
node realizes an allowed type.  The generated basis keeps the trees in
which every internal node carries its own noise leaf, matching the
bases the model construction iterates over."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .grading import Params, degree, degree_eval, label_form
from .hopf import Hopf
from .trees import (H, K, OMEGA, LinComb, Tree, X, mi_range, mi_weight,
                    mi_zero, plant_tree, unit)

PRECEDES = "precedes"
EQUAL = "equal"
FOLLOWS = "follows"
TIE = "incomparable-equal-key"


def _normalize_type(entries, d: int):
    out = []
    for lab, k in entries:
        k = tuple(k)
        if len(k) != d:
            raise ValueError("edge decoration of wrong dimension in rule")
        if lab not in (OMEGA, K):
            raise ValueError(f"rule node types may not contain label {lab}")
        out.append((lab, k))
    return tuple(sorted(out))


@dataclass(frozen=True)
class Rule:
    """Node types allowed below a K edge; the Omega label admits none."""
    d: int
    for_k: frozenset

    @classmethod
    def from_types(cls, d: int, types) -> "Rule":
        base = {_normalize_type(t, d) for t in types}
        closed = set()
        for t in base:
            for r in range(len(t) + 1):
                for sub in combinations(t, r):
                    closed.add(tuple(sorted(sub)))
        rule = cls(d, frozenset(closed))
        rule.validate()
        return rule

    def validate(self) -> None:
        for t in self.for_k:
            omegas = [(lab, k) for lab, k in t if lab == OMEGA]
            if len(omegas) > 1:
                raise ValueError("node type with more than one Omega edge")
            if omegas and any(omegas[0][1]):
                raise ValueError("Omega edge in a rule must carry zero "
                                 "decoration")

    def allows(self, node_type) -> bool:
        return tuple(sorted(node_type)) in self.for_k


def pam_rule(d: int) -> Rule:
    z = mi_zero(d)
    return Rule.from_types(d, [[(OMEGA, z), (K, z), (K, z)]])


def load_rule_config(path_or_dict):
    """Read a rule file: K node types, bounds and parameters."""
    if isinstance(path_or_dict, dict):
        cfg = path_or_dict
    else:
        with open(path_or_dict) as fh:
            cfg = json.load(fh)
    pcfg = cfg["params"]
    params = Params(
        d=int(pcfg["d"]),
        scaling=tuple(Fraction(s) for s in pcfg["scaling"]),
        r0=Fraction(pcfg["r0"]),
        beta0=Fraction(pcfg["beta0"]),
        ell=Fraction(pcfg["ell"]),
        ell1=Fraction(pcfg["ell1"]),
        s0=Fraction(pcfg.get("s0", 0)),
    )
    rule = Rule.from_types(params.d, [
        [(lab, tuple(k)) for lab, k in t] for t in cfg["K"]])
    return (rule, int(cfg["maxOmega"]), Fraction(cfg["L"]), params,
            int(cfg.get("maxEdges", 5)))


def key_of(t: Tree, params: Params):
    """The preorder key (number of Omega edges, edge count, r_{0,inf})."""
    s = t.stats()
    return (s[0], s[1], degree(t, params, 0, 0))


def precede(a: Tree, b: Tree, params: Params) -> str:
    ka, kb = key_of(a, params), key_of(b, params)
    if ka < kb:
        return PRECEDES
    if ka > kb:
        return FOLLOWS
    return EQUAL if a is b else TIE


def derive(t: Tree) -> LinComb:
    """Relabel one Omega edge to H, summed over all Omega edges."""
    if t.h_count() > 0:
        raise ValueError("derivative map is defined on H-free trees only")
    return _derive(t)


def _derive(t: Tree) -> LinComb:
    out = LinComb()
    for i, (lab, e, sub) in enumerate(t.children):
        rest = t.children[:i] + t.children[i + 1:]
        if lab == OMEGA:
            out.add(Tree(t.n, rest + ((H, e, sub),)), 1)
        for s2, c in _derive(sub):
            out.add(Tree(t.n, rest + ((lab, e, s2),)), c)
    return out


class Sector:
    """Ordered basis of noise trees with its derivative and filtration."""

    def __init__(self, params: Params, basis_o, poly_bound, max_omega,
                 rule: Rule | None = None):
        self.params = params
        self.rule = rule
        self.poly_bound = Fraction(poly_bound)
        self.max_omega = max_omega
        self.basis_o = sorted(
            basis_o, key=lambda t: key_of(t, params) + (t._enc,))
        self.polys = self._polys()
        self.basis = self.polys + self.basis_o
        self.dot_basis_by_index = [
            sorted({s for s, _c in derive(tau)},
                   key=lambda t: key_of(t, params) + (t._enc,))
            for tau in self.basis_o]
        seen, dots = set(), []
        for group in self.dot_basis_by_index:
            for t in group:
                if t not in seen:
                    seen.add(t)
                    dots.append(t)
        self.dot_basis = sorted(
            dots, key=lambda t: key_of(t, params) + (t._enc,))

    def _polys(self):
        d, L = self.params.d, self.poly_bound
        out, frontier = [], [mi_zero(d)]
        seen = set(frontier)
        while frontier:
            k = frontier.pop()
            if mi_weight(k, self.params.scaling) < L:
                out.append(X(k))
                for j in range(d):
                    k2 = tuple(k[i] + (i == j) for i in range(d))
                    if k2 not in seen:
                        seen.add(k2)
                        frontier.append(k2)
        return sorted(out, key=lambda t: t._enc)

    @property
    def mB(self) -> int:
        return max(t.edge_count() for t in self.basis_o)

    def members(self):
        return self.basis + self.dot_basis

    def basis_prefix(self, i: int):
        """B_i: the first i noise trees together with the polynomials."""
        return self.polys + self.basis_o[:i]

    def dot_prefix(self, i: int):
        seen, out = set(), []
        for group in self.dot_basis_by_index[:i]:
            for t in group:
                if t not in seen:
                    seen.add(t)
                    out.append(t)
        return sorted(out, key=lambda t: key_of(t, self.params) + (t._enc,))

    def strict_lower_set(self, t: Tree):
        """All basis or derivative trees preceding t (strictly)."""
        if t not in set(self.members()):
            raise ValueError("tree is not a sector member")
        kt = key_of(t, self.params)
        return [s for s in self.members()
                if s is not t and key_of(s, self.params) <= kt]

    # generator sets -----------------------------------------------------

    def _planted_generators(self, trees, eps, invp):
        out = []
        beta0 = self.params.beta0
        for tau in trees:
            if tau.is_poly():
                continue
            bound = degree(tau, self.params, eps, invp) + beta0
            if bound <= 0:
                continue
            caps = tuple(int(bound / s) + 1 for s in self.params.scaling)
            for k in mi_range(caps):
                if mi_weight(k, self.params.scaling) < bound:
                    out.append(plant_tree(K, k, tau))
        return out

    def v_plus_generators(self, eps, i: int | None = None):
        """V+ generators: coordinates and K-planted basis trees."""
        d = self.params.d
        trees = self.basis_o if i is None else self.basis_o[:i]
        gens = [X(tuple(1 if j == a else 0 for j in range(d)))
                for a in range(d)]
        return gens + self._planted_generators(trees, eps, 0)

    def w_plus_generators(self, eps, invp, i: int | None = None):
        """W+ generators: coordinates, derivative noises and plantings."""
        d = self.params.d
        gens = [X(tuple(1 if j == a else 0 for j in range(d)))
                for a in range(d)]
        h_bound = degree_eval(label_form(H), self.params, eps, invp)
        if h_bound > 0:
            caps = tuple(int(h_bound / s) + 1 for s in self.params.scaling)
            for k in mi_range(caps):
                if mi_weight(k, self.params.scaling) < h_bound:
                    gens.append(plant_tree(H, k, unit(d)))
        trees = (self.basis_o + self.dot_basis if i is None
                 else self.basis_o[:i] + self.dot_prefix(i))
        return gens + self._planted_generators(trees, eps, invp)


def epsilon0(s: Sector) -> Fraction:
    """Largest guaranteed-generic band: least intersection abscissa of
    the degree-zero lines of the positive-generator set in the
    (eps, 1/p) strip."""
    from .grading import degree_form, epsilon0_from_forms
    gens = s.w_plus_generators(0, Fraction(1, 2))
    forms = [degree_form(g, s.params) for g in gens if not g.is_poly()]
    return epsilon0_from_forms(forms, s.params)


def _every_node_noise(t: Tree) -> bool:
    """Every internal node carries its own zero-decorated Omega leaf."""
    if t.is_poly():
        return False
    if not any(lab == OMEGA and sub.is_poly() and not any(sub.n)
               for lab, _e, sub in t.children):
        return False
    for lab, _e, sub in t.children:
        if lab != OMEGA and not _every_node_noise(sub):
            return False
    return True


def generate_from_rule(rule: Rule, max_omega: int, poly_bound, params: Params,
                       max_edges: int = 5,
                       every_node_noise: bool = True) -> Sector:
    """Enumerate the strongly conforming noise trees up to the bounds.

    Kept trees have zero decorations at noise tips, between 1 and
    max_omega - 1 Omega edges and at most max_edges edges; when
    every_node_noise is set (the default) each internal node must carry
    its own Omega leaf, which excludes planted trees and keeps the basis
    aligned with the model induction."""
    if max_omega < 2:
        raise ValueError("maxOmega must be at least 2")
    rule.validate()
    d = params.d
    z = mi_zero(d)

    memo = {}

    def subtrees(budget: int):
        """Conforming trees with at least one edge, up to budget edges."""
        if budget <= 0:
            return []
        if budget in memo:
            return memo[budget]
        found = set()
        for ntype in sorted(rule.for_k):
            own_edges = len(ntype)
            if own_edges == 0 or own_edges > budget:
                continue
            k_slots = [k for lab, k in ntype if lab == K]
            omega_slots = [k for lab, k in ntype if lab == OMEGA]
            remaining = budget - own_edges

            def assign(slot: int, left: int, acc: tuple):
                if slot == len(k_slots):
                    children = [(OMEGA, k, unit(d)) for k in omega_slots]
                    children += [(K, k_slots[j], acc[j])
                                 for j in range(len(acc))]
                    found.add(Tree(z, tuple(children)))
                    return
                slots_after = len(k_slots) - slot - 1
                for sub in subtrees(left - slots_after):
                    assign(slot + 1, left - sub.edge_count(), acc + (sub,))
            assign(0, remaining, ())
        out = sorted(found, key=lambda t: t._enc)
        memo[budget] = out
        return out

    basis_o = []
    for t in subtrees(max_edges):
        if not 1 <= t.omega_count() < max_omega:
            continue
        if every_node_noise and not _every_node_noise(t):
            continue
        basis_o.append(t)
    if not basis_o:
        raise ValueError("rule generates no admissible noise trees")
    return Sector(params, basis_o, poly_bound, max_omega, rule)


# differentiability report ------------------------------------------------

@dataclass
class SectorReport:
    ok: bool = True
    failures: list = field(default_factory=list)

    def fail(self, prop: str, tree: Tree, detail: str):
        self.ok = False
        self.failures.append({"property": prop, "tree": tree,
                              "detail": detail})


def _omega_leaves_ok(t: Tree) -> tuple:
    omega_here = 0
    for lab, e, sub in t.children:
        if lab == OMEGA:
            omega_here += 1
            if not sub.is_poly():
                return False, "Omega edge is not a leaf"
            if any(sub.n) or any(e):
                return False, "Omega edge carries a nonzero decoration"
        else:
            ok, msg = _omega_leaves_ok(sub)
            if not ok:
                return ok, msg
    if omega_here > 1:
        return False, "two Omega edges share a parent"
    return True, ""


def check_differentiable(s: Sector, hopf: Hopf, eps, invp) -> SectorReport:
    """Verify the four defining sector properties at (eps, p).

    (a) basis shape, (b) noise edges are decorated-free leaves, one per
    node, (c) the coproduct of basis trees stays in V (x) V+, (d) the
    coproduct of derivative trees stays in W (x) W+."""
    report = SectorReport()
    params = s.params
    d = params.d
    noise_tree = plant_tree(OMEGA, mi_zero(d), unit(d))
    if noise_tree not in set(s.basis_o):
        report.fail("a", noise_tree, "the noise tree is missing from the "
                    "basis")
    for t in s.basis_o:
        if t.omega_count() < 1:
            report.fail("a", t, "noise-free tree in the noise basis")
        ok, msg = _omega_leaves_ok(t)
        if not ok:
            report.fail("b", t, msg)

    b_set = set(s.basis)
    w_set = b_set | set(s.dot_basis)

    def right_ok(forest: Tree, allowed_args: set) -> str:
        for lab, e, sub in forest.children:
            if lab == OMEGA:
                return "Omega-planted factor survived the projection"
            if lab == H:
                if not sub.is_unit():
                    return "H-planted factor with a nontrivial argument"
            elif sub not in allowed_args or sub.is_poly():
                return f"K-planted argument outside the sector: {sub!r}"
        return ""

    for t, left_ok_set, allowed_args, prop in (
            [(t, b_set, b_set, "c") for t in s.basis]
            + [(t, w_set, w_set, "d") for t in s.members()]):
        for (left, right), _c in hopf.coproduct(t, eps, invp):
            if left not in left_ok_set:
                report.fail(prop, t, f"left factor outside the sector: "
                            f"{left!r}")
                break
            msg = right_ok(right, allowed_args)
            if msg:
                report.fail(prop, t, msg)
                break
    return report


def check_triangular(s: Sector, hopf: Hopf, eps, invp) -> SectorReport:
    """Coproduct triangularity: all non-leading terms strictly precede."""
    report = SectorReport()
    params = s.params
    members = set(s.members())
    for tau in s.members():
        kt = key_of(tau, params)
        for (left, right), c in hopf.coproduct(tau, eps, invp):
            if left is tau and right.is_unit():
                if c != 1:
                    report.fail("triangular", tau,
                                "leading coefficient is not 1")
                continue
            if not left.is_poly():
                if left not in members:
                    report.fail("triangular", tau,
                                f"left factor {left!r} not a sector member")
                    continue
                if not (key_of(left, params) <= kt and left is not tau):
                    report.fail("triangular", tau,
                                f"left factor {left!r} does not precede")
            for lab, _e, sub in right.children:
                if lab == K and not (key_of(sub, params) <= kt
                                     and sub is not tau):
                    report.fail("triangular", tau,
                                f"planted argument {sub!r} does not precede")
    return report
