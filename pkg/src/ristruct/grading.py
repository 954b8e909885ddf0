"""Exact degree maps, integrability exponents and phase geometry.

Degrees are affine forms in (r0, beta0, scaling, eps, 1/p).  The
integrability exponent p ranges over [2, infinity] and is represented by
1/p throughout, so p = infinity is the exact rational 0 and every
comparison stays exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .trees import OMEGA, H, K, Tree, mi_weight


class GenericityError(ArithmeticError):
    """A degree evaluated to exactly zero on a non-unit tree.

    Concrete rational parameter choices can make a degree vanish where
    the theory assumes genericity; truncations would then branch on a
    tie, so the computation refuses instead of silently choosing."""


@dataclass(frozen=True)
class Params:
    d: int
    scaling: tuple
    r0: Fraction
    beta0: Fraction
    ell: Fraction
    ell1: Fraction
    s0: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "scaling",
                           tuple(Fraction(s) for s in self.scaling))
        for name in ("r0", "beta0", "ell", "ell1", "s0"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if len(self.scaling) != self.d:
            raise ValueError("scaling length must equal d")
        if any(s <= 0 for s in self.scaling):
            raise ValueError("scaling entries must be positive")
        if self.ell <= max(self.scaling):
            raise ValueError("ell must exceed max scaling entry")
        if not (0 < self.beta0 < self.ell - self.ell1):
            raise ValueError("beta0 must lie in (0, ell - ell1)")
        if self.s0 < -self.abs_scaling / 2:
            raise ValueError("s0 must be at least -|s|/2")
        if not self.r0 < -self.abs_scaling / 2 - self.s0:
            raise ValueError("r0 must be below -|s|/2 - s0")

    @property
    def abs_scaling(self) -> Fraction:
        return sum(self.scaling, Fraction(0))

    @property
    def min_scaling(self) -> Fraction:
        return min(self.scaling)


@dataclass(frozen=True)
class DegreeForm:
    """r as cR0*(r0-eps) + cBeta0*beta0 + cInvP*|s|*(1/p) + cConst."""
    cR0: int = 0
    cBeta0: int = 0
    cInvP: int = 0
    cConst: Fraction = Fraction(0)

    def __add__(self, other: "DegreeForm") -> "DegreeForm":
        return DegreeForm(self.cR0 + other.cR0, self.cBeta0 + other.cBeta0,
                          self.cInvP + other.cInvP, self.cConst + other.cConst)

    def __sub__(self, other: "DegreeForm") -> "DegreeForm":
        return DegreeForm(self.cR0 - other.cR0, self.cBeta0 - other.cBeta0,
                          self.cInvP - other.cInvP, self.cConst - other.cConst)

    def shift_const(self, c) -> "DegreeForm":
        return DegreeForm(self.cR0, self.cBeta0, self.cInvP,
                          self.cConst + Fraction(c))


_LABEL_FORM = {
    OMEGA: DegreeForm(cR0=1),
    H: DegreeForm(cR0=1, cInvP=1),
    K: DegreeForm(cBeta0=1),
}


def label_form(label: str) -> DegreeForm:
    return _LABEL_FORM[label]


def degree_form(t: Tree, params: Params) -> DegreeForm:
    form = DegreeForm(cConst=mi_weight(t.n, params.scaling))
    for lab, e, sub in t.children:
        form = form + _LABEL_FORM[lab].shift_const(
            -mi_weight(e, params.scaling)) + degree_form(sub, params)
    return form


def degree_eval(f: DegreeForm, params: Params, eps, invp) -> Fraction:
    eps, invp = Fraction(eps), Fraction(invp)
    if not 0 <= invp <= Fraction(1, 2):
        raise ValueError("1/p must lie in [0, 1/2]")
    return (f.cR0 * (params.r0 - eps) + f.cBeta0 * params.beta0
            + f.cInvP * params.abs_scaling * invp + f.cConst)


def degree(t: Tree, params: Params, eps, invp) -> Fraction:
    return degree_eval(degree_form(t, params), params, eps, invp)


INF = "inf"


def to_invp(p) -> Fraction:
    """Convert an exponent p in [2, inf] to its reciprocal."""
    if p == INF or p is None:
        return Fraction(0)
    p = Fraction(p)
    if p < 2:
        raise ValueError("p must be at least 2")
    return 1 / p


def from_invp(invp: Fraction):
    return INF if invp == 0 else 1 / Fraction(invp)


def integrability(t: Tree, p):
    """Integrability exponent: infinity on H-free trees, p otherwise."""
    h = t.h_count()
    if h > 1:
        raise ValueError("tree has more than one H edge")
    return INF if h == 0 else p


@dataclass(frozen=True)
class RIPair:
    regularity: Fraction
    inv_integrability: Fraction

    def __post_init__(self):
        inv = Fraction(self.inv_integrability)
        if not 0 <= inv <= 1:
            raise ValueError("1/p must lie in [0, 1]")
        object.__setattr__(self, "regularity", Fraction(self.regularity))
        object.__setattr__(self, "inv_integrability", inv)


def ri_less(a: RIPair, b: RIPair) -> bool:
    return (a.regularity < b.regularity
            and a.inv_integrability <= b.inv_integrability)


def p_transition(mu: Tree, params: Params, eps):
    """The p where the degree of mu crosses zero, if it does on [2, inf].

    Requires exactly one H edge, so the degree is r_inf + |s|/p and the
    crossing is p = |s| / (-r_inf)."""
    if mu.h_count() != 1:
        raise ValueError("p_transition requires exactly one H edge")
    form = degree_form(mu, params)
    r_inf = degree_eval(form, params, eps, 0)
    r_two = degree_eval(form, params, eps, Fraction(1, 2))
    if r_inf >= 0 or r_two < 0:
        return None
    return params.abs_scaling / (-r_inf)


def phase_sets(generators, params: Params, eps, invp):
    """Phase-transition exponents I_eps, epsilons J_p, and the floor map.

    I_eps collects the p-crossings of the single-H generators whose
    degree changes sign across [2, inf]; J_p collects, at the given p,
    the nonnegative eps values where a generator degree vanishes.
    Raises GenericityError if some generator degree is exactly zero at
    the queried (eps, invp)."""
    eps, invp = Fraction(eps), Fraction(invp)
    i_eps, j_p = set(), set()
    for mu in generators:
        form = degree_form(mu, params)
        if degree_eval(form, params, eps, invp) == 0 and not mu.is_unit():
            raise GenericityError(
                f"degree of {mu!r} vanishes at eps={eps}, 1/p={invp}")
        if mu.h_count() == 1:
            p = p_transition(mu, params, eps)
            if p is not None:
                i_eps.add(p)
        if form.cR0 > 0:
            eps_star = degree_eval(form, params, 0, invp) / form.cR0
            if eps_star >= 0:
                j_p.add(eps_star)
    i_sorted = sorted(i_eps)

    def floor(p) -> Fraction:
        pv = None if p == INF else Fraction(p)
        candidates = [q for q in [Fraction(2)] + i_sorted
                      if pv is None or q < pv]
        if not candidates:
            raise ValueError(f"no admissible exponent below p={p}")
        return max(candidates)

    return i_sorted, sorted(j_p), floor


def epsilon0_from_forms(forms, params: Params) -> Fraction:
    """Least positive eps where two degree-zero lines meet in the strip.

    Each form defines the line {r_{eps,p} = 0} in the (eps, 1/p) strip
    [0, inf) x [0, 1/2].  Candidate abscissae are pairwise line
    intersections inside the strip and each line's hits on the
    boundaries 1/p = 0 and 1/p = 1/2.  A line may cross eps = 0 inside
    the strip: that is an ordinary p-phase transition, not a violation;
    only candidate abscissae landing exactly at eps = 0 are refused."""
    S = params.abs_scaling
    half = Fraction(1, 2)

    def eps_at(form: DegreeForm, invp: Fraction):
        # Solve cR0*(r0-eps) + cBeta0*beta0 + cInvP*|s|*invp + cConst = 0.
        if form.cR0 == 0:
            return None
        return degree_eval(form, params, 0, invp) / form.cR0

    candidates = []
    lines = [f for f in forms if f.cR0 != 0 or f.cInvP != 0]
    for f in lines:
        for invp in (Fraction(0), half):
            e = eps_at(f, invp)
            if e is not None:
                if e == 0:
                    raise GenericityError(
                        "a degree line passes through eps = 0")
                if e > 0:
                    candidates.append(e)
    for f, g in combinations(lines, 2):
        # f and g as a*eps + b*invp = c with a = cR0, b = -cInvP*|s|.
        a1, b1 = f.cR0, -f.cInvP * S
        c1 = degree_eval(f, params, 0, 0)
        a2, b2 = g.cR0, -g.cInvP * S
        c2 = degree_eval(g, params, 0, 0)
        det = a1 * b2 - a2 * b1
        if det == 0:
            continue
        e = (c1 * b2 - c2 * b1) / det
        q = (a1 * c2 - a2 * c1) / det
        if 0 <= q <= half:
            if e == 0:
                raise GenericityError("two degree lines meet at eps = 0")
            if e > 0:
                candidates.append(e)
    if not candidates:
        raise ValueError("no admissible intersection abscissa found")
    return min(candidates)
