"""Counterterms, extraction-contraction maps and renormalization.

The preparation-map layer works at the exponent pair (0, 2); the
three-dimensional demo parameters produce integer degree ties there, so
the tests exercising coproducts of larger trees use a two-dimensional
sector with generic rational parameters."""

from fractions import Fraction as F

import pytest

from ristruct.config import (numeric2d_params, numeric2d_sector,
                             pam3d_params, pam3d_sector)
from ristruct.hopf import Hopf
from ristruct.renorm import (CounterTerms, DictPreparationMap, IdentityMap,
                             Renormalizer, SectorEscape, make_Rc,
                             negative_basis, renorm_map, verify_preparation)
from ristruct.sector import generate_from_rule, pam_rule
from ristruct.trees import LinComb, format_tree, noise, parse, unit


@pytest.fixture(scope="module")
def sector2():
    """Five-edge two-dimensional sector with generic degrees."""
    return generate_from_rule(pam_rule(2), 4, F(2), numeric2d_params(),
                              max_edges=5)


@pytest.fixture(scope="module")
def hopf2():
    return Hopf(numeric2d_params())


def test_negative_basis():
    assert [format_tree(t) for t in negative_basis(pam3d_sector())] == [
        "(O() K(O()))",
        "(O() K(O()) K(O()))",
        "(O() K(O() K(O())))",
    ]
    assert [format_tree(t) for t in negative_basis(numeric2d_sector())] \
        == ["(O() K(O()))"]


def test_counterterm_support(sector2):
    tau2 = parse("(O() K(O()))", dim=2)
    CounterTerms({tau2: F(3, 7)}).check_support(sector2)
    with pytest.raises(ValueError):
        CounterTerms({noise(2): F(1)}).check_support(sector2)


def test_rc_on_smallest_negative_tree():
    sector = pam3d_sector()
    hopf = Hopf(pam3d_params())
    tau2 = parse("(O() K(O()))", dim=3)
    R = make_Rc(CounterTerms({tau2: F(3, 7)}), sector, hopf)
    assert R.apply(tau2).terms == {tau2: F(1), unit(3): F(3, 7)}


def test_rc_fixes_polys_noises_and_plantings(sector2, hopf2):
    tau2 = parse("(O() K(O()))", dim=2)
    R = make_Rc(CounterTerms({tau2: F(1)}), sector2, hopf2)
    for t in sector2.polys + [noise(2), parse("(H())", dim=2)]:
        assert R.apply(t).terms == {t: F(1)}


def test_rc_extraction_in_larger_trees(sector2, hopf2):
    """Extracting the root copy of the 3-edge subtree leaves the planted
    remainder; the wide tree contains it through two symmetric cuts."""
    tau2 = parse("(O() K(O()))", dim=2)
    chain = parse("(O() K(O() K(O())))", dim=2)
    wide = parse("(O() K(O()) K(O()))", dim=2)
    remainder = parse("(K(O()))", dim=2)
    c = F(3, 7)
    R = make_Rc(CounterTerms({tau2: c}), sector2, hopf2,
                strict_sector=False)
    assert R.apply(chain).terms == {chain: F(1), remainder: c}
    assert R.apply(wide).terms == {wide: F(1), remainder: 2 * c}


def test_verify_preparation_random_counterterms(sector2, hopf2):
    import random
    rng = random.Random(7)
    for _ in range(5):
        values = {t: F(rng.randint(-20, 20), rng.randint(1, 9))
                  for t in negative_basis(sector2)}
        R = make_Rc(CounterTerms(values), sector2, hopf2,
                    strict_sector=False)
        report = verify_preparation(R, sector2, hopf2)
        assert report.ok, report.failures


def test_verify_preparation_rejects_scaled_noise(sector2, hopf2):
    bad = DictPreparationMap({noise(2): LinComb.single(noise(2), 2)})
    report = verify_preparation(bad, sector2, hopf2)
    assert not report.ok
    assert any(f["axiom"] in ("a", "b") for f in report.failures)


def test_verify_preparation_rejects_degree_losing_term(sector2, hopf2):
    tau2 = parse("(O() K(O()))", dim=2)
    wide = parse("(O() K(O()) K(O()))", dim=2)
    bad = DictPreparationMap({
        wide: LinComb([(wide, F(1)), (tau2, F(1))])})
    report = verify_preparation(bad, sector2, hopf2)
    assert not report.ok
    assert any(f["axiom"] == "b" for f in report.failures)


def test_renormalizer_identity(sector2, hopf2):
    M = Renormalizer(IdentityMap(), hopf2)
    for t in sector2.members():
        assert M.apply(t).terms == {t: F(1)}


def test_renormalizer_smallest_tree(sector2, hopf2):
    tau2 = parse("(O() K(O()))", dim=2)
    c = F(-2, 5)
    R = make_Rc(CounterTerms({tau2: c}), sector2, hopf2)
    assert renorm_map(R, hopf2, tau2).terms == {tau2: F(1), unit(2): c}


def test_renormalizer_passes_through_plantings(sector2, hopf2):
    """The hat map re-applies R inside kernel plantings; the inner
    extraction leaves a kernel planting of the unit, which dies in the
    ideal, so only the outer extraction survives."""
    tau2 = parse("(O() K(O()))", dim=2)
    chain = parse("(O() K(O() K(O())))", dim=2)
    remainder = parse("(K(O()))", dim=2)
    c = F(3, 7)
    R = make_Rc(CounterTerms({tau2: c}), sector2, hopf2,
                strict_sector=False)
    out = renorm_map(R, hopf2, chain)
    assert out.terms == {chain: F(1), remainder: c}


def test_sector_escape():
    s2 = numeric2d_sector()  # three-edge bound: larger trees escape
    h2 = Hopf(s2.params)
    tau2 = parse("(O() K(O()))", dim=2)
    R = make_Rc(CounterTerms({tau2: F(1)}), s2, h2)
    with pytest.raises(SectorEscape):
        R.apply(parse("(O() K(O() K(O())))", dim=2))
