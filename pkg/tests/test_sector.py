"""Sector generation, the preorder, the filtration and the structural
checks."""

from fractions import Fraction as F

import pytest

from ristruct.config import (builtin_rule_config, numeric2d_params,
                             numeric2d_sector, pam3d_params, pam3d_sector)
from ristruct.grading import GenericityError
from ristruct.hopf import Hopf
from ristruct.sector import (EQUAL, FOLLOWS, PRECEDES, TIE, Rule, Sector,
                             check_differentiable, check_triangular, derive,
                             epsilon0, generate_from_rule, key_of,
                             load_rule_config, pam_rule, precede)
from ristruct.trees import (OMEGA, Tree, format_tree, noise, parse,
                            plant_tree, unit)


@pytest.fixture(scope="module")
def sector():
    return pam3d_sector()


@pytest.fixture(scope="module")
def hopf():
    return Hopf(pam3d_params())


def test_generated_basis(sector):
    assert [format_tree(t) for t in sector.basis_o] == [
        "(O())",
        "(O() K(O()))",
        "(O() K(O()) K(O()))",
        "(O() K(O() K(O())))",
    ]
    assert len(sector.polys) == 4  # 1, X_1, X_2, X_3
    assert sector.mB == 5


def test_generated_dot_basis(sector):
    dots = {format_tree(t) for t in sector.dot_basis}
    assert dots == {
        "(H())",
        "(O() K(H()))", "(H() K(O()))",
        "(O() K(O()) K(H()))", "(H() K(O()) K(O()))",
        "(O() K(O() K(H())))", "(O() K(H() K(O())))",
        "(H() K(O() K(O())))",
    }


def test_derive_multiplicities():
    t = parse("(O() K(O()) K(O()))", dim=3)
    out = derive(t)
    assert out.terms == {
        parse("(H() K(O()) K(O()))", dim=3): F(1),
        parse("(O() K(O()) K(H()))", dim=3): F(2),
    }
    with pytest.raises(ValueError):
        derive(parse("(H())", dim=3))


def test_preorder_key_and_precede(sector):
    p = sector.params
    a, b, c, d = sector.basis_o
    assert key_of(a, p) == (1, 1, F(-3, 2))
    assert precede(a, b, p) == PRECEDES
    assert precede(b, a, p) == FOLLOWS
    assert precede(c, c, p) == EQUAL
    assert precede(c, d, p) == TIE  # equal key, distinct trees


def test_filtration_prefixes(sector):
    assert sector.basis_prefix(0) == sector.polys
    assert sector.basis_prefix(2) == sector.polys + sector.basis_o[:2]
    assert sector.dot_prefix(1) == [parse("(H())", dim=3)]
    assert set(sector.dot_prefix(len(sector.basis_o))) \
        == set(sector.dot_basis)


def test_strict_lower_set_monotone(sector):
    p = sector.params
    for t in sector.members():
        lower = sector.strict_lower_set(t)
        kt = key_of(t, p)
        assert all(key_of(s, p) <= kt and s is not t for s in lower)
    small = sector.strict_lower_set(sector.basis_o[1])
    big = sector.strict_lower_set(sector.basis_o[2])
    assert set(small) < set(big)
    with pytest.raises(ValueError):
        sector.strict_lower_set(parse("(n=(5,0,0))", dim=3))


def test_rule_closure_and_validation():
    r = pam_rule(2)
    z = (0, 0)
    assert r.allows(())
    assert r.allows((("K", z),))
    assert r.allows((("O", z), ("K", z)))
    assert r.allows((("O", z), ("K", z), ("K", z)))
    assert not r.allows((("K", z), ("K", z), ("K", z)))
    with pytest.raises(ValueError):
        Rule.from_types(2, [[("O", z), ("O", z)]])
    with pytest.raises(ValueError):
        Rule.from_types(2, [[("O", (1, 0))]])
    with pytest.raises(ValueError):
        Rule.from_types(2, [[("H", z)]])


def test_load_rule_config_matches_builtin():
    rule, max_omega, L, params, max_edges = load_rule_config(
        builtin_rule_config("numeric2d"))
    s = generate_from_rule(rule, max_omega, L, params, max_edges)
    ref = numeric2d_sector()
    assert s.basis_o == ref.basis_o
    assert s.params == ref.params


def test_generation_bounds():
    params = pam3d_params()
    with pytest.raises(ValueError):
        generate_from_rule(pam_rule(3), 1, F(2), params)
    small = generate_from_rule(pam_rule(3), 2, F(2), params, max_edges=5)
    assert [format_tree(t) for t in small.basis_o] == ["(O())"]


def test_every_node_noise_flag():
    params = pam3d_params()
    loose = generate_from_rule(pam_rule(3), 4, F(2), params, max_edges=5,
                               every_node_noise=False)
    strict = generate_from_rule(pam_rule(3), 4, F(2), params, max_edges=5)
    assert set(strict.basis_o) < set(loose.basis_o)
    assert parse("(O() K(K(O())))", dim=3) in set(loose.basis_o)


def test_check_differentiable_passes(sector, hopf):
    report = check_differentiable(sector, hopf, F(1, 100), F(0))
    assert report.ok, report.failures


def test_check_differentiable_flags_missing_noise():
    params = pam3d_params()
    bad = Sector(params, [parse("(O() K(O()))", dim=3)], F(2), 4)
    report = check_differentiable(bad, Hopf(params), F(1, 100), F(0))
    assert not report.ok
    assert any(f["property"] == "a" for f in report.failures)


def test_check_differentiable_flags_decorated_noise():
    params = pam3d_params()
    decorated = Tree((0, 0, 0), ((OMEGA, (1, 0, 0), unit(3)),))
    bad = Sector(params, [noise(3), decorated], F(2), 4)
    report = check_differentiable(bad, Hopf(params), F(1, 100), F(0))
    assert any(f["property"] == "b" for f in report.failures)


def test_check_triangular_passes(sector, hopf):
    report = check_triangular(sector, hopf, F(1, 100), F(0))
    assert report.ok, report.failures


def test_epsilon0_values():
    with pytest.raises(GenericityError):
        epsilon0(pam3d_sector())
    assert epsilon0(numeric2d_sector()) == F(7, 20)


def test_v_w_generators(sector):
    eps = F(1, 100)
    v = sector.v_plus_generators(eps)
    assert all(g.is_poly() or g.children[0][0] == "K" for g in v)
    w = sector.w_plus_generators(eps, F(1, 5))
    k_noise = plant_tree("K", (0, 0, 0), noise(3))
    assert k_noise in v and k_noise in w
    k_dot = plant_tree("K", (0, 0, 0), parse("(H())", dim=3))
    assert k_dot in w and k_dot not in v
    # generator sets grow along the filtration
    assert set(sector.w_plus_generators(eps, F(1, 5), 1)) \
        <= set(sector.w_plus_generators(eps, F(1, 5)))
