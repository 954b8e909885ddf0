"""Built-in demo configurations and config-file loading.

Two configurations ship with the package: a three-dimensional symbolic
setup used by the algebraic test batteries, and a two-dimensional setup
with a mildly negative product tree used by the numerical pipelines.
Numeric parameter values are configuration choices, not claims."""

from __future__ import annotations

from fractions import Fraction

from .grading import Params
from .sector import Rule, Sector, generate_from_rule, pam_rule

PAM3D = {
    "d": 3,
    "scaling": ["1", "1", "1"],
    "r0": "-3/2",
    "beta0": "2",
    "ell": "4",
    "ell1": "1",
    "s0": "-1/2",
}

NUMERIC2D = {
    "d": 2,
    "scaling": ["1", "1"],
    "r0": "-21/20",
    "beta0": "19/10",
    "ell": "2",
    "ell1": "1/20",
    "s0": "0",
}


def params_from_dict(cfg: dict) -> Params:
    return Params(
        d=int(cfg["d"]),
        scaling=tuple(Fraction(s) for s in cfg["scaling"]),
        r0=Fraction(cfg["r0"]),
        beta0=Fraction(cfg["beta0"]),
        ell=Fraction(cfg["ell"]),
        ell1=Fraction(cfg["ell1"]),
        s0=Fraction(cfg.get("s0", 0)),
    )


def pam3d_params() -> Params:
    return params_from_dict(PAM3D)


def numeric2d_params() -> Params:
    return params_from_dict(NUMERIC2D)


def pam3d_sector() -> Sector:
    params = pam3d_params()
    return generate_from_rule(pam_rule(3), max_omega=4,
                              poly_bound=Fraction(2), params=params,
                              max_edges=5)


def numeric2d_sector() -> Sector:
    params = numeric2d_params()
    return generate_from_rule(pam_rule(2), max_omega=3,
                              poly_bound=Fraction(2), params=params,
                              max_edges=3)


def builtin_rule_config(name: str) -> dict:
    """Rule files equivalent to the built-in sectors, as plain dicts."""
    if name == "pam3d":
        z = [0, 0, 0]
        return {"K": [[["O", z], ["K", z], ["K", z]]], "maxOmega": 4,
                "L": "2", "maxEdges": 5, "params": PAM3D}
    if name == "numeric2d":
        z = [0, 0]
        return {"K": [[["O", z], ["K", z], ["K", z]]], "maxOmega": 3,
                "L": "2", "maxEdges": 3, "params": NUMERIC2D}
    raise KeyError(name)
