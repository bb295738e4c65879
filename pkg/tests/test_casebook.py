import math

import numpy as np
import pytest
import sympy

from src.realizability.strainreal.casebook.counterexample import (
    counterexample,
    printed_wave_residual,
    sign_convention_audit,
    torus_obstruction,
)
from src.realizability.strainreal.casebook.vanishing import (
    INCONCLUSIVE,
    NOT_REALIZABLE,
    REALIZABLE,
    FitConfig,
    fit_leading_term,
    ray_limits,
    vanishing_family,
    vanishing_viscosity,
)
from src.realizability.strainreal.errors import InvalidInputError
from src.realizability.strainreal.fields.expressions import X, parse_expression
from src.realizability.strainreal.fields.grid import Grid2D

AUDIT_GRID = Grid2D.square((0.0, 0.0), 0.5, 17)


# ---------- periodic counterexample ----------

def test__counterexample__strain_entries():
    instance = counterexample(0.1)
    xx, yy = AUDIT_GRID.mesh()
    assert np.all(instance.strain.e11(xx, yy) == 1.0)
    assert np.max(np.abs(instance.strain.e12(xx, yy) - 0.1 * np.sin(2.0 * np.pi * yy))) <= 1e-14


def test__torus_obstruction__constant_viscosity():
    assert torus_obstruction(lambda x, y: np.ones_like(x), 0.1, 0.25) == pytest.approx(0.2, abs=1e-12)
    assert torus_obstruction(parse_expression("1"), 0.1, 0.25) == pytest.approx(0.2, abs=1e-12)


def test__torus_obstruction__periodic_viscosity_stays_positive():
    value = torus_obstruction(parse_expression("2+cos(2*pi*x)"), 0.1, 0.25)
    assert value == pytest.approx(0.4, abs=1e-12)


def test__torus_obstruction__narrow_strip():
    # eps sin(2 pi r) int_0^1 [mu(x, r) + mu(x, -r)] dx = 0.05 sin(pi/4) 4
    value = torus_obstruction(parse_expression("2+cos(2*pi*x)"), 0.05, 0.125)
    assert value == pytest.approx(0.2 * math.sin(math.pi / 4.0), abs=1e-12)
    assert value == pytest.approx(0.1414, abs=1e-4)


@pytest.mark.parametrize("r", [0.0, 0.5, -0.1])
def test__torus_obstruction__rejects_strip_width(r):
    with pytest.raises(InvalidInputError):
        torus_obstruction(parse_expression("1"), 0.1, r)


def test__counterexample__needs_positive_epsilon():
    with pytest.raises(InvalidInputError):
        counterexample(0.0)


def test__printed_wave_residual__linear_exponent():
    printed, general = printed_wave_residual(parse_expression("2*pi*x"), 0.1, AUDIT_GRID)
    assert printed.max_abs == pytest.approx(0.0, abs=1e-12)
    # the general operator leaves 8 pi^2 eps sin(2 pi y)
    assert general.max_abs == pytest.approx(8.0 * np.pi**2 * 0.1, rel=1e-2)


def test__sign_convention_audit__verdicts():
    audit = sign_convention_audit(0.1, AUDIT_GRID)
    verdict = audit["verdict"]
    assert verdict["printed_admits_u_2pi_x"]
    assert not verdict["general_admits_u_2pi_x"]
    assert not verdict["exp_2pi_x_realizes"]
    assert verdict["printed_is_general_with_lower_order_terms_negated"]
    assert verdict["general_matches_direct_curl_div"]
    assert audit["residuals"]["u=0"]["printed"] > 0.0


# ---------- strains vanishing at a point ----------

def test__vanishing_viscosity__matching_leading_terms():
    verdict = vanishing_viscosity(parse_expression("x^2"), parse_expression("y^2"))
    assert verdict.verdict == REALIZABLE
    assert verdict.realizable is True
    assert verdict.limit == pytest.approx(1.0)
    assert verdict.residual <= 1e-10
    assert verdict.divergence_defect <= 1e-10
    assert np.allclose(ray_limits(verdict), 1.0)


def test__vanishing_viscosity__closes_at_origin():
    verdict = vanishing_viscosity(parse_expression("x^2 + x^4"), parse_expression("y^2"))
    assert verdict.verdict == REALIZABLE
    assert verdict.limit == pytest.approx(1.0, rel=1e-3)
    assert np.max(np.abs(ray_limits(verdict, radius=1e-4) - 1.0)) <= 1e-3


def test__vanishing_viscosity__different_exponents():
    verdict = vanishing_viscosity(parse_expression("x^2"), parse_expression("y^4"))
    assert verdict.verdict == NOT_REALIZABLE
    assert verdict.realizable is False
    assert verdict.mu is None
    assert verdict.discontinuous_realizable is False


def test__vanishing_viscosity__different_coefficients():
    verdict = vanishing_viscosity(parse_expression("2*x^2"), parse_expression("y^2"))
    assert verdict.verdict == NOT_REALIZABLE
    assert verdict.discontinuous_realizable is True
    assert verdict.to_dict()["numerical"] is True
    with pytest.raises(InvalidInputError):
        verdict.viscosity(0.1, 0.1)


def test__vanishing_viscosity__no_power_law_at_sampled_radii_is_inconclusive():
    verdict = vanishing_viscosity(parse_expression("x^2 + 100*x^4"), parse_expression("y^2"))
    assert verdict.verdict == INCONCLUSIVE
    assert verdict.realizable is None
    assert verdict.to_dict()["mu_at_origin"] is None


def test__vanishing_viscosity__flat_function_is_inconclusive():
    verdict = vanishing_viscosity(parse_expression("exp(-1/x^2)"), parse_expression("y^2"))
    assert verdict.verdict == INCONCLUSIVE
    assert verdict.realizable is None
    assert verdict.f_term.status.startswith("flat")
    assert verdict.diagnostics["velocity"] in ("symbolic", "quadrature")


def test__vanishing_family__quadrature_check_can_be_deferred():
    family = vanishing_family(parse_expression("exp(-1/x^2)"), parse_expression("y^2"), settle=False)
    assert family.strain.e12(np.array([0.5]), np.array([0.0]))[0] == pytest.approx(math.exp(-4.0))


def test__fit_leading_term__flat_function():
    term = fit_leading_term(sympy.exp(-1 / X**2), FitConfig())
    assert not term.ok
    assert term.status.startswith("flat")


@pytest.mark.parametrize("f", ["x", "x^2 + 1", "x^2*y^2"])
def test__vanishing_family__rejects_inadmissible_f(f):
    with pytest.raises(InvalidInputError):
        vanishing_family(parse_expression(f), parse_expression("y^2"))


def test__vanishing_family__symbolic_velocity():
    family = vanishing_family(parse_expression("x^2"), parse_expression("y^2"))
    assert family.method == "symbolic"
    ux, uy = family.velocity_at(np.array([0.5]), np.array([0.3]))
    assert ux[0] == pytest.approx(2.0 * 0.3**3 / 3.0)
    assert uy[0] == pytest.approx(2.0 * 0.5**3 / 3.0)


def test__fit_leading_term__power_law():
    term = fit_leading_term(3 * X**4, FitConfig())
    assert term.ok
    assert term.exponent == pytest.approx(4.0, abs=1e-6)
    assert term.coefficient == pytest.approx(3.0)
