import numpy as np
import pytest
import sympy

from src.realizability.strainreal.errors import (
    ExpressionSyntaxError,
    InvalidInputError,
    NonPositiveViscosityError,
    UnknownIdentifierError,
)
from src.realizability.strainreal.fields.expressions import X, Y, as_field, parse_expression, to_text
from src.realizability.strainreal.fields.grid import Grid2D, fd_dx, grid_to_csv, matrix_grid_to_csv, sample
from src.realizability.strainreal.fields.operators import curl, curl_div, fd_curl_div, stress_divergence
from src.realizability.strainreal.fields.residuals import estimate_order, realization_residual, residual_report
from src.realizability.strainreal.fields.velocity import (
    affine_stream,
    check_periodic_part,
    divergence_defect,
    stream_to_velocity,
    strain_of,
)


# ---------- expression language ----------

def test__parse_expression__precedence_and_powers():
    assert parse_expression("1+2*x^2").root == 1 + 2 * X**2
    assert parse_expression("2^3").root == 8
    assert parse_expression("x^(1/2)").root == sympy.sqrt(X)
    assert parse_expression("-x^2").root == -X**2
    assert parse_expression("x/y/2").root == X / (2 * Y)


def test__parse_expression__decimals_are_exact():
    assert parse_expression("0.5*x").root == X / 2
    assert parse_expression("1e-2").root == sympy.Rational(1, 100)


@pytest.mark.parametrize("text", [
    "(x^2-y^2)/2",
    "-(x+y)^2/3 + exp(-x)*cos(2*pi*y)",
    "sin(x)*sin(y)/(1+x^2)",
    "x^(3/2) - log(2+y)",
    "0.05*sin(x)*sin(y) - 7",
])
def test__to_text__prints_back_into_the_grammar(text):
    parsed = parse_expression(text)
    assert parse_expression(to_text(parsed.root)).root == parsed.root


@pytest.mark.parametrize("text, position", [
    ("", 0),
    ("sin(x", 5),
    ("x +* y", 3),
    ("x^-1", 2),
    ("1/0", 2),
    ("2 $ x", 2),
])
def test__parse_expression__syntax_errors_carry_position(text, position):
    with pytest.raises(ExpressionSyntaxError) as e:
        parse_expression(text)
    assert e.value.position == position


def test__parse_expression__unknown_identifier():
    with pytest.raises(UnknownIdentifierError):
        parse_expression("tan(x)")


def test__differentiate__exact_and_bounded_order():
    f = parse_expression("x^3*y^2")
    assert f.diff("x").root == 3 * X**2 * Y**2
    assert f.diff("y", 2).root == 2 * X**3
    with pytest.raises(ValueError):
        f.diff("x", 7)
    with pytest.raises(ValueError):
        f.diff("z")


def test__periodic_flag_is_declared_and_kept():
    f = parse_expression("sin(2*pi*x)", periodic=True)
    assert f.diff("x").periodic
    assert not parse_expression("sin(2*pi*x)").periodic
    assert not (f + parse_expression("x")).periodic


def test__evaluate__broadcasts_constants(unit_grid):
    xx, yy = unit_grid.mesh()
    values = parse_expression("3")(xx, yy)
    assert values.shape == unit_grid.shape
    assert np.all(values == 3.0)


# ---------- grids ----------

def test__grid__rejects_degenerate_bounds():
    with pytest.raises(InvalidInputError):
        Grid2D(0.0, 0.0, 1.0, 1.0, 2, 3)
    with pytest.raises(InvalidInputError):
        Grid2D(1.0, 0.0, 0.0, 1.0, 5, 5)


def test__grid__shape_and_spacing():
    grid = Grid2D(0.0, -1.0, 2.0, 1.0, 5, 9)
    assert grid.shape == (9, 5)
    assert grid.hx == pytest.approx(0.5)
    assert grid.hy == pytest.approx(0.25)
    assert grid.refined().nx == 9


def test__grid_to_csv__rows_y_outer_x_inner():
    grid = Grid2D(0.0, 0.0, 1.0, 1.0, 3, 3)
    xx, yy = grid.mesh()
    lines = grid_to_csv(grid, xx + 10.0 * yy).splitlines()
    assert lines[0] == "x,y,value"
    assert len(lines) == 10
    assert lines[1] == "0,0,0"
    assert lines[2] == "0.5,0,0.5"
    assert lines[4] == "0,0.5,5"


def test__matrix_grid_to_csv__shape_checked():
    grid = Grid2D(0.0, 0.0, 1.0, 1.0, 3, 3)
    ones = np.ones(grid.shape)
    assert matrix_grid_to_csv(grid, ones, ones, ones, ones).splitlines()[0] == "x,y,v11,v12,v21,v22"
    with pytest.raises(InvalidInputError):
        matrix_grid_to_csv(grid, ones, ones, ones, np.ones((2, 2)))


def test__fd_dx__exact_on_quadratics(unit_grid):
    xx, _ = unit_grid.mesh()
    assert np.max(np.abs(fd_dx(xx**2, unit_grid) - 2.0 * xx)) < 1e-12


# ---------- velocities and strains ----------

def test__stream_to_velocity__hyperbolic_example(hyperbolic_stream):
    U = stream_to_velocity(hyperbolic_stream)
    assert U.ux.root == Y
    assert U.uy.root == X
    strain = strain_of(U)
    assert strain.e11.root == 0
    assert strain.e12.root == 1
    assert strain.e22.root == 0


def test__affine_stream__velocity_is_MX():
    U = stream_to_velocity(affine_stream((1.0, 2.0, 3.0, -1.0)))
    assert sympy.expand(U.ux.root - (X + 2 * Y)) == 0
    assert sympy.expand(U.uy.root - (3 * X - Y)) == 0


def test__affine_stream__needs_trace_free_matrix():
    with pytest.raises(InvalidInputError):
        affine_stream((1.0, 0.0, 0.0, 1.0))


def test__divergence_defect__zero_for_stream_velocities(unit_grid):
    U = stream_to_velocity(parse_expression("sin(x)*exp(y) + x^3*y"))
    assert divergence_defect(U, unit_grid) < 1e-12


def test__check_periodic_part__accepts_periodic_and_rejects_growth():
    grid = Grid2D.square((0.0, 0.0), 1.0, 9)
    stream = parse_expression("-x*y + sin(2*pi*y)/(2*pi^2)")
    U = stream_to_velocity(stream).with_average((1.0, 0.0, 0.0, -1.0))
    assert check_periodic_part(U, grid) < 1e-10

    growing = stream_to_velocity(parse_expression("x^3")).with_average((0.0, 0.0, 0.0, 0.0))
    with pytest.raises(InvalidInputError):
        check_periodic_part(growing, grid)


# ---------- operators and residuals ----------

def test__curl_div__vanishes_for_constant_viscosity_on_affine_flow(shear_velocity):
    assert curl_div(as_field(1), strain_of(shear_velocity)).is_zero


def test__curl__of_rotation():
    U = stream_to_velocity(parse_expression("(x^2+y^2)/2"))
    assert curl(U).root == 2


def test__stress_divergence__constant_viscosity_is_half_laplacian():
    U = stream_to_velocity(parse_expression("sin(x)*cos(y)"))
    div_x, div_y = stress_divergence(as_field(1), strain_of(U))
    lap_x = U.ux.diff("x", 2) + U.ux.diff("y", 2)
    assert sympy.simplify(div_x.root - lap_x.root / 2) == 0


def test__fd_curl_div__second_order_against_symbolic():
    mu = parse_expression("exp(x/2)*(2+sin(y))")
    U = stream_to_velocity(parse_expression("sin(x)*sin(y) + x*y"))
    strain = strain_of(U)
    exact = curl_div(mu, strain)
    errors = []
    for n in (17, 33, 65):
        grid = Grid2D.square((0.0, 0.0), 1.0, n)
        fd = fd_curl_div(sample(mu, grid), sample(strain.e11, grid), sample(strain.e12, grid), grid)
        errors.append(residual_report(fd - sample(exact, grid), grid, margin=2).max_abs)
    assert errors[0] / errors[1] >= 3.0
    assert errors[1] / errors[2] >= 3.0


def test__realization_residual__exact_and_cross_check(shear_velocity, unit_grid):
    report = realization_residual(as_field(1), shear_velocity, unit_grid)
    assert report.max_abs == 0.0
    assert report.cross_check is not None
    assert report.cross_check.max_abs < 1e-10
    assert "cross_check" in report.to_dict()


def test__realization_residual__rejects_non_positive_viscosity(shear_velocity, unit_grid):
    with pytest.raises(NonPositiveViscosityError) as e:
        realization_residual(parse_expression("x"), shear_velocity, unit_grid)
    assert e.value.location[0] <= 0.0


def test__residual_report__mask_and_margin(unit_grid):
    values = np.zeros(unit_grid.shape)
    values[0, 0] = 5.0
    values[10, 10] = 1.0
    assert residual_report(values, unit_grid).max_abs == 5.0
    assert residual_report(values, unit_grid, margin=1).max_abs == 1.0
    assert residual_report(values, unit_grid, mask=np.zeros(unit_grid.shape, dtype=bool)).max_abs == 0.0


def test__estimate_order():
    assert estimate_order(4e-4, 1e-4) == pytest.approx(2.0)
    assert estimate_order(0.0, 1e-4) is None
