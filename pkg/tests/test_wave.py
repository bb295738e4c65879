import math

import numpy as np
import pytest
import sympy
from scipy.integrate import quad

from src.realizability.strainreal.casebook.counterexample import counterexample_velocity
from src.realizability.strainreal.errors import DegenerateAverageError, InvalidInputError
from src.realizability.strainreal.fields.expressions import ScalarFieldExpr, parse_expression
from src.realizability.strainreal.fields.grid import Grid2D
from src.realizability.strainreal.fields.operators import curl_div
from src.realizability.strainreal.fields.residuals import estimate_order
from src.realizability.strainreal.fields.velocity import affine_stream, stream_to_velocity, strain_of
from src.realizability.strainreal.wave.coefficients import is_hyperbolic, wave_coefficients, wave_operator
from src.realizability.strainreal.wave.diffeo import build_diffeomorphism
from src.realizability.strainreal.wave.periodize import periodized_average
from src.realizability.strainreal.wave.reconstruct import output_grid, realize_global
from src.realizability.strainreal.wave.solver import (
    WaveSolverConfig,
    amplitude_sweep,
    duhamel_oracle,
    model_bump,
    model_system,
    solve_wave,
    wave_residual,
)
from src.realizability.strainreal.wave.truncation import (
    bump,
    partition,
    periodic_truncate,
    primitive,
    window_1d,
)


# ---------- truncation ----------

def test__bump__has_unit_mass_and_support():
    mass, _ = quad(lambda s: float(bump(s)), -0.25, 0.25)
    assert mass == pytest.approx(1.0, abs=1e-10)
    assert bump(0.3) == 0.0
    assert primitive(-1.0) == 0.0 and primitive(1.0) == 1.0


def test__window_translates_sum_to_one():
    x = np.linspace(-1.0, 1.0, 41)
    total = sum(window_1d(x + p) for p in range(-3, 4))
    assert np.max(np.abs(total - 1.0)) <= 1e-12


def test__partition__is_one_on_its_plateau():
    x = np.linspace(-0.75, 1.75, 11)
    assert np.max(np.abs(partition(x, 1) - 1.0)) <= 1e-12
    assert partition(np.array([3.5]), 1)[0] == 0.0


@pytest.mark.parametrize("text", ["1", "cos(2*pi*x)", "sin(2*pi*y)", "cos(2*pi*x)*sin(2*pi*y)"])
def test__periodic_truncation__translates_rebuild_the_field(text):
    f = parse_expression(text, periodic=True)
    trunc = periodic_truncate(f, 1)
    axis = np.linspace(0.0, 1.0, 11)
    xx, yy = np.meshgrid(axis, axis, indexing="xy")
    assert np.max(np.abs(trunc.reconstruct(xx, yy, 2) - f(xx, yy))) <= 1e-8


@pytest.mark.parametrize("radius, expected", [(0.5, 1), (1.0, 2), (2.0, 3)])
def test__smallest_n_for_disk(radius, expected):
    f = parse_expression("cos(2*pi*x)*sin(2*pi*y)", periodic=True)
    trunc = periodic_truncate(f, 0)
    n = trunc.smallest_n_for_disk(radius)
    assert n == expected

    angles = np.linspace(0.0, 2.0 * np.pi, 24, endpoint=False)
    x, y = radius * np.cos(angles), radius * np.sin(angles)
    assert np.max(np.abs(trunc.truncated(x, y, n) - f(x, y))) <= 1e-10


def test__periodic_truncation__coefficient_lookup():
    trunc = periodic_truncate(parse_expression("cos(2*pi*x)", periodic=True), 0)
    assert trunc.coefficient(1, 0) == pytest.approx(0.5)
    assert trunc.coefficient(3, 2) == 0j


def test__periodic_truncate__rejects_non_periodic_fields():
    with pytest.raises(InvalidInputError):
        periodic_truncate(parse_expression("x"), 0)
    with pytest.raises(InvalidInputError):
        periodic_truncate(parse_expression("x", periodic=True), 0)
    with pytest.raises(ValueError):
        periodic_truncate(parse_expression("1", periodic=True), -1)


# ---------- wave coefficients ----------

def test__wave_coefficients__shear_average(shear_velocity):
    coeffs = wave_coefficients(shear_velocity)
    assert not coeffs.rotated
    assert coeffs.a.root == 1
    assert coeffs.b.root == 0
    assert coeffs.alpha.root == -1
    assert coeffs.beta.root == 1
    assert coeffs.sign_a == 1.0


def test__wave_coefficients__rotates_diagonal_average():
    U = stream_to_velocity(affine_stream((1.0, 0.0, 0.0, -1.0))).with_average((1.0, 0.0, 0.0, -1.0))
    coeffs = wave_coefficients(U)
    assert coeffs.rotated
    assert np.allclose(coeffs.velocity.average_matrix, [[0.0, -2.0], [-2.0, 0.0]])
    assert coeffs.a.root == -2
    assert coeffs.alpha.root == 1
    assert coeffs.beta.root == -1
    assert coeffs.sign_a == -1.0
    assert coeffs.working_radius(1.0) == pytest.approx(1.0 / math.sqrt(2.0))


def test__wave_coefficients__needs_an_average(hyperbolic_stream):
    with pytest.raises(InvalidInputError):
        wave_coefficients(stream_to_velocity(hyperbolic_stream))


@pytest.mark.parametrize("average", [(0.0, 0.0, 0.0, 0.0), (0.0, 1.0, -1.0, 0.0)])
def test__wave_coefficients__degenerate_average(average):
    U = stream_to_velocity(parse_expression("sin(2*pi*x)/10")).with_average(average)
    with pytest.raises(DegenerateAverageError):
        wave_coefficients(U)


def test__wave_operator__matches_direct_curl_div(unit_grid):
    U = stream_to_velocity(parse_expression("(x^2-y^2)/2 + 0.1*sin(x)*cos(y)"))
    u = parse_expression("x*y/3 + sin(y)/5")
    mu = ScalarFieldExpr(sympy.exp(u.root))
    direct = ScalarFieldExpr(sympy.exp(-u.root) * curl_div(mu, strain_of(U)).root)
    xx, yy = unit_grid.mesh()
    assert np.max(np.abs(wave_operator(u, U)(xx, yy) - direct(xx, yy))) <= 1e-10


def test__is_hyperbolic(hyperbolic_stream, unit_grid):
    assert is_hyperbolic(stream_to_velocity(hyperbolic_stream), unit_grid)
    assert not is_hyperbolic(stream_to_velocity(parse_expression("(x^2+y^2)/2")), unit_grid)


# ---------- characteristic diffeomorphism ----------

def test__diffeomorphism__shear_is_identity_in_canonical_variables(shear_velocity):
    diffeo = build_diffeomorphism(wave_coefficients(shear_velocity), 1.0)
    grid = Grid2D.square((0.0, 0.0), 1.0, 9)
    xx, yy = grid.mesh()
    t, z = diffeo.canonical(xx, yy)
    assert np.max(np.abs(t - xx)) <= 1e-10
    assert np.max(np.abs(z - yy)) <= 1e-10
    x, y = diffeo.pull_back(t, z)
    assert np.max(np.abs(x - xx)) <= 1e-10 and np.max(np.abs(y - yy)) <= 1e-10
    assert diffeo.roundtrip_error <= 1e-8
    assert diffeo.jacobian_min == pytest.approx(2.0)


# ---------- wave solver ----------

def test__solve_wave__zero_forcing_stays_zero():
    solution = solve_wave(model_system(0.0, horizon=1.0, resolution=0.1))
    assert not solution.blowup
    assert np.all(solution.w == 0.0)


def test__solve_wave__linear_case_converges_to_duhamel():
    exact = duhamel_oracle(lambda s, zeta: float(model_bump(zeta)), 0.9, 0.0)
    errors = []
    for resolution in (0.1, 0.05, 0.025):
        system = model_system(1.0, horizon=1.0, resolution=resolution, quadratic=False)
        solution = solve_wave(system)
        grid = solution.grid
        k = int(round(0.9 / grid.dt))
        j = int(np.argmin(np.abs(grid.zs)))
        errors.append(abs(solution.w[grid.k_max + k, j] - exact))
    assert errors[1] <= 1e-3
    # least-squares slope over three halvings
    assert 1.8 <= estimate_order(errors[0], errors[2], ratio=4.0) <= 2.2


def test__duhamel_oracle__constant_forcing():
    assert duhamel_oracle(lambda s, zeta: 1.0, 1.0, 0.3) == pytest.approx(0.5, abs=1e-10)
    assert duhamel_oracle(lambda s, zeta: 1.0, -1.0, 0.3) == pytest.approx(0.5, abs=1e-10)
    assert duhamel_oracle(lambda s, zeta: 1.0, 0.0, 0.3) == 0.0


def test__wave_residual__vanishes_for_the_linear_scheme():
    system = model_system(1.0, horizon=1.0, resolution=0.1, quadratic=False)
    solution = solve_wave(system)
    assert np.max(np.abs(wave_residual(solution, system))) <= 1e-9


def test__solve_wave__rejects_mismatched_cfl():
    with pytest.raises(ValueError):
        solve_wave(model_system(1.0, horizon=0.5, resolution=0.1, cfl=0.5), WaveSolverConfig())


def test__amplitude_sweep__detects_blowup_reproducibly():
    first = amplitude_sweep([0.0, 20.0])
    second = amplitude_sweep([0.0, 20.0])
    assert first.blowup == (False, True)
    assert first.threshold == 20.0
    assert first.lifespans[1] < first.lifespans[0]
    assert first == second
    assert first.rows()[0] == {"amplitude": 0.0, "blowup": False, "lifespan": first.lifespans[0]}


# ---------- global realization ----------

def test__realize_global__affine_flow_has_constant_viscosity(shear_velocity):
    real = realize_global(shear_velocity, 1.0, resolution=0.1, spacing=0.1)
    assert np.max(np.abs(real.mu - 1.0)) <= 1e-12
    assert real.report.max_abs <= 1e-10
    assert real.level == 2
    assert real.diagnostics["blowup"] is False


def test__realize_global__residual_decreases_under_refinement():
    U = counterexample_velocity(0.05)
    coarse = realize_global(U, 0.5, resolution=0.1, spacing=0.1)
    fine = realize_global(U, 0.5, resolution=0.05, spacing=0.05)
    assert coarse.diagnostics["rotated"]
    assert np.all(fine.mu[fine.mask] > 0.0)
    assert estimate_order(coarse.report.max_abs, fine.report.max_abs) >= 1.5


def test__realize_global__nested_disks_agree_at_common_points():
    U = counterexample_velocity(0.05)
    small = realize_global(U, 0.5, resolution=0.1, spacing=0.1, level=2)
    large = realize_global(U, 1.0, resolution=0.1, spacing=0.1, level=2)
    offset = (large.grid.nx - small.grid.nx) // 2
    inner = large.u[offset:offset + small.grid.ny, offset:offset + small.grid.nx]
    assert np.max(np.abs(inner - small.u)) <= 1e-8


def test__pull_back__reaches_past_t_when_a_varies():
    coeffs = wave_coefficients(counterexample_velocity(0.05))
    diffeo = build_diffeomorphism(coeffs, 1.3)
    xx, yy = Grid2D.square((0.0, 0.0), 1.3, 9).mesh()
    t, z = diffeo.canonical(xx, yy)
    x, y = diffeo.pull_back(t, z)
    assert np.max(np.abs(x - xx)) <= 1e-8
    assert np.max(np.abs(y - yy)) <= 1e-8


def test__output_grid__lands_on_spacing_multiples():
    grid = output_grid(0.5, 0.1)
    assert grid.nx == 11
    assert grid.xs[0] == pytest.approx(-0.5)


# ---------- periodized averages ----------

def test__periodized_average__keeps_periodic_viscosity(unit_grid):
    mu0 = parse_expression("1 + cos(2*pi*x)/2", periodic=True)
    average = periodized_average(mu0, 2, unit_grid)
    xx, yy = unit_grid.mesh()
    assert np.max(np.abs(average.values - mu0(xx, yy))) <= 1e-12
    assert average.growth() == pytest.approx([1.0, 1.0])


def test__periodized_average__sampled_viscosity():
    grid = Grid2D.square((0.0, 0.0), 2.0, 17)
    xx, yy = grid.mesh()
    average = periodized_average(1.0 + 0.5 * np.cos(2.0 * np.pi * xx), 1, grid)
    sx, _ = average.grid.mesh()
    assert average.values.shape == (9, 9)
    assert np.max(np.abs(average.values - (1.0 + 0.5 * np.cos(2.0 * np.pi * sx)))) <= 1e-12

    with pytest.raises(InvalidInputError):
        periodized_average(np.ones((8, 8)), 1, Grid2D.square((0.0, 0.0), 1.0, 8))
    with pytest.raises(ValueError):
        periodized_average(np.ones(grid.shape), -1, grid)
