import math

import numpy as np
import pytest
import sympy

from src.realizability.strainreal.errors import DenominatorSignError, InvalidInputError, StrainVanishesError
from src.realizability.strainreal.fields.expressions import X, Y, parse_expression
from src.realizability.strainreal.fields.residuals import estimate_order
from src.realizability.strainreal.local.characteristics import trace_characteristic
from src.realizability.strainreal.local.coefficients import local_coefficients
from src.realizability.strainreal.local.hyperbolic import solve_hyperbolic_cauchy
from src.realizability.strainreal.local.orientation import OrientationRecord, normalize_orientation
from src.realizability.strainreal.local.realizer import assemble_local_realization, verify_local


# ---------- orientation ----------

def test__normalize_orientation__keeps_a_good_frame(hyperbolic_stream):
    working, record = normalize_orientation(hyperbolic_stream, (0.0, 0.0))
    assert not record.rotated and not record.flipped
    assert working.root == hyperbolic_stream.root


def test__normalize_orientation__rotates_pure_shear():
    working, record = normalize_orientation(parse_expression("x*y"), (0.0, 0.0))
    assert record.rotated and not record.flipped
    assert sympy.expand(working.root - (X**2 - Y**2)) == 0
    assert record.pressure_scale == -0.5


def test__normalize_orientation__flips_negative_denominator():
    working, record = normalize_orientation(parse_expression("(y^2-x^2)/2"), (0.0, 0.0))
    assert record.flipped and not record.rotated
    assert sympy.expand(working.root - (X**2 - Y**2) / 2) == 0
    assert record.pressure_scale == -1.0


def test__normalize_orientation__translates_center():
    u = parse_expression("((x-1)^2-(y-2)^2)/2")
    working, record = normalize_orientation(u, (1.0, 2.0))
    assert sympy.expand(working.root - (X**2 - Y**2) / 2) == 0
    xs, ys = record.map_points(np.array([0.5]), np.array([-0.5]))
    assert (xs[0], ys[0]) == (1.5, 1.5)


def test__orientation_record__points_round_trip():
    record = OrientationRecord((0.3, -0.2), True, False)
    x, y = record.to_original(np.array([0.1, -0.4]), np.array([0.25, 0.0]))
    xp, yp = record.to_working(x, y)
    assert np.allclose(xp, [0.1, -0.4]) and np.allclose(yp, [0.25, 0.0])


def test__normalize_orientation__rejects_vanishing_strain():
    with pytest.raises(StrainVanishesError, match=r"e\(U\)\(X\*\) != 0"):
        normalize_orientation(parse_expression("(x^2+y^2)/2"), (0.0, 0.0))


# ---------- coefficients ----------

def test__local_coefficients__constant_for_hyperbolic_stream(hyperbolic_stream):
    coeffs = local_coefficients(hyperbolic_stream, 1.0)
    assert coeffs.a.root == 0
    assert coeffs.alpha.root == -1
    assert coeffs.beta.root == 1
    assert coeffs.gamma.is_zero
    assert coeffs.c == pytest.approx(2.2)


def test__local_coefficients__denominator_sign_change_advises_radius():
    u = parse_expression("(x^2-y^2)/2 + x^3")
    with pytest.raises(DenominatorSignError) as e:
        local_coefficients(u, 1.0)
    assert 0.0 < e.value.advised_radius < 1.0 / 6.0


def test__extended_coefficient__blends_to_center_value():
    coeffs = local_coefficients(parse_expression("(x^2-y^2)/2 + 0.05*sin(x)*sin(y)"), 0.5)
    a, a_x, a_y = coeffs.extended.values(np.array([2.0, 0.1]), np.array([0.0, 0.1]))
    assert a[0] == pytest.approx(coeffs.extended.a0)
    assert a_x[0] == 0.0 and a_y[0] == 0.0
    assert a[1] == pytest.approx(float(coeffs.a(0.1, 0.1)))


# ---------- characteristics ----------

def test__trace_characteristic__linear_speed_is_exponential():
    path = trace_characteristic(parse_expression("y/2"), (0.0, 1.0), 1.0, 0.01)
    assert path.ys[0] == 1.0
    assert path.ys[-1] == pytest.approx(math.exp(0.5), abs=1e-9)
    assert path.dy_formula[-1] == pytest.approx(math.exp(0.5), abs=1e-9)
    assert path.dx_formula[0] == pytest.approx(-0.5)


def test__trace_characteristic__sensitivity_identities_at_random_anchors(rng):
    speed = parse_expression("sin(x)*y/3 + cos(y)/4")
    anchors = rng.uniform(-0.5, 0.5, size=(100, 2))
    for x, y in anchors:
        path = trace_characteristic(speed, (x, y), x + 0.5, 0.01)
        assert abs(path.dy_formula[0] - 1.0) <= 1e-12
        assert path.sensitivity_mismatch() <= 1e-6


def test__trace_characteristic__stops_outside_bounds():
    path = trace_characteristic(parse_expression("1"), (0.0, 0.0), 2.0, 0.1, y_bounds=(-1.0, 1.0))
    assert path.truncated
    assert path.ys[-1] <= 1.0


def test__trace_characteristic__rejects_bad_step():
    with pytest.raises(ValueError):
        trace_characteristic(parse_expression("1"), (0.0, 0.0), 1.0, 0.0)


# ---------- hyperbolic system ----------

def test__solve_hyperbolic_cauchy__zero_data_stays_zero(hyperbolic_stream):
    coeffs = local_coefficients(hyperbolic_stream, 1.0)
    zero = parse_expression("0")
    solution = solve_hyperbolic_cauchy(coeffs, zero, zero, 0.05, x_end=0.2, y_half=1.0)
    assert np.all(solution.v == 0.0)
    assert np.all(solution.w == 0.0)


def test__solve_hyperbolic_cauchy__constant_coefficients_exact(hyperbolic_stream):
    # alpha = -1, beta = 1, gamma = 0 with v0 = 0, w0 = y: w = y - x, v = x y
    coeffs = local_coefficients(hyperbolic_stream, 1.0)
    solution = solve_hyperbolic_cauchy(coeffs, parse_expression("0"), parse_expression("y"), 0.05,
                                       x_end=0.2, y_half=1.0)
    xx, yy = np.meshgrid(solution.xs, solution.ys, indexing="xy")
    inside = solution.dependence_mask()
    assert np.max(np.abs(solution.w - (yy - xx))[inside]) < 1e-10
    assert np.max(np.abs(solution.v - xx * yy)[inside]) < 1e-10


# ---------- local realization ----------

def test__assemble_local_realization__worked_example(hyperbolic_stream):
    real = assemble_local_realization(hyperbolic_stream, (0.0, 0.0), nx=33)
    assert real.tau <= 1.0 / 4.4 + 1e-12
    assert np.max(np.abs(real.mu - 1.0)) <= 1e-8
    center = real.p[real.grid.ny // 2, real.grid.nx // 2]
    assert np.max(np.abs(real.p - center)) <= 1e-8
    verification = verify_local(real)
    assert verification.max_residual <= 1e-6
    assert verification.orthogonality_residual <= 1e-6


def test__assemble_local_realization__tau_cap_and_odd_nx(hyperbolic_stream):
    real = assemble_local_realization(hyperbolic_stream, (0.0, 0.0), tau_max=0.1, nx=17)
    assert real.tau <= 0.1
    assert real.mu.shape == (17, 17)
    with pytest.raises(InvalidInputError):
        assemble_local_realization(hyperbolic_stream, (0.0, 0.0), nx=16)


def test__assemble_local_realization__second_order_under_refinement():
    u = parse_expression("(x^2-y^2)/2 + 0.05*sin(x)*sin(y)")
    runs = [assemble_local_realization(u, (0.0, 0.0), nx=nx) for nx in (33, 65, 129)]
    assert len({run.tau for run in runs}) == 1
    assert runs[-1].tau / 64 <= 1.0 / 256
    checks = [verify_local(run) for run in runs]
    # least-squares slope over three halvings
    curl_div_order = estimate_order(checks[0].max_residual, checks[2].max_residual, ratio=4.0)
    orthogonality_order = estimate_order(checks[0].orthogonality_residual, checks[2].orthogonality_residual, ratio=4.0)
    assert 1.8 <= curl_div_order <= 2.2
    assert 1.8 <= orthogonality_order <= 2.2


def test__assemble_local_realization__rotated_frame_maps_back():
    real = assemble_local_realization(parse_expression("x*y"), (0.5, 0.0), nx=17)
    assert real.record.rotated
    xx, yy = real.original_points()
    assert xx[real.grid.ny // 2, real.grid.nx // 2] == pytest.approx(0.5)
    assert np.all(real.mu > 0.0)
    assert real.pressure_original().shape == real.p.shape
