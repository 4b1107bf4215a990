import math

import numpy as np
import pytest

from ldesc import expr
from ldesc.fields import (SaddleParams, from_expressions, linear_saddle,
                          separable_incompressible)
from ldesc.integrate import (IntegratorConfig, advance, compute_m,
                             integrate_arclength)
from ldesc.reference import AnalyticSaddleFlow, adaptive_simpson, oracle_m

RK4 = IntegratorConfig()
RK45 = IntegratorConfig(method="rk45-adaptive")
ZERO = from_expressions(expr.parse("0"), expr.parse("0"))


# ---------------------------------------------------------------------------
# configuration validation
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    dict(method="euler"),
    dict(step=0.0),
    dict(step=-1.0),
    dict(rtol=0.0),
    dict(rtol=2.0),
    dict(atol=-1e-3),
    dict(escape_radius=0.0),
])
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        IntegratorConfig(**kwargs)


def test_step_resolution_divides_duration_exactly():
    n, h = IntegratorConfig(step=0.01).resolve_steps(10.0)
    assert n == 1000
    assert n * h == pytest.approx(10.0, rel=1e-15)
    n, h = IntegratorConfig().resolve_steps(20.0)
    assert n == 4000
    assert h == 20.0 / 4000


def test_direction_and_argument_validation():
    with pytest.raises(ValueError):
        advance(ZERO, (0, 0), 0.0, 1.0, "sideways")
    with pytest.raises(ValueError):
        advance(ZERO, (0, 0), 0.0, -1.0)
    with pytest.raises(ValueError):
        compute_m(ZERO, (0, 0), math.nan, 1.0)


# ---------------------------------------------------------------------------
# basic arclength behavior
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("cfg", [RK4, RK45])
def test_zero_field_has_zero_arclength(cfg):
    s, valid = integrate_arclength(ZERO, (0.4, -1.2), 0.0, 5.0, "forward", cfg)
    assert s == 0.0 and valid


@pytest.mark.parametrize("cfg", [RK4, RK45])
def test_fixed_point_has_zero_m(cfg):
    saddle = linear_saddle(SaddleParams(1.0, 1.0))
    m, valid = compute_m(saddle, (0.0, 0.0), 0.0, 20.0, cfg)
    assert m == 0.0 and valid


@pytest.mark.parametrize("cfg", [RK4, RK45])
def test_tau_zero_gives_exactly_zero(cfg):
    saddle = linear_saddle(SaddleParams(1.0, 2.0))
    m, valid = compute_m(saddle, (0.5, 0.5), 0.0, 0.0, cfg)
    assert m == 0.0 and valid


@pytest.mark.parametrize("cfg", [RK4, RK45])
def test_forward_arclength_matches_quadrature(cfg):
    # flow is known in closed form, so the forward arc is a 1-D integral
    saddle = linear_saddle(SaddleParams(1.0, 2.0))
    x0, y0 = 0.1, 0.7

    def speed(t):
        return math.hypot(1.0 * x0 * math.exp(t), 2.0 * y0 * math.exp(-2.0 * t))

    expected = adaptive_simpson(speed, 0.0, 10.0, 1e-10)
    s, valid = integrate_arclength(saddle, (x0, y0), 0.0, 10.0, "forward", cfg)
    assert valid
    assert abs(s - expected) / expected <= 1e-6


@pytest.mark.parametrize("cfg", [RK4, RK45])
def test_m_matches_oracle_fig1_point(cfg):
    saddle = linear_saddle(SaddleParams(1.0, 1.0))
    m, valid = compute_m(saddle, (0.5, 0.5), 0.0, 20.0, cfg)
    expected = oracle_m(AnalyticSaddleFlow(1.0, 1.0), (0.5, 0.5), 20.0, 1e-12)
    assert valid
    assert abs(m - expected) / expected <= 1e-6


def test_m_symmetric_across_contracting_axis():
    saddle = linear_saddle(SaddleParams(1.0, 1.0))
    up, _ = compute_m(saddle, (0.0, 0.6), 0.0, 20.0, RK4)
    down, _ = compute_m(saddle, (0.0, -0.6), 0.0, 20.0, RK4)
    assert up == down  # trajectories are exact mirror images
    # on the contracting axis the integrand is a single exponential
    contraction = 0.6 * (math.exp(20.0) - math.exp(-20.0))
    assert up == pytest.approx(contraction, rel=1e-6)


def test_m_additive_over_forward_legs():
    saddle = linear_saddle(SaddleParams(1.0, 2.0))
    cfg = IntegratorConfig(step=0.01)
    whole = advance(saddle, (0.3, 0.2), 0.0, 10.0, "forward", cfg)
    first = advance(saddle, (0.3, 0.2), 0.0, 3.0, "forward", cfg)
    second = advance(saddle, (first.x, first.y), 3.0, 7.0, "forward", cfg)
    total = first.arclength + second.arclength
    assert whole.valid and first.valid and second.valid
    assert abs(total - whole.arclength) / whole.arclength <= 1e-8


@pytest.mark.parametrize("cfg", [RK4, RK45])
@pytest.mark.parametrize("field", [
    linear_saddle(SaddleParams(1.0, 2.0)),
    separable_incompressible(expr.parse("tanh(x)")),
])
def test_m_independent_of_t0_for_autonomous_fields(field, cfg):
    values = [compute_m(field, (0.4, -0.3), t0, 5.0, cfg) for t0 in (-3.0, 0.0, 7.0)]
    assert all(valid for _, valid in values)
    base = values[0][0]
    for m, _ in values[1:]:
        assert abs(m - base) / base <= 1e-8


def test_backward_equals_forward_of_reversed_saddle():
    # reversing time in saddle(l, m) gives saddle(m, l) with axes swapped
    a, _ = compute_m(linear_saddle(SaddleParams(1.0, 2.0)), (0.3, -0.4), 0.0, 10.0, RK4)
    b, _ = compute_m(linear_saddle(SaddleParams(2.0, 1.0)), (-0.4, 0.3), 0.0, 10.0, RK4)
    assert abs(a - b) / a <= 1e-9


def test_methods_agree():
    saddle = linear_saddle(SaddleParams(2.0, 1.0))
    m4, _ = compute_m(saddle, (0.2, 0.9), 0.0, 10.0, RK4)
    m5, _ = compute_m(saddle, (0.2, 0.9), 0.0, 10.0, RK45)
    assert abs(m4 - m5) / m4 <= 1e-6


def test_m_nonnegative_and_monotone_in_tau():
    saddle = linear_saddle(SaddleParams(1.0, 2.0))
    rng = np.random.default_rng(23)
    for _ in range(20):
        x0 = tuple(rng.uniform(-1, 1, 2))
        short, _ = compute_m(saddle, x0, 0.0, 5.0, RK4)
        long, _ = compute_m(saddle, x0, 0.0, 10.0, RK4)
        assert short >= 0.0
        assert long >= short * (1.0 - 1e-12)


# ---------------------------------------------------------------------------
# aborts: escape radius and non-finite fields
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("method", ["rk4-fixed", "rk45-adaptive"])
def test_escape_radius_aborts_with_partial_arclength(method):
    cfg = IntegratorConfig(method=method, escape_radius=10.0)
    saddle = linear_saddle(SaddleParams(1.0, 1.0))
    s, valid = integrate_arclength(saddle, (1.0, 0.0), 0.0, 5.0, "forward", cfg)
    full = math.exp(5.0) - 1.0  # arclength along the x-axis without the bound
    assert not valid
    # arc along the x-axis is |x| - 1, so it cannot exceed radius - 1; how
    # close it gets depends on the step granularity at the abort
    assert 0.0 < s <= 9.0 * (1.0 + 1e-12)
    assert s < full
    if method == "rk4-fixed":
        assert s == pytest.approx(9.0, rel=0.02)


@pytest.mark.parametrize("method", ["rk4-fixed", "rk45-adaptive"])
def test_nonfinite_field_aborts_invalid(method):
    # dx/dt = log(x) drives x through 0 into NaN territory
    field = from_expressions(expr.parse("log(x)"), expr.parse("0"))
    cfg = IntegratorConfig(method=method)
    s, valid = integrate_arclength(field, (0.5, 0.0), 0.0, 2.0, "forward", cfg)
    assert not valid
    assert math.isfinite(s) and s >= 0.0


def test_start_outside_escape_radius_is_invalid():
    cfg = IntegratorConfig(escape_radius=1.0)
    saddle = linear_saddle(SaddleParams(1.0, 1.0))
    s, valid = integrate_arclength(saddle, (5.0, 0.0), 0.0, 1.0, "forward", cfg)
    assert not valid and s == 0.0


# ---------------------------------------------------------------------------
# convergence sanity (full sweep lives in the acceptance suite)
# ---------------------------------------------------------------------------

def test_rk4_halving_step_shrinks_error():
    saddle = linear_saddle(SaddleParams(1.0, 2.0))
    expected = oracle_m(AnalyticSaddleFlow(1.0, 2.0), (0.3, -0.4), 10.0, 1e-12)
    errors = []
    for divisor in (500, 1000):
        cfg = IntegratorConfig(step=10.0 / divisor)
        m, _ = compute_m(saddle, (0.3, -0.4), 0.0, 10.0, cfg)
        errors.append(abs(m - expected))
    assert errors[1] < errors[0] / 8.0
