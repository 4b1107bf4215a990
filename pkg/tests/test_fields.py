import math

import numpy as np
import pytest

from ldesc import _vm, expr
from ldesc.fields import (SaddleParams, from_expressions, from_spec,
                          linear_saddle, separable_incompressible)


def test_saddle_formula():
    f = linear_saddle(SaddleParams(1.0, 1.0))
    assert f.eval_at(2.0, 3.0) == (2.0, -3.0)
    assert f.autonomous


def test_saddle_origin_is_fixed_point():
    f = linear_saddle(SaddleParams(1.0, 2.0))
    assert f.eval_at(0.0, 0.0) == (0.0, 0.0)


def test_saddle_unequal_rates():
    f = linear_saddle(SaddleParams(2.0, 1.0))
    assert f.eval_at(1.0, 1.0) == (2.0, -1.0)


@pytest.mark.parametrize("lam,mu", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0),
                                    (1.0, -2.0), (math.nan, 1.0)])
def test_saddle_rejects_nonpositive_rates(lam, mu):
    with pytest.raises(ValueError):
        SaddleParams(lam, mu)


def test_separable_linear_profile_equals_unit_saddle():
    f = separable_incompressible(expr.parse("x"))
    saddle = linear_saddle(SaddleParams(1.0, 1.0))
    rng = np.random.default_rng(3)
    for _ in range(100):
        x, y = rng.uniform(-2, 2, 2)
        assert f.eval_at(x, y) == saddle.eval_at(x, y)


def test_separable_sin_components_and_divergence():
    f = separable_incompressible(expr.parse("sin(x)"))
    rng = np.random.default_rng(5)
    h = 1e-4
    for _ in range(100):
        x, y = rng.uniform(-2, 2, 2)
        vx, vy = f.eval_at(x, y)
        assert vx == pytest.approx(math.sin(x), rel=1e-12)
        assert vy == pytest.approx(-y * math.cos(x), rel=1e-12, abs=1e-15)
        div = ((f.eval_at(x + h, y)[0] - f.eval_at(x - h, y)[0]) / (2 * h)
               + (f.eval_at(x, y + h)[1] - f.eval_at(x, y - h)[1]) / (2 * h))
        assert abs(div) <= 1e-6


def test_separable_tanh_origin_is_hyperbolic():
    f = separable_incompressible(expr.parse("tanh(x)"))
    h = 1e-6
    jac = np.empty((2, 2))
    for col, (dx, dy) in enumerate([(h, 0.0), (0.0, h)]):
        hi = f.eval_at(dx, dy)
        lo = f.eval_at(-dx, -dy)
        jac[0, col] = (hi[0] - lo[0]) / (2 * h)
        jac[1, col] = (hi[1] - lo[1]) / (2 * h)
    eig = np.sort(np.linalg.eigvals(jac).real)
    assert eig == pytest.approx([-1.0, 1.0], abs=1e-6)
    # axis alignment: Jacobian is diagonal, so x-axis expands, y-axis contracts
    assert abs(jac[0, 1]) < 1e-6 and abs(jac[1, 0]) < 1e-6


@pytest.mark.parametrize("bad", ["y", "x + t", "sin(y)*x"])
def test_separable_rejects_non_x_profiles(bad):
    with pytest.raises(ValueError):
        separable_incompressible(expr.parse(bad))


def test_from_expressions_zero_field():
    f = from_expressions(expr.parse("0"), expr.parse("0"))
    assert f.eval_at(0.3, -0.8) == (0.0, 0.0)
    assert f.autonomous


def test_from_expressions_matches_builtin_saddle_bitwise():
    f = from_expressions(expr.parse("1.3*x"), expr.parse("-(0.7*y)"))
    saddle = linear_saddle(SaddleParams(1.3, 0.7))
    rng = np.random.default_rng(11)
    for _ in range(100):
        x, y = rng.uniform(-3, 3, 2)
        assert f.eval_at(x, y) == saddle.eval_at(x, y)


def test_from_expressions_rotation_speed():
    f = from_expressions(expr.parse("-y"), expr.parse("x"))
    rng = np.random.default_rng(13)
    for _ in range(50):
        x, y = rng.uniform(-2, 2, 2)
        vx, vy = f.eval_at(x, y)
        assert math.hypot(vx, vy) == pytest.approx(math.hypot(x, y), rel=1e-12)


def test_autonomous_flag_tracks_t_dependence():
    assert from_expressions(expr.parse("x"), expr.parse("-y")).autonomous
    assert not from_expressions(expr.parse("x + t"), expr.parse("-y")).autonomous
    assert not from_expressions(expr.parse("x"), expr.parse("sin(t)")).autonomous


def test_program_evaluation_matches_tree_evaluation():
    dx = expr.parse("sin(x)*exp(-y^2) + tanh(t)")
    prog = _vm.compile_ast(dx)
    rng = np.random.default_rng(17)
    for _ in range(50):
        x, y, t = rng.uniform(-2, 2, 3)
        tree = expr.evaluate(dx, x, y, t)
        scalar = _vm.eval_scalar(prog, x, y, t)
        vector = float(_vm.eval_array(prog, np.asarray([x]), np.asarray([y]), t)[0])
        assert scalar == pytest.approx(tree, rel=1e-12)
        assert vector == pytest.approx(tree, rel=1e-12)


def test_from_spec_registry():
    saddle = from_spec("saddle(1.5, 2)")
    assert saddle.kind == "saddle"
    assert saddle.saddle == SaddleParams(1.5, 2.0)
    sep = from_spec("separable(tanh(x))")
    assert sep.kind == "expression"
    custom = from_spec("custom", "x", "-y")
    assert custom.eval_at(1.0, 2.0) == (1.0, -2.0)
    inline = from_spec("custom(x, -y)")
    assert inline.eval_at(1.0, 2.0) == (1.0, -2.0)


@pytest.mark.parametrize("bad", ["saddle(1)", "saddle(a,b)", "nope(1,2)",
                                 "saddle(1,2", "custom", "custom(x)",
                                 "custom(x,y,t)"])
def test_from_spec_rejects_malformed(bad):
    with pytest.raises(ValueError):
        from_spec(bad)
