"""Independent oracle for the linear saddle family.

The saddle flow is known in closed form, so the descriptor value can be
computed as a plain 1-D quadrature of the exact speed.  This module shares
no code with the integration kernels on purpose: it exists to validate
them, and a shared bug would defeat that.

For generic initial conditions the speed sqrt(a*e^(2*lam*t) + b*e^(-2*mu*t))
has no elementary antiderivative, hence adaptive Simpson quadrature; on-axis
initial conditions reduce to single exponentials with closed forms used in
the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "AnalyticSaddleFlow",
    "QuadratureError",
    "adaptive_simpson",
    "oracle_m",
]


class QuadratureError(RuntimeError):
    """Adaptive quadrature hit its depth cap before reaching tolerance."""


@dataclass(frozen=True)
class AnalyticSaddleFlow:
    """Closed-form flow of dx/dt = lam*x, dy/dt = -mu*y.

    x(t) = x0*e^(lam*t), y(t) = y0*e^(-mu*t), so the trajectory speed is
    sqrt(lam^2*x0^2*e^(2*lam*t) + mu^2*y0^2*e^(-2*mu*t)).
    """

    lam: float
    mu: float

    def __post_init__(self):
        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            raise ValueError(f"expansion rate must be positive, got {self.lam}")
        if not (self.mu > 0.0 and math.isfinite(self.mu)):
            raise ValueError(f"contraction rate must be positive, got {self.mu}")

    def speed(self, x0: float, y0: float, t: float) -> float:
        vx = self.lam * x0 * math.exp(self.lam * t)
        vy = self.mu * y0 * math.exp(-self.mu * t)
        return math.hypot(vx, vy)


def _simpson(fa, fm, fb, width):
    return width / 6.0 * (fa + 4.0 * fm + fb)


def _recurse(f, a, b, fa, fm, fb, whole, eps, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = _simpson(fa, flm, fm, m - a)
    right = _simpson(fm, frm, fb, b - m)
    delta = (left + right) - whole
    if abs(delta) <= 15.0 * eps:
        return left + right + delta / 15.0, True
    if depth <= 0:
        return left + right + delta / 15.0, False
    lv, lok = _recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
    rv, rok = _recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
    return lv + rv, lok and rok


def adaptive_simpson(f, a: float, b: float, tol: float, max_depth: int = 60) -> float:
    """Adaptive Simpson quadrature with Richardson correction.

    tol is an absolute error target for the whole interval; each
    subdivision halves the local budget.  Raises QuadratureError when the
    recursion depth cap is reached before the tolerance is met.
    """
    if a == b:
        return 0.0
    if not tol > 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = _simpson(fa, fm, fb, b - a)
    value, converged = _recurse(f, a, b, fa, fm, fb, whole, tol, max_depth)
    if not converged:
        raise QuadratureError(
            f"no convergence to tol={tol:g} within depth {max_depth} on [{a}, {b}]")
    return value


def oracle_m(flow: AnalyticSaddleFlow, x0, tau: float, quad_tol: float = 1e-12) -> float:
    """Descriptor value for the analytic saddle via quadrature of the exact speed.

    The error target is quad_tol*(1 + result); since the result appears in
    its own tolerance, a first pass at a provisionally scaled tolerance
    pins down the magnitude and a second pass integrates to the final
    target.
    """
    if not (tau >= 0.0 and math.isfinite(tau)):
        raise ValueError(f"tau must be non-negative, got {tau}")
    if not quad_tol > 0.0:
        raise ValueError(f"quad_tol must be positive, got {quad_tol}")
    if tau == 0.0:
        return 0.0
    px, py = float(x0[0]), float(x0[1])

    def speed(t):
        return flow.speed(px, py, t)

    coarse = _simpson(speed(-tau), speed(0.0), speed(tau), 2.0 * tau)
    first = adaptive_simpson(speed, -tau, tau, quad_tol * (1.0 + abs(coarse)))
    return adaptive_simpson(speed, -tau, tau, quad_tol * (1.0 + abs(first)))
