"""Pure-Python/NumPy integration backend.

Fallback used when the compiled extension is unavailable (or when
``LDESC_PURE_PYTHON=1``).  Fixed-step RK4 is vectorized over whole batches
of initial conditions; the adaptive RK45 (Dormand-Prince 5(4)) runs point
by point.

The arithmetic here mirrors the operation order of ``_kernels.pyx``
exactly, so fields whose right-hand side is polynomial (the built-in
saddle) produce bit-identical trajectories on both backends.
Transcendental fields may differ in the last ulp because NumPy's
vectorized math does not always round like libm.
"""

from __future__ import annotations

import math

import numpy as np

from . import _vm

BACKEND_NAME = "python"

KIND_SADDLE = 0
KIND_EXPR = 1

METHOD_RK4 = 0
METHOD_RK45 = 1

# Dormand-Prince 5(4) tableau; E* are (5th order minus embedded 4th order)
# quadrature weights for the error estimate.
_C2 = 1.0 / 5.0
_C3 = 3.0 / 10.0
_C4 = 4.0 / 5.0
_C5 = 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31 = 3.0 / 40.0
_A32 = 9.0 / 40.0
_A41 = 44.0 / 45.0
_A42 = -56.0 / 15.0
_A43 = 32.0 / 9.0
_A51 = 19372.0 / 6561.0
_A52 = -25360.0 / 2187.0
_A53 = 64448.0 / 6561.0
_A54 = -212.0 / 729.0
_A61 = 9017.0 / 3168.0
_A62 = -355.0 / 33.0
_A63 = 46732.0 / 5247.0
_A64 = 49.0 / 176.0
_A65 = -5103.0 / 18656.0
_B1 = 35.0 / 384.0
_B3 = 500.0 / 1113.0
_B4 = 125.0 / 192.0
_B5 = -2187.0 / 6784.0
_B6 = 11.0 / 84.0
_E1 = 71.0 / 57600.0
_E3 = -71.0 / 16695.0
_E4 = 71.0 / 1920.0
_E5 = -17253.0 / 339200.0
_E6 = 22.0 / 525.0
_E7 = -1.0 / 40.0

_MAX_RK45_STEPS = 10_000_000


def _wrap_program(ops, args, consts):
    return _vm.Program(ops=np.asarray(ops, dtype=np.int32),
                       args=np.asarray(args, dtype=np.int32),
                       consts=np.asarray(consts, dtype=np.float64),
                       max_stack=0)


def _rhs_batch(kind, p0, p1, pdx, pdy, x, y, t, sgn):
    if kind == KIND_SADDLE:
        vx = sgn * (p0 * x)
        vy = sgn * (-(p1 * y))
        return vx, vy
    vx = sgn * _vm.eval_array(pdx, x, y, t)
    vy = sgn * _vm.eval_array(pdy, x, y, t)
    return vx, vy


def _rhs_scalar(kind, p0, p1, pdx, pdy, x, y, t, sgn):
    if kind == KIND_SADDLE:
        return sgn * (p0 * x), sgn * (-(p1 * y))
    return (sgn * _vm.eval_scalar(pdx, x, y, t),
            sgn * _vm.eval_scalar(pdy, x, y, t))


def _rk4_batch(kind, p0, p1, pdx, pdy, x0s, y0s, t0, duration, sgn,
               nsteps, h, r2):
    """Classic RK4 on the arclength-augmented state, all points in lockstep.

    Points that escape or hit a non-finite value are frozen at their
    pre-step state and flagged invalid, matching the per-point kernel.
    """
    x = np.array(x0s, dtype=np.float64, copy=True)
    y = np.array(y0s, dtype=np.float64, copy=True)
    s = np.zeros_like(x)
    with np.errstate(all="ignore"):
        alive = np.isfinite(x) & np.isfinite(y) & (x * x + y * y <= r2)
    valid = alive.copy()
    if duration <= 0.0 or nsteps <= 0:
        return x, y, s, valid

    hh = 0.5 * h
    c6 = h / 6.0
    with np.errstate(all="ignore"):
        for k in range(nsteps):
            if not alive.any():
                break
            sig = k * h
            t1 = t0 + sgn * sig
            t2 = t0 + sgn * (sig + hh)
            t4 = t0 + sgn * (sig + h)

            k1x, k1y = _rhs_batch(kind, p0, p1, pdx, pdy, x, y, t1, sgn)
            k1s = np.sqrt(k1x * k1x + k1y * k1y)
            ax = x + hh * k1x
            ay = y + hh * k1y
            k2x, k2y = _rhs_batch(kind, p0, p1, pdx, pdy, ax, ay, t2, sgn)
            k2s = np.sqrt(k2x * k2x + k2y * k2y)
            bx = x + hh * k2x
            by = y + hh * k2y
            k3x, k3y = _rhs_batch(kind, p0, p1, pdx, pdy, bx, by, t2, sgn)
            k3s = np.sqrt(k3x * k3x + k3y * k3y)
            cx = x + h * k3x
            cy = y + h * k3y
            k4x, k4y = _rhs_batch(kind, p0, p1, pdx, pdy, cx, cy, t4, sgn)
            k4s = np.sqrt(k4x * k4x + k4y * k4y)

            xn = x + c6 * (((k1x + 2.0 * k2x) + 2.0 * k3x) + k4x)
            yn = y + c6 * (((k1y + 2.0 * k2y) + 2.0 * k3y) + k4y)
            sn = s + c6 * (((k1s + 2.0 * k2s) + 2.0 * k3s) + k4s)

            ok = (np.isfinite(xn) & np.isfinite(yn) & np.isfinite(sn)
                  & (xn * xn + yn * yn <= r2))
            step = alive & ok
            dead = alive & ~ok
            if dead.any():
                valid[dead] = False
            if step.all():
                x, y, s = xn, yn, sn
            else:
                x = np.where(step, xn, x)
                y = np.where(step, yn, y)
                s = np.where(step, sn, s)
            alive = step
    return x, y, s, valid


def _rk45_point(kind, p0, p1, pdx, pdy, x0, y0, t0, duration, sgn,
                rtol, atol, r2):
    """Adaptive Dormand-Prince 5(4) for a single point."""
    x, y, s = float(x0), float(y0), 0.0
    if not (math.isfinite(x) and math.isfinite(y) and x * x + y * y <= r2):
        return x, y, 0.0, False
    if duration <= 0.0:
        return x, y, 0.0, True

    elapsed = 0.0
    h = duration * 1e-4
    hmin = duration * 1e-15
    valid = True
    iterations = 0
    sqrt = math.sqrt
    while elapsed < duration:
        last = False
        if h >= duration - elapsed:
            h = duration - elapsed
            last = True

        k1x, k1y = _rhs_scalar(kind, p0, p1, pdx, pdy, x, y,
                               t0 + sgn * elapsed, sgn)
        k1s = sqrt(k1x * k1x + k1y * k1y)
        ax = x + h * (_A21 * k1x)
        ay = y + h * (_A21 * k1y)
        k2x, k2y = _rhs_scalar(kind, p0, p1, pdx, pdy, ax, ay,
                               t0 + sgn * (elapsed + _C2 * h), sgn)
        k2s = sqrt(k2x * k2x + k2y * k2y)
        bx = x + h * (_A31 * k1x + _A32 * k2x)
        by = y + h * (_A31 * k1y + _A32 * k2y)
        k3x, k3y = _rhs_scalar(kind, p0, p1, pdx, pdy, bx, by,
                               t0 + sgn * (elapsed + _C3 * h), sgn)
        k3s = sqrt(k3x * k3x + k3y * k3y)
        cx = x + h * (_A41 * k1x + _A42 * k2x + _A43 * k3x)
        cy = y + h * (_A41 * k1y + _A42 * k2y + _A43 * k3y)
        k4x, k4y = _rhs_scalar(kind, p0, p1, pdx, pdy, cx, cy,
                               t0 + sgn * (elapsed + _C4 * h), sgn)
        k4s = sqrt(k4x * k4x + k4y * k4y)
        dx = x + h * (_A51 * k1x + _A52 * k2x + _A53 * k3x + _A54 * k4x)
        dy = y + h * (_A51 * k1y + _A52 * k2y + _A53 * k3y + _A54 * k4y)
        k5x, k5y = _rhs_scalar(kind, p0, p1, pdx, pdy, dx, dy,
                               t0 + sgn * (elapsed + _C5 * h), sgn)
        k5s = sqrt(k5x * k5x + k5y * k5y)
        ex = x + h * (_A61 * k1x + _A62 * k2x + _A63 * k3x + _A64 * k4x + _A65 * k5x)
        ey = y + h * (_A61 * k1y + _A62 * k2y + _A63 * k3y + _A64 * k4y + _A65 * k5y)
        k6x, k6y = _rhs_scalar(kind, p0, p1, pdx, pdy, ex, ey,
                               t0 + sgn * (elapsed + h), sgn)
        k6s = sqrt(k6x * k6x + k6y * k6y)

        xn = x + h * (_B1 * k1x + _B3 * k3x + _B4 * k4x + _B5 * k5x + _B6 * k6x)
        yn = y + h * (_B1 * k1y + _B3 * k3y + _B4 * k4y + _B5 * k5y + _B6 * k6y)
        sn = s + h * (_B1 * k1s + _B3 * k3s + _B4 * k4s + _B5 * k5s + _B6 * k6s)

        k7x, k7y = _rhs_scalar(kind, p0, p1, pdx, pdy, xn, yn,
                               t0 + sgn * (elapsed + h), sgn)
        k7s = sqrt(k7x * k7x + k7y * k7y)
        errx = h * (_E1 * k1x + _E3 * k3x + _E4 * k4x + _E5 * k5x + _E6 * k6x + _E7 * k7x)
        erry = h * (_E1 * k1y + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y + _E7 * k7y)
        errs = h * (_E1 * k1s + _E3 * k3s + _E4 * k4s + _E5 * k5s + _E6 * k6s + _E7 * k7s)

        if not (math.isfinite(xn) and math.isfinite(yn) and math.isfinite(sn)
                and math.isfinite(errx) and math.isfinite(erry) and math.isfinite(errs)):
            valid = False  # non-finite field evaluation: abort with partial arc
            break

        scx = atol + rtol * max(abs(x), abs(xn))
        scy = atol + rtol * max(abs(y), abs(yn))
        scs = atol + rtol * max(abs(s), abs(sn))
        qx = errx / scx
        qy = erry / scy
        qs = errs / scs
        err = sqrt((qx * qx + qy * qy + qs * qs) / 3.0)

        if err <= 1.0:
            if xn * xn + yn * yn > r2:
                valid = False  # escaped; keep pre-step arclength
                break
            x, y, s = xn, yn, sn
            if last:
                elapsed = duration
                break
            elapsed = elapsed + h
            fac = 5.0 if err == 0.0 else 0.9 * err ** -0.2
            if fac > 5.0:
                fac = 5.0
            if fac < 0.2:
                fac = 0.2
            h = h * fac
        else:
            fac = 0.9 * err ** -0.2
            if fac < 0.2:
                fac = 0.2
            if fac > 1.0:
                fac = 1.0
            h = h * fac

        if h < hmin:
            valid = False
            break
        iterations += 1
        if iterations > _MAX_RK45_STEPS:
            valid = False
            break
    return x, y, s, valid


def integrate_point(kind, p0, p1, ops_dx, args_dx, consts_dx,
                    ops_dy, args_dy, consts_dy,
                    x0, y0, t0, duration, sgn, method, nsteps, h,
                    rtol, atol, escape_radius):
    """Integrate one augmented trajectory; returns (x, y, arclength, valid)."""
    pdx = _wrap_program(ops_dx, args_dx, consts_dx)
    pdy = _wrap_program(ops_dy, args_dy, consts_dy)
    r2 = escape_radius * escape_radius
    if method == METHOD_RK4:
        xa = np.asarray([x0], dtype=np.float64)
        ya = np.asarray([y0], dtype=np.float64)
        x, y, s, valid = _rk4_batch(kind, p0, p1, pdx, pdy, xa, ya,
                                    t0, duration, sgn, nsteps, h, r2)
        return float(x[0]), float(y[0]), float(s[0]), bool(valid[0])
    return _rk45_point(kind, p0, p1, pdx, pdy, x0, y0, t0, duration, sgn,
                       rtol, atol, r2)


def compute_m_batch(kind, p0, p1, ops_dx, args_dx, consts_dx,
                    ops_dy, args_dy, consts_dy,
                    x0s, y0s, t0, tau, method, nsteps, h,
                    rtol, atol, escape_radius, out_m, out_valid):
    """Descriptor values for a batch of initial conditions.

    Fills out_m / out_valid in place; M is the forward arclength plus the
    backward arclength, valid only when both halves stayed finite and
    inside the escape radius.
    """
    pdx = _wrap_program(ops_dx, args_dx, consts_dx)
    pdy = _wrap_program(ops_dy, args_dy, consts_dy)
    r2 = escape_radius * escape_radius
    if method == METHOD_RK4:
        _, _, sf, vf = _rk4_batch(kind, p0, p1, pdx, pdy, x0s, y0s,
                                  t0, tau, 1.0, nsteps, h, r2)
        _, _, sb, vb = _rk4_batch(kind, p0, p1, pdx, pdy, x0s, y0s,
                                  t0, tau, -1.0, nsteps, h, r2)
        out_m[:] = sf + sb
        out_valid[:] = (vf & vb)
        return
    for i in range(len(x0s)):
        _, _, sf, vf = _rk45_point(kind, p0, p1, pdx, pdy,
                                   x0s[i], y0s[i], t0, tau, 1.0,
                                   rtol, atol, r2)
        _, _, sb, vb = _rk45_point(kind, p0, p1, pdx, pdy,
                                   x0s[i], y0s[i], t0, tau, -1.0,
                                   rtol, atol, r2)
        out_m[i] = sf + sb
        out_valid[i] = vf and vb
