# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled integration backend.

Hot kernels for trajectory-arclength integration: fixed-step RK4 and
adaptive Dormand-Prince 5(4) on the (x, y, s) augmented state, plus a stack
machine executing expression programs from ``_vm``.  The operation order
matches ``_kernels_py`` exactly (see the note there about bit-identical
results across backends), which is also why the build disables FMA
contraction.

All loops release the GIL, so callers can parallelize batches with plain
threads.
"""

from libc.math cimport (sin, cos, tan, tanh, exp, log, sqrt, fabs, pow,
                        isfinite, isnan)

BACKEND_NAME = "compiled"

cdef enum:
    C_KIND_SADDLE = 0
    C_KIND_EXPR = 1
    C_METHOD_RK4 = 0
    C_METHOD_RK45 = 1

KIND_SADDLE = C_KIND_SADDLE
KIND_EXPR = C_KIND_EXPR
METHOD_RK4 = C_METHOD_RK4
METHOD_RK45 = C_METHOD_RK45

cdef enum:
    OP_CONST = 0
    OP_X = 1
    OP_Y = 2
    OP_T = 3
    OP_NEG = 4
    OP_ADD = 5
    OP_SUB = 6
    OP_MUL = 7
    OP_DIV = 8
    OP_POW = 9
    OP_SIN = 10
    OP_COS = 11
    OP_TAN = 12
    OP_TANH = 13
    OP_EXP = 14
    OP_LOG = 15
    OP_SQRT = 16
    OP_ABS = 17
    OP_SIGN = 18
    OP_SQR = 19

# mirror of the enum for the opcode-agreement test against _vm.OPCODES
OPCODES = {
    "const": OP_CONST, "x": OP_X, "y": OP_Y, "t": OP_T,
    "neg": OP_NEG, "add": OP_ADD, "sub": OP_SUB, "mul": OP_MUL,
    "div": OP_DIV, "pow": OP_POW, "sin": OP_SIN, "cos": OP_COS,
    "tan": OP_TAN, "tanh": OP_TANH, "exp": OP_EXP, "log": OP_LOG,
    "sqrt": OP_SQRT, "abs": OP_ABS, "sign": OP_SIGN, "sqr": OP_SQR,
}

DEF STACK_SIZE = 128

# Dormand-Prince 5(4) tableau (identical literals in _kernels_py)
DEF C2 = 1.0 / 5.0
DEF C3 = 3.0 / 10.0
DEF C4 = 4.0 / 5.0
DEF C5 = 8.0 / 9.0
DEF A21 = 1.0 / 5.0
DEF A31 = 3.0 / 40.0
DEF A32 = 9.0 / 40.0
DEF A41 = 44.0 / 45.0
DEF A42 = -56.0 / 15.0
DEF A43 = 32.0 / 9.0
DEF A51 = 19372.0 / 6561.0
DEF A52 = -25360.0 / 2187.0
DEF A53 = 64448.0 / 6561.0
DEF A54 = -212.0 / 729.0
DEF A61 = 9017.0 / 3168.0
DEF A62 = -355.0 / 33.0
DEF A63 = 46732.0 / 5247.0
DEF A64 = 49.0 / 176.0
DEF A65 = -5103.0 / 18656.0
DEF B1 = 35.0 / 384.0
DEF B3 = 500.0 / 1113.0
DEF B4 = 125.0 / 192.0
DEF B5 = -2187.0 / 6784.0
DEF B6 = 11.0 / 84.0
DEF E1 = 71.0 / 57600.0
DEF E3 = -71.0 / 16695.0
DEF E4 = 71.0 / 1920.0
DEF E5 = -17253.0 / 339200.0
DEF E6 = 22.0 / 525.0
DEF E7 = -1.0 / 40.0

DEF MAX_RK45_STEPS = 10000000


cdef inline double _sign_fn(double a) noexcept nogil:
    if a > 0.0:
        return 1.0
    if a < 0.0:
        return -1.0
    if isnan(a):
        return a
    return 0.0


cdef double _vm_eval(const int* ops, const int* args, const double* consts,
                     int n, double xx, double yy, double tt,
                     double* stack) noexcept nogil:
    cdef int i, op, sp = 0
    for i in range(n):
        op = ops[i]
        if op == OP_CONST:
            stack[sp] = consts[args[i]]
            sp += 1
        elif op == OP_X:
            stack[sp] = xx
            sp += 1
        elif op == OP_Y:
            stack[sp] = yy
            sp += 1
        elif op == OP_T:
            stack[sp] = tt
            sp += 1
        elif op == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op == OP_ADD:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] + stack[sp]
        elif op == OP_SUB:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] - stack[sp]
        elif op == OP_MUL:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] * stack[sp]
        elif op == OP_DIV:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] / stack[sp]
        elif op == OP_POW:
            sp -= 1
            stack[sp - 1] = pow(stack[sp - 1], stack[sp])
        elif op == OP_SIN:
            stack[sp - 1] = sin(stack[sp - 1])
        elif op == OP_COS:
            stack[sp - 1] = cos(stack[sp - 1])
        elif op == OP_TAN:
            stack[sp - 1] = tan(stack[sp - 1])
        elif op == OP_TANH:
            stack[sp - 1] = tanh(stack[sp - 1])
        elif op == OP_EXP:
            stack[sp - 1] = exp(stack[sp - 1])
        elif op == OP_LOG:
            stack[sp - 1] = log(stack[sp - 1])
        elif op == OP_SQRT:
            stack[sp - 1] = sqrt(stack[sp - 1])
        elif op == OP_ABS:
            stack[sp - 1] = fabs(stack[sp - 1])
        elif op == OP_SIGN:
            stack[sp - 1] = _sign_fn(stack[sp - 1])
        else:  # OP_SQR
            stack[sp - 1] = stack[sp - 1] * stack[sp - 1]
    return stack[0]


cdef inline void _rhs(int kind, double p0, double p1,
                      const int* odx, const int* adx, const double* cdx, int ndx,
                      const int* ody, const int* ady, const double* cdy, int ndy,
                      double xx, double yy, double tt, double sgn,
                      double* stack, double* vx, double* vy) noexcept nogil:
    if kind == C_KIND_SADDLE:
        vx[0] = sgn * (p0 * xx)
        vy[0] = sgn * (-(p1 * yy))
    else:
        vx[0] = sgn * _vm_eval(odx, adx, cdx, ndx, xx, yy, tt, stack)
        vy[0] = sgn * _vm_eval(ody, ady, cdy, ndy, xx, yy, tt, stack)


cdef int _rk4_point(int kind, double p0, double p1,
                    const int* odx, const int* adx, const double* cdx, int ndx,
                    const int* ody, const int* ady, const double* cdy, int ndy,
                    double x0, double y0, double t0, double duration,
                    double sgn, long nsteps, double h, double r2,
                    double* stack,
                    double* xf, double* yf, double* sf) noexcept nogil:
    cdef double x = x0, y = y0, s = 0.0
    cdef double hh, c6, sig, t1, t2, t4
    cdef double k1x, k1y, k1s, k2x, k2y, k2s, k3x, k3y, k3s, k4x, k4y, k4s
    cdef double ax, ay, bx, by, cx, cy, xn, yn, sn
    cdef long k
    cdef int valid = 1

    if not (isfinite(x) and isfinite(y) and x * x + y * y <= r2):
        xf[0] = x; yf[0] = y; sf[0] = 0.0
        return 0
    if duration <= 0.0 or nsteps <= 0:
        xf[0] = x; yf[0] = y; sf[0] = 0.0
        return 1

    hh = 0.5 * h
    c6 = h / 6.0
    for k in range(nsteps):
        sig = (<double> k) * h
        t1 = t0 + sgn * sig
        t2 = t0 + sgn * (sig + hh)
        t4 = t0 + sgn * (sig + h)

        _rhs(kind, p0, p1, odx, adx, cdx, ndx, ody, ady, cdy, ndy,
             x, y, t1, sgn, stack, &k1x, &k1y)
        k1s = sqrt(k1x * k1x + k1y * k1y)
        ax = x + hh * k1x
        ay = y + hh * k1y
        _rhs(kind, p0, p1, odx, adx, cdx, ndx, ody, ady, cdy, ndy,
             ax, ay, t2, sgn, stack, &k2x, &k2y)
        k2s = sqrt(k2x * k2x + k2y * k2y)
        bx = x + hh * k2x
        by = y + hh * k2y
        _rhs(kind, p0, p1, odx, adx, cdx, ndx, ody, ady, cdy, ndy,
             bx, by, t2, sgn, stack, &k3x, &k3y)
        k3s = sqrt(k3x * k3x + k3y * k3y)
        cx = x + h * k3x
        cy = y + h * k3y
        _rhs(kind, p0, p1, odx, adx, cdx, ndx, ody, ady, cdy, ndy,
             cx, cy, t4, sgn, stack, &k4x, &k4y)
        k4s = sqrt(k4x * k4x + k4y * k4y)

        xn = x + c6 * (((k1x + 2.0 * k2x) + 2.0 * k3x) + k4x)
        yn = y + c6 * (((k1y + 2.0 * k2y) + 2.0 * k3y) + k4y)
        sn = s + c6 * (((k1s + 2.0 * k2s) + 2.0 * k3s) + k4s)

        if not (isfinite(xn) and isfinite(yn) and isfinite(sn)
                and xn * xn + yn * yn <= r2):
            valid = 0  # freeze pre-step state; arclength stays partial
            break
        x = xn
        y = yn
        s = sn
    xf[0] = x; yf[0] = y; sf[0] = s
    return valid


cdef int _rk45_point(int kind, double p0, double p1,
                     const int* odx, const int* adx, const double* cdx, int ndx,
                     const int* ody, const int* ady, const double* cdy, int ndy,
                     double x0, double y0, double t0, double duration,
                     double sgn, double rtol, double atol, double r2,
                     double* stack,
                     double* xf, double* yf, double* sf) noexcept nogil:
    cdef double x = x0, y = y0, s = 0.0
    cdef double elapsed, h, hmin, fac, err
    cdef double k1x, k1y, k1s, k2x, k2y, k2s, k3x, k3y, k3s
    cdef double k4x, k4y, k4s, k5x, k5y, k5s, k6x, k6y, k6s, k7x, k7y, k7s
    cdef double ax, ay, bx, by, cx, cy, dx, dy, ex, ey, xn, yn, sn
    cdef double errx, erry, errs, scx, scy, scs, qx, qy, qs
    cdef long iterations = 0
    cdef int valid = 1
    cdef bint last

    if not (isfinite(x) and isfinite(y) and x * x + y * y <= r2):
        xf[0] = x; yf[0] = y; sf[0] = 0.0
        return 0
    if duration <= 0.0:
        xf[0] = x; yf[0] = y; sf[0] = 0.0
        return 1

    elapsed = 0.0
    h = duration * 1e-4
    hmin = duration * 1e-15
    while elapsed < duration:
        last = False
        if h >= duration - elapsed:
            h = duration - elapsed
            last = True

        _rhs(kind, p0, p1, odx, adx, cdx, ndx, ody, ady, cdy, ndy,
             x, y, t0 + sgn * elapsed, sgn, stack, &k1x, &k1y)
        k1s = sqrt(k1x * k1x + k1y * k1y)
        ax = x + h * (A21 * k1x)
        ay = y + h * (A21 * k1y)
        _rhs(kind, p0, p1, odx, adx, cdx, ndx, ody, ady, cdy, ndy,
             ax, ay, t0 + sgn * (elapsed + C2 * h), sgn, stack, &k2x, &k2y)
        k2s = sqrt(k2x * k2x + k2y * k2y)
        bx = x + h * (A31 * k1x + A32 * k2x)
        by = y + h * (A31 * k1y + A32 * k2y)
        _rhs(kind, p0, p1, odx, adx, cdx, ndx, ody, ady, cdy, ndy,
             bx, by, t0 + sgn * (elapsed + C3 * h), sgn, stack, &k3x, &k3y)
        k3s = sqrt(k3x * k3x + k3y * k3y)
        cx = x + h * (A41 * k1x + A42 * k2x + A43 * k3x)
        cy = y + h * (A41 * k1y + A42 * k2y + A43 * k3y)
        _rhs(kind, p0, p1, odx, adx, cdx, ndx, ody, ady, cdy, ndy,
             cx, cy, t0 + sgn * (elapsed + C4 * h), sgn, stack, &k4x, &k4y)
        k4s = sqrt(k4x * k4x + k4y * k4y)
        dx = x + h * (A51 * k1x + A52 * k2x + A53 * k3x + A54 * k4x)
        dy = y + h * (A51 * k1y + A52 * k2y + A53 * k3y + A54 * k4y)
        _rhs(kind, p0, p1, odx, adx, cdx, ndx, ody, ady, cdy, ndy,
             dx, dy, t0 + sgn * (elapsed + C5 * h), sgn, stack, &k5x, &k5y)
        k5s = sqrt(k5x * k5x + k5y * k5y)
        ex = x + h * (A61 * k1x + A62 * k2x + A63 * k3x + A64 * k4x + A65 * k5x)
        ey = y + h * (A61 * k1y + A62 * k2y + A63 * k3y + A64 * k4y + A65 * k5y)
        _rhs(kind, p0, p1, odx, adx, cdx, ndx, ody, ady, cdy, ndy,
             ex, ey, t0 + sgn * (elapsed + h), sgn, stack, &k6x, &k6y)
        k6s = sqrt(k6x * k6x + k6y * k6y)

        xn = x + h * (B1 * k1x + B3 * k3x + B4 * k4x + B5 * k5x + B6 * k6x)
        yn = y + h * (B1 * k1y + B3 * k3y + B4 * k4y + B5 * k5y + B6 * k6y)
        sn = s + h * (B1 * k1s + B3 * k3s + B4 * k4s + B5 * k5s + B6 * k6s)

        _rhs(kind, p0, p1, odx, adx, cdx, ndx, ody, ady, cdy, ndy,
             xn, yn, t0 + sgn * (elapsed + h), sgn, stack, &k7x, &k7y)
        k7s = sqrt(k7x * k7x + k7y * k7y)
        errx = h * (E1 * k1x + E3 * k3x + E4 * k4x + E5 * k5x + E6 * k6x + E7 * k7x)
        erry = h * (E1 * k1y + E3 * k3y + E4 * k4y + E5 * k5y + E6 * k6y + E7 * k7y)
        errs = h * (E1 * k1s + E3 * k3s + E4 * k4s + E5 * k5s + E6 * k6s + E7 * k7s)

        if not (isfinite(xn) and isfinite(yn) and isfinite(sn)
                and isfinite(errx) and isfinite(erry) and isfinite(errs)):
            valid = 0  # non-finite field evaluation: abort with partial arc
            break

        scx = atol + rtol * max(fabs(x), fabs(xn))
        scy = atol + rtol * max(fabs(y), fabs(yn))
        scs = atol + rtol * max(fabs(s), fabs(sn))
        qx = errx / scx
        qy = erry / scy
        qs = errs / scs
        err = sqrt((qx * qx + qy * qy + qs * qs) / 3.0)

        if err <= 1.0:
            if xn * xn + yn * yn > r2:
                valid = 0  # escaped; keep pre-step arclength
                break
            x = xn
            y = yn
            s = sn
            if last:
                elapsed = duration
                break
            elapsed = elapsed + h
            if err == 0.0:
                fac = 5.0
            else:
                fac = 0.9 * pow(err, -0.2)
            if fac > 5.0:
                fac = 5.0
            if fac < 0.2:
                fac = 0.2
            h = h * fac
        else:
            fac = 0.9 * pow(err, -0.2)
            if fac < 0.2:
                fac = 0.2
            if fac > 1.0:
                fac = 1.0
            h = h * fac

        if h < hmin:
            valid = 0
            break
        iterations += 1
        if iterations > MAX_RK45_STEPS:
            valid = 0
            break
    xf[0] = x; yf[0] = y; sf[0] = s
    return valid


cdef int _integrate_core(int kind, double p0, double p1,
                         const int* odx, const int* adx, const double* cdx, int ndx,
                         const int* ody, const int* ady, const double* cdy, int ndy,
                         double x0, double y0, double t0, double duration,
                         double sgn, int method, long nsteps, double h,
                         double rtol, double atol, double r2, double* stack,
                         double* xf, double* yf, double* sf) noexcept nogil:
    if method == C_METHOD_RK4:
        return _rk4_point(kind, p0, p1, odx, adx, cdx, ndx, ody, ady, cdy, ndy,
                          x0, y0, t0, duration, sgn, nsteps, h, r2, stack,
                          xf, yf, sf)
    return _rk45_point(kind, p0, p1, odx, adx, cdx, ndx, ody, ady, cdy, ndy,
                       x0, y0, t0, duration, sgn, rtol, atol, r2, stack,
                       xf, yf, sf)


def integrate_point(int kind, double p0, double p1,
                    const int[::1] ops_dx, const int[::1] args_dx,
                    const double[::1] consts_dx,
                    const int[::1] ops_dy, const int[::1] args_dy,
                    const double[::1] consts_dy,
                    double x0, double y0, double t0, double duration,
                    double sgn, int method, long nsteps, double h,
                    double rtol, double atol, double escape_radius):
    """Integrate one augmented trajectory; returns (x, y, arclength, valid)."""
    cdef double stack[STACK_SIZE]
    cdef double r2 = escape_radius * escape_radius
    cdef double xf = 0.0, yf = 0.0, sf = 0.0
    cdef int valid
    cdef int ndx = ops_dx.shape[0], ndy = ops_dy.shape[0]
    with nogil:
        valid = _integrate_core(kind, p0, p1,
                                &ops_dx[0], &args_dx[0], &consts_dx[0], ndx,
                                &ops_dy[0], &args_dy[0], &consts_dy[0], ndy,
                                x0, y0, t0, duration, sgn, method, nsteps, h,
                                rtol, atol, r2, stack, &xf, &yf, &sf)
    return xf, yf, sf, bool(valid)


def compute_m_batch(int kind, double p0, double p1,
                    const int[::1] ops_dx, const int[::1] args_dx,
                    const double[::1] consts_dx,
                    const int[::1] ops_dy, const int[::1] args_dy,
                    const double[::1] consts_dy,
                    const double[::1] x0s, const double[::1] y0s,
                    double t0, double tau, int method, long nsteps, double h,
                    double rtol, double atol, double escape_radius,
                    double[::1] out_m, unsigned char[::1] out_valid):
    """Descriptor values for a batch of initial conditions (in-place).

    Runs with the GIL released; callers may split a grid across threads.
    """
    cdef double stack[STACK_SIZE]
    cdef double r2 = escape_radius * escape_radius
    cdef double xf = 0.0, yf = 0.0, sf = 0.0, sb = 0.0
    cdef int vf, vb
    cdef Py_ssize_t i, n = x0s.shape[0]
    cdef int ndx = ops_dx.shape[0], ndy = ops_dy.shape[0]
    if out_m.shape[0] != n or out_valid.shape[0] != n or y0s.shape[0] != n:
        raise ValueError("batch arrays must share one length")
    with nogil:
        for i in range(n):
            vf = _integrate_core(kind, p0, p1,
                                 &ops_dx[0], &args_dx[0], &consts_dx[0], ndx,
                                 &ops_dy[0], &args_dy[0], &consts_dy[0], ndy,
                                 x0s[i], y0s[i], t0, tau, 1.0, method,
                                 nsteps, h, rtol, atol, r2, stack,
                                 &xf, &yf, &sf)
            vb = _integrate_core(kind, p0, p1,
                                 &ops_dx[0], &args_dx[0], &consts_dx[0], ndx,
                                 &ops_dy[0], &args_dy[0], &consts_dy[0], ndy,
                                 x0s[i], y0s[i], t0, tau, -1.0, method,
                                 nsteps, h, rtol, atol, r2, stack,
                                 &xf, &yf, &sb)
            out_m[i] = sf + sb
            out_valid[i] = 1 if (vf and vb) else 0
