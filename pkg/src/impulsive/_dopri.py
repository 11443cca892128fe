"""Numba-compiled Dormand-Prince 5(4) stepper for scalar polynomial ODEs."""

from __future__ import annotations

import numba as nb
import numpy as np

OK = 0
ESCAPED = 1
STEP_LIMIT = 2

# Dormand-Prince tableau
C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# fifth-order minus embedded fourth-order weights
E1 = 71.0 / 57600.0
E3 = -71.0 / 16695.0
E4 = 71.0 / 1920.0
E5 = -17253.0 / 339200.0
E6 = 22.0 / 525.0
E7 = -1.0 / 40.0


@nb.njit(cache=True)
def horner(coeffs, x):
    acc = 0.0
    for i in range(coeffs.shape[0] - 1, -1, -1):
        acc = acc * x + coeffs[i]
    return acc


@nb.njit(cache=True)
def horner_deriv(coeffs, x):
    acc = 0.0
    for i in range(coeffs.shape[0] - 1, 0, -1):
        acc = acc * x + i * coeffs[i]
    return acc


@nb.njit(cache=True)
def _initial_step(coeffs, x0, t_end, rtol, atol, max_step):
    f0 = horner(coeffs, x0)
    scale = atol + rtol * abs(x0)
    d0 = abs(x0) / scale
    d1 = abs(f0) / scale
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    x1 = x0 + h0 * f0
    f1 = horner(coeffs, x1)
    d2 = abs(f1 - f0) / scale / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, max_step, t_end)


@nb.njit(cache=True)
def integrate(coeffs, dcoeffs, x0, t_end, rtol, atol, max_step, max_steps, x_max,
              with_var, record, ts, xs):
    """Integrate x' = h(x) (and y' = h'(x) y when with_var) from 0 to t_end.

    With ``with_var`` the error norm covers both components.  When
    ``record`` is set, accepted step endpoints are written into ``ts``/``xs``.
    Returns (x, y, status, n_recorded).
    """
    x = x0
    y = 1.0
    t = 0.0
    n_rec = 0
    if record:
        ts[0] = 0.0
        xs[0] = x0
        n_rec = 1
    if t_end <= 0.0:
        return x, y, OK, n_rec
    h = _initial_step(coeffs, x0, t_end, rtol, atol, max_step)
    k1 = horner(coeffs, x)
    steps = 0
    while t < t_end:
        if steps >= max_steps:
            return x, y, STEP_LIMIT, n_rec
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        x2 = x + h * A21 * k1
        k2 = horner(coeffs, x2)
        x3 = x + h * (A31 * k1 + A32 * k2)
        k3 = horner(coeffs, x3)
        x4 = x + h * (A41 * k1 + A42 * k2 + A43 * k3)
        k4 = horner(coeffs, x4)
        x5 = x + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4)
        k5 = horner(coeffs, x5)
        x6 = x + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5)
        k6 = horner(coeffs, x6)
        x_new = x + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        k7 = horner(coeffs, x_new)
        err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        scale = atol + rtol * max(abs(x), abs(x_new))
        err_norm = abs(err) / scale
        y_new = y
        if with_var:
            # the same stages applied to the linear variational equation
            l1 = horner(dcoeffs, x) * y
            l2 = horner(dcoeffs, x2) * (y + h * A21 * l1)
            l3 = horner(dcoeffs, x3) * (y + h * (A31 * l1 + A32 * l2))
            l4 = horner(dcoeffs, x4) * (y + h * (A41 * l1 + A42 * l2 + A43 * l3))
            l5 = horner(dcoeffs, x5) * (y + h * (A51 * l1 + A52 * l2 + A53 * l3 + A54 * l4))
            l6 = horner(dcoeffs, x6) * (y + h * (A61 * l1 + A62 * l2 + A63 * l3 + A64 * l4
                                                 + A65 * l5))
            y_new = y + h * (B1 * l1 + B3 * l3 + B4 * l4 + B5 * l5 + B6 * l6)
            l7 = horner(dcoeffs, x_new) * y_new
            err_y = h * (E1 * l1 + E3 * l3 + E4 * l4 + E5 * l5 + E6 * l6 + E7 * l7)
            err_norm = max(err_norm, abs(err_y) / (atol + rtol * max(abs(y), abs(y_new))))
        steps += 1
        if err_norm <= 1.0 and x_new == x_new and y_new == y_new:
            y = y_new
            t = t_end if last else t + h
            x = x_new
            k1 = k7
            if record and n_rec < ts.shape[0]:
                ts[n_rec] = t
                xs[n_rec] = x
                n_rec += 1
            if x > x_max:
                return x, y, ESCAPED, n_rec
            if err_norm == 0.0:
                fac = 5.0
            else:
                fac = min(5.0, 0.9 * err_norm ** -0.2)
            h = min(h * fac, max_step)
        else:
            if x_new != x_new:
                fac = 0.1
            else:
                fac = max(0.2, 0.9 * err_norm ** -0.2)
            h = h * fac
            if h < 1e-300:
                return x, y, STEP_LIMIT, n_rec
    return x, y, OK, n_rec


_EMPTY = np.zeros(1)


def run(coeffs, dcoeffs, x0, t_end, rtol, atol, max_step, max_steps, x_max, with_var=False):
    return integrate(coeffs, dcoeffs, float(x0), float(t_end), rtol, atol, max_step,
                     max_steps, x_max, with_var, False, _EMPTY, _EMPTY)
