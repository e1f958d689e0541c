"""Hot numerical kernels: effective Hamiltonian, its flow, and an adaptive
eighth-order Dormand-Prince propagator (the DOP853 pair) that records every
accepted step.

The module is written so the exact same source runs either interpreted
(pure NumPy/Python) or compiled by numba in nopython mode;
``ncorbit._kernels.load_kernels`` picks the execution mode and rebinds the
names below inside a fresh module instance.  Keep this file free of
anything numba cannot compile: no exceptions, no dataclasses, no closures.

State layout is a flat float64 vector y = [x0, x1, x2, p0, p1, p2].
"""

import math

import numpy as np

# integrate_kernel status codes
STATUS_OK = 0
STATUS_BUFFER_FULL = 1
STATUS_SINGULARITY = 2
STATUS_STEP_COLLAPSE = 3

# step-controller constants (standard embedded-RK values)
_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_ERROR_EXPONENT = -1.0 / 8.0  # fifth-order estimator of an order-8 pair

# Dormand-Prince 8(5,3) tableau (Hairer, Norsett & Wanner).  The error is
# the combined third/fifth-order estimate of the original DOP853 code.
# The flow here is autonomous, so the stage-time nodes are not needed.
_DOP853_A = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328, -0.015319437748624402, 0.008273789163814023, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726, 27.59209969944671, 20.154067550477894, -43.48988418106996, 0.0, 0.0, 0.0, 0.0],
    [0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843, 21.230051448181193, 15.279233632882423, -33.28821096898486, -0.020331201708508627, 0.0, 0.0, 0.0],
    [-0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927, -18.52006565999696, 22.739487099350505, 2.4936055526796523, -3.0467644718982196, 0.0, 0.0],
    [2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625, -17.9589318631188, 27.94888452941996, -2.8589982771350235, -8.87285693353063, 12.360567175794303, 0.6433927460157636, 0.0],
])
_DOP853_B = np.array([
    0.054293734116568765, 0.0, 0.0, 0.0, 0.0, 4.450312892752409,
    1.8915178993145003, -5.801203960010585, 0.3111643669578199,
    -0.1521609496625161, 0.20136540080403034, 0.04471061572777259,
])
_DOP853_E3 = np.array([
    -0.18980075407240762, 0.0, 0.0, 0.0, 0.0, 4.450312892752409,
    1.8915178993145003, -5.801203960010585, -0.4226823213237919,
    -0.1521609496625161, 0.20136540080403034, 0.02265179219836082, 0.0,
])
_DOP853_E5 = np.array([
    0.01312004499419488, 0.0, 0.0, 0.0, 0.0, -1.2251564463762044,
    -0.4957589496572502, 1.6643771824549864, -0.35032884874997366,
    0.3341791187130175, 0.08192320648511571, -0.022355307863886294, 0.0,
])

_N_STAGES = 12


def hamiltonian_kernel(y, m, k, theta_sq, eta_sq):
    """Effective Hamiltonian:
    p^2/2m - mk/r + eta_sq*r^2/(12m) - theta_sq*mk*L^2/(8r^5)
      + theta_sq*mk*p^2/(12r^3),  with L^2 = r^2 p^2 - (x.p)^2.
    """
    x0 = y[0]; x1 = y[1]; x2 = y[2]
    p0 = y[3]; p1 = y[4]; p2 = y[5]
    r2 = x0 * x0 + x1 * x1 + x2 * x2
    r = math.sqrt(r2)
    psq = p0 * p0 + p1 * p1 + p2 * p2
    s = x0 * p0 + x1 * p1 + x2 * p2
    l2 = r2 * psq - s * s
    r3 = r2 * r
    r5 = r3 * r2
    return (0.5 * psq / m
            - m * k / r
            + eta_sq * r2 / (12.0 * m)
            - theta_sq * m * k * l2 / (8.0 * r5)
            + theta_sq * m * k * psq / (12.0 * r3))


def rhs_kernel(y, out, m, k, theta_sq, eta_sq):
    """Hamilton's equations for the effective Hamiltonian.

    L^2 is the dynamical function r^2 p^2 - (x.p)^2, differentiated through
    both x and p.  Collecting terms, the flow is linear in (x, p) with
    state-dependent coefficients:

        dx/dt = [1/m - c/(12 r^3)] p + [c s/(4 r^5)] x
        dp/dt = [-mk/r^3 - eta_sq/(6m) + c p^2/(2 r^5) - 5 c L^2/(8 r^7)] x
                - [c s/(4 r^5)] p

    with c = theta_sq*m*k and s = x.p.
    """
    x0 = y[0]; x1 = y[1]; x2 = y[2]
    p0 = y[3]; p1 = y[4]; p2 = y[5]
    r2 = x0 * x0 + x1 * x1 + x2 * x2
    r = math.sqrt(r2)
    psq = p0 * p0 + p1 * p1 + p2 * p2
    s = x0 * p0 + x1 * p1 + x2 * p2
    l2 = r2 * psq - s * s
    r3 = r2 * r
    r5 = r3 * r2
    r7 = r5 * r2
    c = theta_sq * m * k
    cross = 0.25 * c * s / r5
    coef_p = 1.0 / m - c / (12.0 * r3)
    coef_x = (-m * k / r3
              - eta_sq / (6.0 * m)
              + 0.5 * c * psq / r5
              - 0.625 * c * l2 / r7)
    out[0] = coef_p * p0 + cross * x0
    out[1] = coef_p * p1 + cross * x1
    out[2] = coef_p * p2 + cross * x2
    out[3] = coef_x * x0 - cross * p0
    out[4] = coef_x * x1 - cross * p1
    out[5] = coef_x * x2 - cross * p2


def _initial_step(y, f0, m, k, theta_sq, eta_sq, tol, x_ref, p_ref, h_max):
    """Hairer-style starting step from the first two derivative samples."""
    d0 = 0.0
    d1 = 0.0
    for c in range(6):
        ref = x_ref if c < 3 else p_ref
        sc = tol * (ref + abs(y[c]))
        d0 += (y[c] / sc) ** 2
        d1 += (f0[c] / sc) ** 2
    d0 = math.sqrt(d0 / 6.0)
    d1 = math.sqrt(d1 / 6.0)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    y1 = np.empty(6)
    f1 = np.empty(6)
    for c in range(6):
        y1[c] = y[c] + h0 * f0[c]
    rhs_kernel(y1, f1, m, k, theta_sq, eta_sq)
    d2 = 0.0
    for c in range(6):
        ref = x_ref if c < 3 else p_ref
        sc = tol * (ref + abs(y[c]))
        d2 += ((f1[c] - f0[c]) / sc) ** 2
    d2 = math.sqrt(d2 / 6.0) / h0
    dm = max(d1, d2)
    if dm <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / dm) ** 0.125
    h = min(100.0 * h0, h1)
    if h > h_max:
        h = h_max
    return h


def integrate_kernel(y0, t0, t_end, m, k, theta_sq, eta_sq, tol,
                     x_ref, p_ref, h_max, h_min, r_min, out_t, out_y):
    """Propagate the effective flow, storing every accepted step.

    Error control: weighted RMS with scale tol*(ref + |y|) per component and
    the DOP853 combined 3rd/5th-order estimate; a step is accepted when the
    norm is < 1.  Returns (n_samples, status, n_accepted, n_rejected).
    """
    cap = out_t.shape[0]
    K = np.empty((_N_STAGES + 1, 6))
    ytmp = np.empty(6)
    ynew = np.empty(6)
    y = np.empty(6)
    for c in range(6):
        y[c] = y0[c]

    out_t[0] = t0
    for c in range(6):
        out_y[0, c] = y[c]
    n = 1
    n_accepted = 0
    n_rejected = 0

    r2_min = r_min * r_min
    t = t0
    rhs_kernel(y, K[0], m, k, theta_sq, eta_sq)
    h = _initial_step(y, K[0], m, k, theta_sq, eta_sq, tol, x_ref, p_ref, h_max)
    just_rejected = False

    while t < t_end:
        if h < h_min:
            # a controller stalled while diving toward the center is a
            # singularity approach, not a generic step failure
            r2_here = y[0] * y[0] + y[1] * y[1] + y[2] * y[2]
            if r2_here < 1e4 * r2_min:
                return n, STATUS_SINGULARITY, n_accepted, n_rejected
            return n, STATUS_STEP_COLLAPSE, n_accepted, n_rejected
        if h > h_max:
            h = h_max
        t_new = t + h
        if t_new > t_end:
            t_new = t_end
            h = t_new - t

        # stages 1..11 (stage 0 is the stored derivative at y)
        for i in range(1, _N_STAGES):
            for c in range(6):
                acc = 0.0
                for j in range(i):
                    aij = _DOP853_A[i, j]
                    if aij != 0.0:
                        acc += aij * K[j, c]
                ytmp[c] = y[c] + h * acc
            rhs_kernel(ytmp, K[i], m, k, theta_sq, eta_sq)

        for c in range(6):
            acc = 0.0
            for j in range(_N_STAGES):
                bj = _DOP853_B[j]
                if bj != 0.0:
                    acc += bj * K[j, c]
            ynew[c] = y[c] + h * acc
        rhs_kernel(ynew, K[_N_STAGES], m, k, theta_sq, eta_sq)

        err3 = 0.0
        err5 = 0.0
        for c in range(6):
            ref = x_ref if c < 3 else p_ref
            ay = abs(y[c])
            an = abs(ynew[c])
            sc = tol * (ref + (ay if ay > an else an))
            e3 = 0.0
            e5 = 0.0
            for j in range(_N_STAGES + 1):
                w3 = _DOP853_E3[j]
                if w3 != 0.0:
                    e3 += w3 * K[j, c]
                w5 = _DOP853_E5[j]
                if w5 != 0.0:
                    e5 += w5 * K[j, c]
            e3 /= sc
            e5 /= sc
            err3 += e3 * e3
            err5 += e5 * e5

        if err3 == 0.0 and err5 == 0.0:
            err_norm = 0.0
        else:
            err_norm = abs(h) * err5 / math.sqrt((err5 + 0.01 * err3) * 6.0)

        if err_norm < 1.0:
            # accepted
            rnew2 = ynew[0] * ynew[0] + ynew[1] * ynew[1] + ynew[2] * ynew[2]
            if rnew2 < r2_min:
                return n, STATUS_SINGULARITY, n_accepted, n_rejected
            t = t_new
            for c in range(6):
                y[c] = ynew[c]
                K[0, c] = K[_N_STAGES, c]
            if n >= cap:
                return n, STATUS_BUFFER_FULL, n_accepted, n_rejected
            out_t[n] = t
            for c in range(6):
                out_y[n, c] = y[c]
            n += 1
            n_accepted += 1
            if err_norm == 0.0:
                factor = _MAX_FACTOR
            else:
                factor = _SAFETY * err_norm ** _ERROR_EXPONENT
                if factor > _MAX_FACTOR:
                    factor = _MAX_FACTOR
            if just_rejected and factor > 1.0:
                factor = 1.0
            just_rejected = False
            h = h * factor
        else:
            n_rejected += 1
            just_rejected = True
            if err_norm != err_norm:  # NaN from a wild trial step
                factor = _MIN_FACTOR
            else:
                factor = _SAFETY * err_norm ** _ERROR_EXPONENT
                if factor < _MIN_FACTOR:
                    factor = _MIN_FACTOR
            h = h * factor

    return n, STATUS_OK, n_accepted, n_rejected
