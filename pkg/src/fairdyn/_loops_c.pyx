# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of the pure-Python trajectory kernel.

Mirrors _loops_py operation for operation; either backend must produce
bit-identical trajectories. The build disables floating-point contraction so
the arithmetic matches the interpreter's strict IEEE evaluation order.
"""

BACKEND = "compiled"


cdef int _deriv(int mode, double xa, double xb, double ga, double u0, double u1,
                bint use_affine, double a0, double c0, double d0,
                double a1, double c1, double d1, object f0, object f1,
                double* out) except -1:
    """Joint derivative at (xa, xb); returns the number of clamp events."""
    cdef double t1a, t0a, t1b, t0b
    cdef double t1_adv, t0_adv, t1_dis, t0_dis
    cdef double pi_adv, pi_dis, g_adv, s
    cdef double b0a, b1a, b0b, b1b
    cdef double f1a, f0a, f1b, f0b
    cdef bint adv_is_a
    cdef int case
    cdef int clamps = 0

    if xa < 0.0:
        xa = 0.0
    elif xa > 1.0:
        xa = 1.0
    if xb < 0.0:
        xb = 0.0
    elif xb > 1.0:
        xb = 1.0

    if mode == 0:
        t1a = 1.0
        t0a = 0.0
        t1b = 1.0
        t0b = 0.0
    else:
        adv_is_a = xa >= xb
        if mode == 1:
            g_adv = ga if adv_is_a else 1.0 - ga
            s = g_adv * u1 + (1.0 - g_adv) * u0
            case = 1 if s < 0.0 else 2
        elif mode == 2:
            case = 1
        else:
            case = 2
        pi_adv = xa if adv_is_a else xb
        pi_dis = xb if adv_is_a else xa
        if case == 1:
            t1_adv = pi_dis / pi_adv if pi_adv > 0.0 else 1.0
            t0_adv = 0.0
            t1_dis = 1.0
            t0_dis = 0.0
        else:
            t1_adv = 1.0
            t0_adv = 0.0
            t1_dis = 1.0
            t0_dis = (pi_adv - pi_dis) / (1.0 - pi_dis) if pi_dis < 1.0 else 0.0
        if adv_is_a:
            t1a = t1_adv
            t0a = t0_adv
            t1b = t1_dis
            t0b = t0_dis
        else:
            t1a = t1_dis
            t0a = t0_dis
            t1b = t1_adv
            t0b = t0_adv

    b0a = t0a * (1.0 - xa)
    b1a = t1a * xa
    b0b = t0b * (1.0 - xb)
    b1b = t1b * xb
    if use_affine:
        f1a = a1 + c1 * b0a + d1 * b1a
        f0a = a0 + c0 * b0a + d0 * b1a
        f1b = a1 + c1 * b0b + d1 * b1b
        f0b = a0 + c0 * b0b + d0 * b1b
    else:
        f1a = f1(b0a, b1a)
        f0a = f0(b0a, b1a)
        f1b = f1(b0b, b1b)
        f0b = f0(b0b, b1b)
    if f1a < 0.0:
        f1a = 0.0
        clamps += 1
    elif f1a > 1.0:
        f1a = 1.0
        clamps += 1
    if f0a < 0.0:
        f0a = 0.0
        clamps += 1
    elif f0a > 1.0:
        f0a = 1.0
        clamps += 1
    if f1b < 0.0:
        f1b = 0.0
        clamps += 1
    elif f1b > 1.0:
        f1b = 1.0
        clamps += 1
    if f0b < 0.0:
        f0b = 0.0
        clamps += 1
    elif f0b > 1.0:
        f0b = 1.0
        clamps += 1
    out[0] = xa * (f1a - 1.0) + (1.0 - xa) * f0a
    out[1] = xb * (f1b - 1.0) + (1.0 - xb) * f0b
    return clamps


cdef int _deriv_merged(double x, bint use_affine, double a0, double c0, double d0,
                       double a1, double c1, double d1, object f0, object f1,
                       double* out) except -1:
    cdef double f1v, f0v
    cdef int clamps = 0
    if x < 0.0:
        x = 0.0
    elif x > 1.0:
        x = 1.0
    if use_affine:
        f1v = a1 + d1 * x
        f0v = a0 + d0 * x
    else:
        f1v = f1(0.0, x)
        f0v = f0(0.0, x)
    if f1v < 0.0:
        f1v = 0.0
        clamps += 1
    elif f1v > 1.0:
        f1v = 1.0
        clamps += 1
    if f0v < 0.0:
        f0v = 0.0
        clamps += 1
    elif f0v > 1.0:
        f0v = 1.0
        clamps += 1
    out[0] = x * (f1v - 1.0) + (1.0 - x) * f0v
    return clamps


def ct_loop(double pa, double pb, double ga, double u0, double u1, int mode,
            object f0, object f1, affine, double h, long n_steps,
            long sample_every, double merge_tol, double stop_tol):
    """Fixed-step classical RK4 over the joint two-group CT dynamics.

    Same contract as the pure backend: returns
    (samples, clamp_count, merge_step, stop_step).
    """
    cdef bint use_affine = affine is not None
    cdef double a0 = 0.0, c0 = 0.0, d0 = 0.0, a1 = 0.0, c1 = 0.0, d1 = 0.0
    if use_affine:
        a0, c0, d0, a1, c1, d1 = affine

    cdef int clamp_count = 0
    cdef bint merged = False
    cdef long merge_step = -1
    cdef long stop_step = -1
    cdef double pm
    cdef double half = 0.5 * h
    cdef double sixth = h / 6.0
    cdef double k1, k2, k3, k4
    cdef double k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b
    cdef double kk[2]
    cdef long step = 0

    samples = [(0, pa, pb)]

    while step < n_steps:
        if not merged and (pa - pb if pa >= pb else pb - pa) < merge_tol:
            merged = True
            merge_step = step
            pm = 0.5 * (pa + pb)
            pa = pm
            pb = pm
        if merged:
            clamp_count += _deriv_merged(pa, use_affine, a0, c0, d0, a1, c1, d1, f0, f1, kk)
            k1 = kk[0]
            if stop_tol > 0.0 and (k1 if k1 >= 0.0 else -k1) < stop_tol:
                stop_step = step
                break
            clamp_count += _deriv_merged(pa + half * k1, use_affine, a0, c0, d0, a1, c1, d1, f0, f1, kk)
            k2 = kk[0]
            clamp_count += _deriv_merged(pa + half * k2, use_affine, a0, c0, d0, a1, c1, d1, f0, f1, kk)
            k3 = kk[0]
            clamp_count += _deriv_merged(pa + h * k3, use_affine, a0, c0, d0, a1, c1, d1, f0, f1, kk)
            k4 = kk[0]
            pa = pa + sixth * (k1 + 2.0 * (k2 + k3) + k4)
            if pa < 0.0:
                pa = 0.0
            elif pa > 1.0:
                pa = 1.0
            pb = pa
        else:
            clamp_count += _deriv(mode, pa, pb, ga, u0, u1, use_affine,
                                  a0, c0, d0, a1, c1, d1, f0, f1, kk)
            k1a = kk[0]
            k1b = kk[1]
            if stop_tol > 0.0 and (k1a if k1a >= 0.0 else -k1a) < stop_tol \
                    and (k1b if k1b >= 0.0 else -k1b) < stop_tol:
                stop_step = step
                break
            clamp_count += _deriv(mode, pa + half * k1a, pb + half * k1b, ga, u0, u1,
                                  use_affine, a0, c0, d0, a1, c1, d1, f0, f1, kk)
            k2a = kk[0]
            k2b = kk[1]
            clamp_count += _deriv(mode, pa + half * k2a, pb + half * k2b, ga, u0, u1,
                                  use_affine, a0, c0, d0, a1, c1, d1, f0, f1, kk)
            k3a = kk[0]
            k3b = kk[1]
            clamp_count += _deriv(mode, pa + h * k3a, pb + h * k3b, ga, u0, u1,
                                  use_affine, a0, c0, d0, a1, c1, d1, f0, f1, kk)
            k4a = kk[0]
            k4b = kk[1]
            pa = pa + sixth * (k1a + 2.0 * (k2a + k3a) + k4a)
            pb = pb + sixth * (k1b + 2.0 * (k2b + k3b) + k4b)
            if pa < 0.0:
                pa = 0.0
            elif pa > 1.0:
                pa = 1.0
            if pb < 0.0:
                pb = 0.0
            elif pb > 1.0:
                pb = 1.0
        step += 1
        if step % sample_every == 0 or step == n_steps:
            samples.append((step, pa, pb))

    if stop_step >= 0 and samples[len(samples) - 1][0] != step:
        samples.append((step, pa, pb))

    return samples, clamp_count, merge_step, stop_step
