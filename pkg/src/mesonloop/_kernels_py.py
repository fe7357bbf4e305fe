"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``."""
import math

import numpy as np


def rk4_forced_oscillator(omega, h, acc, vel, disp, forcing, q0, v0):
    """Classic RK4 for ``q'' + omega^2 q = -acc`` plus running integrals.

    The forcing arrays are sampled on the half-step grid ``t0 + j h / 2``
    (length 2n + 1).  Returns ``(q, q_dot, int forcing, int vel^2,
    int (q_dot^2 - omega^2 q^2), int disp)`` over the n steps.
    """
    n = (len(acc) - 1) // 2
    w2 = omega * omega
    q, v = float(q0), float(v0)
    acc = np.asarray(acc, dtype=float).tolist()
    qq_terms = []
    for i in range(n):
        j = 2 * i
        k1q = v
        k1v = -w2 * q - acc[j]
        g1 = v * v - w2 * q * q
        qs = q + 0.5 * h * k1q
        vs = v + 0.5 * h * k1v
        k2q = vs
        k2v = -w2 * qs - acc[j + 1]
        g2 = vs * vs - w2 * qs * qs
        qs = q + 0.5 * h * k2q
        vs = v + 0.5 * h * k2v
        k3q = vs
        k3v = -w2 * qs - acc[j + 1]
        g3 = vs * vs - w2 * qs * qs
        qs = q + h * k3q
        vs = v + h * k3v
        k4q = vs
        k4v = -w2 * qs - acc[j + 2]
        g4 = vs * vs - w2 * qs * qs
        q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        qq_terms.append(h / 6.0 * (g1 + 2.0 * g2 + 2.0 * g3 + g4))

    def simpson_steps(y):
        y = np.asarray(y, dtype=float)
        return math.fsum((h / 6.0) * (y[:-2:2] + 4.0 * y[1:-1:2] + y[2::2]))

    vel = np.asarray(vel, dtype=float)
    return (
        q,
        v,
        simpson_steps(forcing),
        simpson_steps(vel * vel),
        math.fsum(qq_terms),
        simpson_steps(disp),
    )


def apply_quadratic_phase(psi, x, center, a, b):
    """In place: ``psi *= exp(-i (a (x - center)^2 + b x))``."""
    y = x - center
    psi *= np.exp(-1j * (a * y * y + b * x))
