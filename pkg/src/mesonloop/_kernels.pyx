# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.  Keep signatures in sync with ``_kernels_py``."""
from libc.math cimport cos, sin


def rk4_forced_oscillator(double omega, double h,
                          const double[::1] acc, const double[::1] vel,
                          const double[::1] disp, const double[::1] forcing,
                          double q0, double v0):
    cdef Py_ssize_t n = (acc.shape[0] - 1) // 2
    cdef Py_ssize_t i, j
    cdef double w2 = omega * omega
    cdef double q = q0, v = v0
    cdef double k1q, k1v, k2q, k2v, k3q, k3v, k4q, k4v
    cdef double qs, vs, g1, g2, g3, g4, inc, y, tmp
    cdef double s_qq = 0.0, c_qq = 0.0
    cdef double s_f = 0.0, c_f = 0.0
    cdef double s_vv = 0.0, c_vv = 0.0
    cdef double s_d = 0.0, c_d = 0.0
    cdef double sixth = h / 6.0
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
        q = q + sixth * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        v = v + sixth * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        # compensated sums for the quadrature components
        inc = sixth * (g1 + 2.0 * g2 + 2.0 * g3 + g4)
        y = inc - c_qq
        tmp = s_qq + y
        c_qq = (tmp - s_qq) - y
        s_qq = tmp
        inc = sixth * (forcing[j] + 4.0 * forcing[j + 1] + forcing[j + 2])
        y = inc - c_f
        tmp = s_f + y
        c_f = (tmp - s_f) - y
        s_f = tmp
        inc = sixth * (vel[j] * vel[j] + 4.0 * vel[j + 1] * vel[j + 1] + vel[j + 2] * vel[j + 2])
        y = inc - c_vv
        tmp = s_vv + y
        c_vv = (tmp - s_vv) - y
        s_vv = tmp
        inc = sixth * (disp[j] + 4.0 * disp[j + 1] + disp[j + 2])
        y = inc - c_d
        tmp = s_d + y
        c_d = (tmp - s_d) - y
        s_d = tmp
    return q, v, s_f, s_vv, s_qq, s_d


def apply_quadratic_phase(double complex[::1] psi, const double[::1] x,
                          double center, double a, double b):
    cdef Py_ssize_t j, n = psi.shape[0]
    cdef double y, ph, c, s, re, im
    for j in range(n):
        y = x[j] - center
        ph = a * y * y + b * x[j]
        c = cos(ph)
        s = sin(ph)
        re = psi[j].real
        im = psi[j].imag
        psi[j] = (re * c + im * s) + 1j * (im * c - re * s)
