# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the energy and area kernels."""

from libc.math cimport sqrt


def energy_grad(double[:, ::1] P, long[::1] sa, long[::1] sb, double[::1] w, double[:, ::1] grad):
    cdef Py_ssize_t i, n = sa.shape[0]
    cdef long a, b
    cdef double dx, dy, L, s, F = 0.0
    grad[:, :] = 0.0
    for i in range(n):
        a = sa[i]
        b = sb[i]
        dx = P[b, 0] - P[a, 0]
        dy = P[b, 1] - P[a, 1]
        L = sqrt(dx * dx + dy * dy)
        F += w[i] * L
        s = w[i] / L
        grad[b, 0] += s * dx
        grad[b, 1] += s * dy
        grad[a, 0] -= s * dx
        grad[a, 1] -= s * dy
    return F


def energy(double[:, ::1] P, long[::1] sa, long[::1] sb, double[::1] w):
    cdef Py_ssize_t i, n = sa.shape[0]
    cdef double dx, dy, F = 0.0
    for i in range(n):
        dx = P[sb[i], 0] - P[sa[i], 0]
        dy = P[sb[i], 1] - P[sa[i], 1]
        F += w[i] * sqrt(dx * dx + dy * dy)
    return F


def area_grad(double[:, ::1] P, long[::1] loop, long[::1] nxt, long[::1] prv, double[:, ::1] grad):
    cdef Py_ssize_t k, n = loop.shape[0]
    cdef long i, j, h
    cdef double A = 0.0
    grad[:, :] = 0.0
    for k in range(n):
        i = loop[k]
        j = loop[nxt[k]]
        h = loop[prv[k]]
        A += P[i, 0] * (P[j, 1] - P[h, 1])
        grad[i, 0] += 0.5 * (P[j, 1] - P[h, 1])
        grad[i, 1] += 0.5 * (P[h, 0] - P[j, 0])
    return 0.5 * A


def area(double[:, ::1] P, long[::1] loop, long[::1] nxt, long[::1] prv):
    # x_i (y_next - y_prev) form: no cancellation for small loops far from 0
    cdef Py_ssize_t k, n = loop.shape[0]
    cdef double A = 0.0
    for k in range(n):
        A += P[loop[k], 0] * (P[loop[nxt[k]], 1] - P[loop[prv[k]], 1])
    return 0.5 * A
