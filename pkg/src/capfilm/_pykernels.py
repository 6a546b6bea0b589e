"""Pure numpy kernels; reference implementation and import fallback."""

import numpy as np


def energy_grad(P, sa, sb, w, grad):
    """Weighted length and its gradient (written into ``grad``)."""
    d = P[sb] - P[sa]
    L = np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1])
    u = d * (w / L)[:, None]
    grad.fill(0.0)
    n = len(P)
    grad[:, 0] = np.bincount(sb, u[:, 0], n) - np.bincount(sa, u[:, 0], n)
    grad[:, 1] = np.bincount(sb, u[:, 1], n) - np.bincount(sa, u[:, 1], n)
    return float(np.dot(w, L))


def energy(P, sa, sb, w):
    d = P[sb] - P[sa]
    return float(np.dot(w, np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1])))


def area_grad(P, loop, nxt, prv, grad):
    """Shoelace area of the loops and its gradient.

    ``loop`` lists point indices of all loops back to back; ``nxt`` and
    ``prv`` give, for each position, the position of the cyclic successor
    and predecessor within its loop.
    """
    x = P[loop, 0]
    y = P[loop, 1]
    A = 0.5 * float(np.dot(x, y[nxt] - y[prv]))
    grad.fill(0.0)
    n = len(P)
    gx = 0.5 * (y[nxt] - y[prv])
    gy = 0.5 * (x[prv] - x[nxt])
    grad[:, 0] = np.bincount(loop, gx, n)
    grad[:, 1] = np.bincount(loop, gy, n)
    return A


def area(P, loop, nxt, prv):
    x = P[loop, 0]
    y = P[loop, 1]
    return 0.5 * float(np.dot(x, y[nxt] - y[prv]))
