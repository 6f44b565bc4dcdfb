"""Compiled inner loops for the interval-error sweeps and the exact DP.

Both kernels stream over right endpoints b and maintain one growing-interval
state per live start a: the accumulated Gram matrix, the running inverse of
the ridge-stabilized Gram (rank-one updated, periodically rebuilt from the
accumulated Gram to stop floating-point drift), the feature/response cross
vector and the response energy. Interval costs are evaluated with the exact
three-term residual form ``y'y - 2 th'b + th'G th`` so they are true squared
residuals of the computed coefficients, never an algebraic shortcut.

Intervals shorter than d+1 points are costed by a direct ridge solve with a
few defect-correction steps toward the unregularized normal equations; the
same refinement keeps near-singular short intervals at the accuracy of an
exact least-squares solve.
"""

import numpy as np
from numba import njit

# Rebuild the running inverse from the accumulated Gram every this many
# rank-one updates; bounds drift without changing the asymptotic cost.
REFRESH_EVERY = 256
# Defect-correction steps toward the unregularized normal equations.
REFINE_STEPS = 3


@njit(cache=True)
def _absorb(G, P, bv, yy, a, xb, yb, cnt, d, lam, eye, u, th):
    """Absorb row (xb, yb) into state a and return its interval cost."""
    for r in range(d):
        xr = xb[r]
        bv[a, r] += yb * xr
        for c in range(d):
            G[a, r, c] += xr * xb[c]
    yy[a] += yb * yb
    if cnt <= d:
        Gr = G[a] + lam * eye
        z = np.linalg.solve(Gr, bv[a].copy())
        for _ in range(REFINE_STEPS):
            z = z + np.linalg.solve(Gr, bv[a] - G[a] @ z)
        for r in range(d):
            th[r] = z[r]
        if cnt == d:
            P[a] = np.linalg.inv(Gr)
    else:
        if (cnt - d) % REFRESH_EVERY == 0:
            P[a] = np.linalg.inv(G[a] + lam * eye)
        else:
            for r in range(d):
                s = 0.0
                for c in range(d):
                    s += P[a, r, c] * xb[c]
                u[r] = s
            den = 1.0
            for r in range(d):
                den += u[r] * xb[r]
            for r in range(d):
                ur = u[r] / den
                for c in range(d):
                    P[a, r, c] -= ur * u[c]
            for r in range(d):
                for c in range(r):
                    m = 0.5 * (P[a, r, c] + P[a, c, r])
                    P[a, r, c] = m
                    P[a, c, r] = m
        for r in range(d):
            s = 0.0
            for c in range(d):
                s += P[a, r, c] * bv[a, c]
            th[r] = s
    J = yy[a]
    for r in range(d):
        J -= 2.0 * th[r] * bv[a, r]
        s = 0.0
        for c in range(d):
            s += G[a, r, c] * th[c]
        J += th[r] * s
    if J < 0.0:
        J = 0.0
    return J


@njit(cache=True)
def dp_kernel(X, y, k, lam):
    """Fill the DP value table A and predecessor table back.

    A[i][j] is the best total squared residual of a j-piece fit to the first
    i rows; back[i][j] is the start index of its final piece. Ties pick the
    smallest predecessor. Interval costs are produced column by column while
    sweeping the right endpoint, so no n-by-n table is ever materialized.
    """
    n, d = X.shape
    G = np.zeros((n, d, d))
    P = np.zeros((n, d, d))
    bv = np.zeros((n, d))
    yy = np.zeros(n)
    col = np.zeros(n)
    u = np.zeros(d)
    th = np.zeros(d)
    eye = np.eye(d)
    A = np.full((n + 1, k + 1), np.inf)
    A[0, 0] = 0.0
    back = np.zeros((n + 1, k + 1), np.int64)
    for b in range(1, n + 1):
        xb = X[b - 1]
        yb = y[b - 1]
        for a in range(b):
            col[a] = _absorb(G, P, bv, yy, a, xb, yb, b - a, d, lam, eye, u, th)
        for a in range(b):
            ca = col[a]
            for j in range(1, k + 1):
                v = A[a, j - 1] + ca
                if v < A[b, j]:
                    A[b, j] = v
                    back[b, j] = a
    return A, back


@njit(cache=True)
def table_kernel(X, y, lam):
    """Compute every interval cost err(a, b), 0 <= a < b <= n.

    Returns a flat array in row-per-start layout: the costs for start a
    occupy the slice [offsets[a], offsets[a+1]) and hold err(a, a+1..n).
    """
    n, d = X.shape
    G = np.zeros((n, d, d))
    P = np.zeros((n, d, d))
    bv = np.zeros((n, d))
    yy = np.zeros(n)
    u = np.zeros(d)
    th = np.zeros(d)
    eye = np.eye(d)
    offsets = np.zeros(n + 1, np.int64)
    for a in range(n):
        offsets[a + 1] = offsets[a] + (n - a)
    flat = np.zeros(offsets[n])
    for b in range(1, n + 1):
        xb = X[b - 1]
        yb = y[b - 1]
        for a in range(b):
            flat[offsets[a] + (b - a - 1)] = _absorb(
                G, P, bv, yy, a, xb, yb, b - a, d, lam, eye, u, th
            )
    return flat, offsets
