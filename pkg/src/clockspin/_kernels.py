"""Hot loops for the relaxation and Laplace solvers.

Compiled with numba when available; the callers fall back to vectorized
numpy otherwise.  Within one checkerboard color no two sites interact, so
the sequential in-place pass equals the simultaneous update and both
paths are deterministic.
"""

import math

try:
    from numba import njit
except ImportError:      # pragma: no cover - numba is an optional speedup
    njit = None

HAVE_NUMBA = njit is not None

if HAVE_NUMBA:

    @njit(cache=True)
    def _spin_color_pass(X, Y, mask):
        ni, nj = X.shape
        tmax = 0.0
        for i in range(1, ni - 1):
            for j in range(1, nj - 1):
                if mask[i, j]:
                    sx = X[i + 1, j] + X[i - 1, j] + X[i, j + 1] + X[i, j - 1]
                    sy = Y[i + 1, j] + Y[i - 1, j] + Y[i, j + 1] + Y[i, j - 1]
                    nrm = math.sqrt(sx * sx + sy * sy)
                    if nrm > 0.0:
                        nx = sx / nrm
                        ny = sy / nrm
                        cx = X[i, j]
                        cy = Y[i, j]
                        dot = cx * nx + cy * ny
                        cross = abs(cx * ny - cy * nx)
                        denom = 1.0 + dot
                        # tan of the half update angle; monotone on [0, pi]
                        t = cross / denom if denom > 1e-12 else 1.0e300
                        if t > tmax:
                            tmax = t
                        X[i, j] = nx
                        Y[i, j] = ny
        return tmax

    @njit(cache=True)
    def spin_sweep(X, Y, mask0, mask1):
        t0 = _spin_color_pass(X, Y, mask0)
        t1 = _spin_color_pass(X, Y, mask1)
        t = t0 if t0 > t1 else t1
        return 2.0 * math.atan(t)

    @njit(cache=True)
    def _sor_color_pass(V, mask, omega):
        ni, nj = V.shape
        for i in range(1, ni - 1):
            for j in range(1, nj - 1):
                if mask[i, j]:
                    avg = 0.25 * (V[i + 1, j] + V[i - 1, j] + V[i, j + 1] + V[i, j - 1])
                    V[i, j] += omega * (avg - V[i, j])

    @njit(cache=True)
    def sor_sweep(V, mask0, mask1, omega):
        _sor_color_pass(V, mask0, omega)
        _sor_color_pass(V, mask1, omega)

    @njit(cache=True)
    def laplace_residual(V, unknown):
        ni, nj = V.shape
        worst = 0.0
        for i in range(1, ni - 1):
            for j in range(1, nj - 1):
                if unknown[i, j]:
                    avg = 0.25 * (V[i + 1, j] + V[i - 1, j] + V[i, j + 1] + V[i, j - 1])
                    d = abs(avg - V[i, j])
                    if d > worst:
                        worst = d
        return worst

else:                    # pragma: no cover - exercised only without numba
    spin_sweep = None
    sor_sweep = None
    laplace_residual = None
