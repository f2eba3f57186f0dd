"""Pure numpy/scipy stepping kernels (fallback backend).

Same operations as the compiled module kppfronts._stepping_cy: first-order
IMEX (explicit reaction, implicit diffusion through banded solves) and
classical RK4, both on fields stored as C-contiguous (n, n_points) arrays
with Neumann (ghost-point reflection) boundaries.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded


def make_imex_workspace(d, dt, dx, nx):
    """Banded matrices of (I - dt * d_i * Lx), grouped by equal diffusivity."""
    d = np.asarray(d, dtype=float)
    theta = dt * d / (dx * dx)
    groups = []
    for th in np.unique(theta):
        idx = np.flatnonzero(theta == th)
        ab = np.zeros((3, nx))
        ab[1, :] = 1.0 + 2.0 * th
        ab[0, 1] = -2.0 * th          # superdiagonal, reflected first row
        ab[0, 2:] = -th
        ab[2, : nx - 2] = -th
        ab[2, nx - 2] = -2.0 * th     # subdiagonal, reflected last row
        groups.append((idx, ab))
    return {"groups": groups}


def imex_advance(u, n_steps, dt, M, C, ws):
    """Advance u in place by n_steps of the IMEX scheme."""
    for _ in range(n_steps):
        cu = C @ u
        rhs = u + dt * (M @ u + u - u * cu)
        for idx, ab in ws["groups"]:
            u[idx, :] = solve_banded((1, 1), ab, rhs[idx].T,
                                     check_finite=False).T
    return u


def _rate(v, dxinv2, d, M, C, out):
    """out = D lap(v) + M v + v - v o (C v) with Neumann reflection."""
    out[:, 1:-1] = v[:, 2:] - 2.0 * v[:, 1:-1] + v[:, :-2]
    out[:, 0] = 2.0 * (v[:, 1] - v[:, 0])
    out[:, -1] = 2.0 * (v[:, -2] - v[:, -1])
    out *= d[:, None] * dxinv2
    out += M @ v + v - v * (C @ v)
    return out


def rk4_advance(u, n_steps, dt, dx, d, M, C):
    """Advance u in place by n_steps of classical RK4."""
    d = np.asarray(d, dtype=float)
    dxinv2 = 1.0 / (dx * dx)
    k1, k2, k3, k4 = (np.empty_like(u) for _ in range(4))
    stage = np.empty_like(u)
    for _ in range(n_steps):
        _rate(u, dxinv2, d, M, C, k1)
        np.multiply(k1, 0.5 * dt, out=stage); stage += u
        _rate(stage, dxinv2, d, M, C, k2)
        np.multiply(k2, 0.5 * dt, out=stage); stage += u
        _rate(stage, dxinv2, d, M, C, k3)
        np.multiply(k3, dt, out=stage); stage += u
        _rate(stage, dxinv2, d, M, C, k4)
        k2 += k3
        k1 += k4
        k1 += 2.0 * k2
        k1 *= dt / 6.0
        u += k1
    return u
