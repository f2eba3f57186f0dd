# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernels (preferred backend).

Same operations as kppfronts._stepping_np: first-order IMEX with the
tridiagonal diffusion systems factored once (Thomas algorithm; the matrices
are strictly diagonally dominant, so no pivoting is needed) and classical
RK4.  The reaction's matrix products go through BLAS dgemm on the
transposed (Fortran-order) views of the C-contiguous fields.
"""

import numpy as np

from scipy.linalg.cython_blas cimport dgemm


cdef inline void _right_mul(double* u, double* A, double* out,
                            int N, int nx) noexcept nogil:
    # out = A @ u for C-order (N, nx) fields: in Fortran terms out^T = u^T A^T
    cdef char t = b'N'
    cdef double one = 1.0, zero = 0.0
    cdef int m = nx, n = N, k = N
    dgemm(&t, &t, &m, &n, &k, &one, u, &m, A, &k, &zero, out, &m)


cdef inline void _thomas(double* rhs, double* x, double* sub, double* cp,
                         double* dinv, double* y, int nx) noexcept nogil:
    cdef int j
    y[0] = rhs[0] * dinv[0]
    for j in range(1, nx):
        y[j] = (rhs[j] - sub[j] * y[j - 1]) * dinv[j]
    x[nx - 1] = y[nx - 1]
    for j in range(nx - 2, -1, -1):
        x[j] = y[j] - cp[j] * x[j + 1]


def make_imex_workspace(d, double dt, double dx, int nx):
    """Per-component Thomas factors of (I - dt * d_i * Lx), Neumann rows."""
    d_arr = np.ascontiguousarray(d, dtype=np.float64)
    cdef double[::1] dv = d_arr
    cdef int N = dv.shape[0]
    sub_np = np.zeros((N, nx))
    cp_np = np.zeros((N, nx))
    dinv_np = np.zeros((N, nx))
    cdef double[:, ::1] sub = sub_np
    cdef double[:, ::1] cp = cp_np
    cdef double[:, ::1] dinv = dinv_np
    cdef int i, j
    cdef double th, diag, denom
    for i in range(N):
        th = dt * dv[i] / (dx * dx)
        diag = 1.0 + 2.0 * th
        for j in range(1, nx - 1):
            sub[i, j] = -th
        sub[i, nx - 1] = -2.0 * th
        dinv[i, 0] = 1.0 / diag
        cp[i, 0] = -2.0 * th * dinv[i, 0]
        for j in range(1, nx):
            denom = diag - sub[i, j] * cp[i, j - 1]
            dinv[i, j] = 1.0 / denom
            if j < nx - 1:
                cp[i, j] = -th * dinv[i, j]
    return {"sub": sub_np, "cp": cp_np, "dinv": dinv_np}


def imex_advance(u, int n_steps, double dt, M, C, ws):
    """Advance u in place by n_steps of the IMEX scheme."""
    cdef double[:, ::1] uv = u
    cdef double[:, ::1] Mv = M
    cdef double[:, ::1] Cv = C
    cdef double[:, ::1] sub = ws["sub"]
    cdef double[:, ::1] cp = ws["cp"]
    cdef double[:, ::1] dinv = ws["dinv"]
    cdef int N = uv.shape[0], nx = uv.shape[1]
    mu_np = np.empty((N, nx))
    cu_np = np.empty((N, nx))
    y_np = np.empty(nx)
    cdef double[:, ::1] mu = mu_np
    cdef double[:, ::1] cu = cu_np
    cdef double[::1] y = y_np
    cdef int s, i, j
    with nogil:
        for s in range(n_steps):
            _right_mul(&uv[0, 0], &Mv[0, 0], &mu[0, 0], N, nx)
            _right_mul(&uv[0, 0], &Cv[0, 0], &cu[0, 0], N, nx)
            for i in range(N):
                for j in range(nx):
                    mu[i, j] = uv[i, j] + dt * (mu[i, j] + uv[i, j]
                                                - uv[i, j] * cu[i, j])
                _thomas(&mu[i, 0], &uv[i, 0], &sub[i, 0], &cp[i, 0],
                        &dinv[i, 0], &y[0], nx)
    return u


cdef void _rate(double[:, ::1] v, double[::1] d, double dxinv2,
                double[:, ::1] M, double[:, ::1] C,
                double[:, ::1] mu, double[:, ::1] cu,
                double[:, ::1] out, int N, int nx) noexcept nogil:
    cdef int i, j
    cdef double lap
    _right_mul(&v[0, 0], &M[0, 0], &mu[0, 0], N, nx)
    _right_mul(&v[0, 0], &C[0, 0], &cu[0, 0], N, nx)
    for i in range(N):
        for j in range(nx):
            if j == 0:
                lap = 2.0 * (v[i, 1] - v[i, 0])
            elif j == nx - 1:
                lap = 2.0 * (v[i, nx - 2] - v[i, nx - 1])
            else:
                lap = v[i, j + 1] - 2.0 * v[i, j] + v[i, j - 1]
            out[i, j] = (d[i] * dxinv2 * lap
                         + mu[i, j] + v[i, j] - v[i, j] * cu[i, j])


def rk4_advance(u, int n_steps, double dt, double dx, d, M, C):
    """Advance u in place by n_steps of classical RK4."""
    cdef double[:, ::1] uv = u
    d_arr = np.ascontiguousarray(d, dtype=np.float64)
    cdef double[::1] dv = d_arr
    cdef double[:, ::1] Mv = M
    cdef double[:, ::1] Cv = C
    cdef int N = uv.shape[0], nx = uv.shape[1]
    cdef double dxinv2 = 1.0 / (dx * dx)
    kc_np = np.empty((N, nx)); acc_np = np.empty((N, nx))
    st_np = np.empty((N, nx)); mu_np = np.empty((N, nx)); cu_np = np.empty((N, nx))
    cdef double[:, ::1] kc = kc_np
    cdef double[:, ::1] acc = acc_np
    cdef double[:, ::1] st = st_np
    cdef double[:, ::1] mu = mu_np
    cdef double[:, ::1] cu = cu_np
    cdef int s, i, j
    cdef double half = 0.5 * dt, sixth = dt / 6.0
    with nogil:
        for s in range(n_steps):
            _rate(uv, dv, dxinv2, Mv, Cv, mu, cu, kc, N, nx)
            for i in range(N):
                for j in range(nx):
                    acc[i, j] = kc[i, j]
                    st[i, j] = uv[i, j] + half * kc[i, j]
            _rate(st, dv, dxinv2, Mv, Cv, mu, cu, kc, N, nx)
            for i in range(N):
                for j in range(nx):
                    acc[i, j] += 2.0 * kc[i, j]
                    st[i, j] = uv[i, j] + half * kc[i, j]
            _rate(st, dv, dxinv2, Mv, Cv, mu, cu, kc, N, nx)
            for i in range(N):
                for j in range(nx):
                    acc[i, j] += 2.0 * kc[i, j]
                    st[i, j] = uv[i, j] + dt * kc[i, j]
            _rate(st, dv, dxinv2, Mv, Cv, mu, cu, kc, N, nx)
            for i in range(N):
                for j in range(nx):
                    uv[i, j] += sixth * (acc[i, j] + kc[i, j])
    return u
