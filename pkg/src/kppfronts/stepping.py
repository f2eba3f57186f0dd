"""Time-stepping backends and step-size rules.

The hot kernels exist twice: a compiled Cython module (_stepping_cy) and a
numpy/scipy fallback (_stepping_np) with identical semantics.  The compiled
module is used when it imports; set KPPFRONTS_DISABLE_EXT=1 to force the
fallback.  Both advance the same discretization: second-order centered
diffusion with reflecting (Neumann) ends, reaction f(u) = Mu + u - u*(Cu).

Schemes:

* "imex": reaction explicit, diffusion implicit (backward Euler on the
  tridiagonal operator).  Unconditionally stable in the diffusion; dt is
  limited only by the reaction, so it is independent of dx.
* "rk4": classical Runge-Kutta on the full right-hand side.  dt must
  resolve the explicit diffusion limit dx^2 / (2 d_max); we keep a margin.
"""

from __future__ import annotations

import os

import numpy as np

from . import _stepping_np

_FORCE_FALLBACK = os.environ.get("KPPFRONTS_DISABLE_EXT", "").strip() not in ("", "0")

if _FORCE_FALLBACK:
    _DEFAULT_IMPL = _stepping_np
    BACKEND = "numpy"
else:
    try:
        from . import _stepping_cy

        _DEFAULT_IMPL = _stepping_cy
        BACKEND = "compiled"
    except ImportError:
        _DEFAULT_IMPL = _stepping_np
        BACKEND = "numpy"


def backend_name() -> str:
    """Name of the kernel backend in use: "compiled" or "numpy"."""
    return BACKEND


def available_backends() -> dict:
    """Importable backend modules keyed by name."""
    out = {"numpy": _stepping_np}
    try:
        from . import _stepping_cy

        out["compiled"] = _stepping_cy
    except ImportError:
        pass
    return out


def stable_dt(spec, dx: float, scheme: str, sup_u: float = 1.0) -> float:
    """Step size that keeps the given scheme stable.

    For "imex" the implicit diffusion imposes no limit; the explicit
    reaction does.  Its Jacobian norm is bounded by 1 + ||M|| plus the
    competition term, which grows with the solution sup, hence the sup_u
    argument (pass the largest value the run is expected to reach).

    For "rk4" the diffusion limit dominates for any dx of interest.
    """
    if scheme == "imex":
        norm_m = float(np.linalg.norm(spec.M, 2))
        rate = 1.0 + norm_m + spec.n * float(spec.C.max()) * max(float(sup_u), 1.0)
        return 0.5 / rate
    if scheme == "rk4":
        return 0.4 * dx * dx / float(spec.d.max())
    raise ValueError(f"unknown scheme {scheme!r}; expected 'imex' or 'rk4'")


class Stepper:
    """Advances a (n, nx) field in place with a fixed step size.

    The field must be C-contiguous float64; pass a writable array and keep
    using it between calls.  `impl` overrides the backend module (used by
    the equivalence tests and the benchmark).
    """

    def __init__(self, spec, dx: float, nx: int, dt: float, scheme: str = "imex",
                 impl=None):
        if dt <= 0:
            raise ValueError("dt must be positive")
        if nx < 3:
            raise ValueError("need at least 3 grid points")
        self.spec = spec
        self.dx = float(dx)
        self.nx = int(nx)
        self.dt = float(dt)
        self.scheme = scheme
        self._impl = impl if impl is not None else _DEFAULT_IMPL
        # spec arrays are read-only; the kernels want writable contiguous copies
        self._M = np.array(spec.M, dtype=np.float64, order="C")
        self._C = np.array(spec.C, dtype=np.float64, order="C")
        self._d = np.array(spec.d, dtype=np.float64)
        if scheme == "imex":
            self._ws = self._impl.make_imex_workspace(self._d, self.dt, self.dx, self.nx)
        elif scheme == "rk4":
            self._ws = None
        else:
            raise ValueError(f"unknown scheme {scheme!r}; expected 'imex' or 'rk4'")

    def advance(self, u: np.ndarray, n_steps: int) -> np.ndarray:
        """Take n_steps of size dt, modifying u in place."""
        if u.shape != (self.spec.n, self.nx):
            raise ValueError(f"field shape {u.shape} does not match "
                             f"({self.spec.n}, {self.nx})")
        if n_steps <= 0:
            return u
        if self.scheme == "imex":
            return self._impl.imex_advance(u, int(n_steps), self.dt,
                                           self._M, self._C, self._ws)
        return self._impl.rk4_advance(u, int(n_steps), self.dt, self.dx,
                                      self._d, self._M, self._C)


def reaction_rate_dense(spec, u: np.ndarray) -> np.ndarray:
    """f(u) = Mu + u - u*(Cu) columnwise on a (n, nx) field."""
    mu = spec.M @ u
    cu = spec.C @ u
    return mu + u - u * cu
