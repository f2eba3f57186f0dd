"""Spatially homogeneous equilibria of the reaction term

    F(u) = M u + u - u o (C u)

via damped Newton iteration, deterministic multistart enumeration, and
one-parameter bifurcation scans for the two-component symmetric family.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral_core import (ComplexSpectrum, SystemSpec, family_n2,
                            family_n2_linearization, spectrum)

NEWTON_FLOOR = 1e-12       # iterates are kept this far off the boundary
POSITIVE_MIN = 1e-6        # classification threshold: positive vs boundary root
MAX_HALVINGS = 40


def reaction(spec: SystemSpec, u):
    """F(u) = M u + u - u o (C u) for a state vector u."""
    u = np.asarray(u, dtype=float)
    return spec.M @ u + u - u * (spec.C @ u)


def reaction_jacobian(spec: SystemSpec, u):
    """dF/du = M + I - diag(C u) - diag(u) C."""
    u = np.asarray(u, dtype=float)
    n = spec.n
    return spec.M + np.eye(n) - np.diag(spec.C @ u) - u[:, None] * spec.C


@dataclass(frozen=True)
class Equilibrium:
    """A verified root of F with its linearization spectrum.

    ``positive`` distinguishes genuinely positive equilibria from boundary
    roots (components stuck at the Newton floor, e.g. the origin).
    """

    u: np.ndarray
    residual: float
    jacobian_spectrum: ComplexSpectrum
    stable: bool

    @property
    def positive(self) -> bool:
        return bool(self.u.min() > POSITIVE_MIN)


@dataclass
class NewtonResult:
    """Outcome record of one damped Newton run (divergence is a report,
    not an exception)."""

    success: bool
    u: np.ndarray
    residual: float
    iterations: int
    message: str
    equilibrium: Equilibrium | None = None


def _equilibrium_from_root(spec, u, residual):
    spec_j = spectrum(reaction_jacobian(spec, u))
    return Equilibrium(u=u.copy(), residual=float(residual),
                       jacobian_spectrum=spec_j,
                       stable=bool(spec_j.max_real < 0.0))


def newton_equilibrium(spec: SystemSpec, u0, tol=1e-10, max_iter=60) -> NewtonResult:
    """Damped Newton for F(u) = 0 from a nonnegative start.

    Steps are halved (up to 40 times) until the iterate stays positive and
    the sup-norm residual decreases; components are floored at 1e-12 so
    boundary roots are approached without leaving the domain of F's
    logarithmic diagnostics.  A singular Jacobian falls back to a
    least-squares step before declaring divergence.
    """
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (spec.n,):
        raise ValueError(f"u0 must have shape ({spec.n},)")
    if not np.all(np.isfinite(u0)) or np.any(u0 < 0):
        raise ValueError("u0 must be finite and nonnegative")
    u = np.maximum(u0, NEWTON_FLOOR)
    res = float(np.abs(reaction(spec, u)).max())
    for it in range(1, max_iter + 1):
        if res <= tol:
            return NewtonResult(True, u, res, it - 1, "converged",
                                _equilibrium_from_root(spec, u, res))
        F = reaction(spec, u)
        J = reaction_jacobian(spec, u)
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(J, -F, rcond=None)
        alpha = 1.0
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            trial = u + alpha * step
            if trial.min() > 0.0:
                trial_res = float(np.abs(reaction(spec, trial)).max())
                if np.isfinite(trial_res) and trial_res < res:
                    u = np.maximum(trial, NEWTON_FLOOR)
                    res = trial_res
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            return NewtonResult(False, u, res, it,
                                "step damping exhausted (40 halvings)")
    if res <= tol:
        return NewtonResult(True, u, res, max_iter, "converged",
                            _equilibrium_from_root(spec, u, res))
    return NewtonResult(False, u, res, max_iter,
                        f"no convergence in {max_iter} iterations")


def _default_starts(n):
    starts = [np.ones(n)]
    for k in range(n):  # the n placements of a dominant component
        v = np.full(n, 0.1)
        v[k] = 2.0
        starts.append(v)
    return starts


def find_all_equilibria(spec: SystemSpec, n_starts=64, seed=0, tol=1e-10,
                        dedup_tol=1e-6, return_boundary=False):
    """Multistart Newton enumeration of the reaction's equilibria.

    Starts are 1, the n placements of (2, 0.1, ..., 0.1), and ``n_starts``
    log-uniform samples of [1e-3, 10]^n drawn from a PCG64 generator seeded
    with ``seed``.  Converged roots are re-verified, sorted by their entries,
    and deduplicated at sup-distance ``dedup_tol``.  Boundary roots (some
    component at or below the positivity threshold, e.g. the origin) are
    excluded from the returned list; pass return_boundary=True to get them
    as a second list.
    """
    rng = np.random.default_rng(seed)
    n = spec.n
    lo, hi = np.log(1e-3), np.log(10.0)
    starts = _default_starts(n)
    starts.extend(np.exp(rng.uniform(lo, hi, size=(int(n_starts), n))))
    roots = []
    for u0 in starts:
        result = newton_equilibrium(spec, u0, tol=tol)
        if not result.success:
            continue
        if float(np.abs(reaction(spec, result.u)).max()) > tol:
            continue
        roots.append(result.u)
    # deterministic merge: sort by entries, then greedy dedup in sup norm
    roots.sort(key=lambda u: tuple(u))
    kept = []
    for u in roots:
        if all(np.abs(u - v).max() > dedup_tol for v in kept):
            kept.append(u)
    equilibria = [_equilibrium_from_root(spec, u, np.abs(reaction(spec, u)).max())
                  for u in kept]
    positive = [e for e in equilibria if e.positive]
    boundary = [e for e in equilibria if not e.positive]
    if return_boundary:
        return positive, boundary
    return positive


@dataclass(frozen=True)
class BifurcationDiagram:
    """Equilibrium count and linear stability of 1 along a sigma sweep of the
    two-component family at fixed gamma."""

    gamma: float
    parameter_name: str
    samples: np.ndarray                 # strictly increasing sigma values
    counts: np.ndarray                  # positive equilibria per sample
    growth_eigenvalues: np.ndarray      # largest eigenvalue of M - C at 1
    one_is_stable: np.ndarray           # growth eigenvalue < 0
    branches: list                      # list per sample of Equilibrium
    thresholds: list                    # sign-change locations of the growth mode


def bifurcation_scan_n2(gamma, sigma_range, n_samples, seed=0, tol=1e-10,
                        threshold_tol=1e-8) -> BifurcationDiagram:
    """Sweep sigma at fixed gamma, recording equilibria and the linearization
    at 1 (direct 2x2 eigendecomposition), and bisect every sign change of the
    growth eigenvalue.

    The growth eigenvalue is 2 (gamma - sigma) - 1 (eigenvector (1, -1)), so
    the threshold sits at sigma = gamma - 1/2 whenever the range brackets it.
    """
    lo, hi = float(sigma_range[0]), float(sigma_range[1])
    if not (0 < lo < hi):
        raise ValueError("sigma_range must be increasing and positive")
    if n_samples < 2:
        raise ValueError("need at least two samples")
    samples = np.linspace(lo, hi, int(n_samples))
    counts, growth, branches = [], [], []
    for s in samples:
        spec = family_n2(gamma, s)
        eqs = find_all_equilibria(spec, seed=seed, tol=tol)
        branches.append(eqs)
        counts.append(len(eqs))
        growth.append(family_n2_linearization(gamma, s)[1])
    growth = np.asarray(growth)

    def growth_at(s):
        return family_n2_linearization(gamma, s)[1]

    thresholds = []
    for k in range(len(samples) - 1):
        ga, gb = growth[k], growth[k + 1]
        if ga == 0.0:
            thresholds.append(float(samples[k]))
            continue
        if ga * gb < 0:
            a, b = float(samples[k]), float(samples[k + 1])
            fa = growth_at(a)
            while b - a > threshold_tol:
                m = 0.5 * (a + b)
                fm = growth_at(m)
                if fa * fm <= 0:
                    b = m
                else:
                    a, fa = m, fm
            thresholds.append(0.5 * (a + b))
    if growth[-1] == 0.0:
        thresholds.append(float(samples[-1]))
    return BifurcationDiagram(
        gamma=float(gamma), parameter_name="sigma", samples=samples,
        counts=np.asarray(counts, dtype=int),
        growth_eigenvalues=growth,
        one_is_stable=growth < 0.0,
        branches=branches, thresholds=thresholds)
