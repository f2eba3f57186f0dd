"""Pairing inequalities as runtime-checkable certificates.

Two inequalities carry the uniqueness and decay arguments for the reaction
F(u) = M u + u - u o (C u):

* the line-sum gap: for nonnegative A and positive u,
      sum_ij a_ij u_j / u_i  >=  sum_ij a_ij
  holds iff A is line-sum-symmetric, with equality (for irreducible A)
  exactly on the multiples of 1;

* the quadratic pairing: for normal C,
      <q, C q>  >=  min Re(sp C) * ||q||^2.

Each check returns an InequalityCertificate storing both sides, the margin,
and the witness vector, so failed instances are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral_core import (EQUALITY_TOL, check_competition_matrix, spectrum)


@dataclass(frozen=True)
class InequalityCertificate:
    """lhs >= rhs claim evaluated on one witness vector.

    margin is exactly lhs - rhs as computed; equality_case_detected flags
    |margin| at or below the detection tolerance (1e-8 by default, decoupled
    from solver tolerances).
    """

    lhs: float
    rhs: float
    margin: float
    equality_case_detected: bool
    witness: np.ndarray

    def as_record(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "equality_case_detected": self.equality_case_detected,
            "witness": list(map(float, self.witness)),
        }


def _positive_vector(u, n, name="u"):
    u = np.asarray(u, dtype=float)
    if u.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},)")
    if not np.all(np.isfinite(u)) or np.any(u <= 0):
        raise ValueError(f"{name} must be strictly positive and finite")
    return u


def eaves_gap(A, u, eq_tol=EQUALITY_TOL) -> InequalityCertificate:
    """Certificate for the line-sum characterization inequality.

    lhs = sum_i (A u)_i / u_i, rhs = sum_ij a_ij.  The margin is nonnegative
    for every positive u iff A (nonnegative) is line-sum-symmetric; for
    irreducible line-sum-symmetric A the margin vanishes exactly on
    u in span(1).  The margin is invariant under scaling of u.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    if not np.all(np.isfinite(A)) or A.min() < 0:
        raise ValueError("A must be nonnegative and finite")
    n = A.shape[0]
    u = _positive_vector(u, n)
    lhs = float(((A @ u) / u).sum())
    rhs = float(A.sum())
    margin = lhs - rhs
    return InequalityCertificate(
        lhs=lhs, rhs=rhs, margin=margin,
        equality_case_detected=bool(abs(margin) <= eq_tol),
        witness=u.copy())


def eaves_violation_witness(A, rng, n_restarts=50, n_steps=300, floor=1e-9):
    """Search for a positive u with a negative line-sum gap.

    Projected gradient descent on the margin over the positive simplex (the
    margin is scale-invariant), from u = 1 plus seeded restarts.  For a
    matrix that is not line-sum-symmetric the gradient at 1 equals
    (column sums - row sums) != 0, so the first start already descends below
    zero; restarts guard against poor conditioning.

    Returns (best_margin, best_u).
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]

    def margin_of(u):
        return float(((A @ u) / u).sum() - A.sum())

    def grad(u):
        return A.T @ (1.0 / u) - (A @ u) / u ** 2

    best_margin, best_u = np.inf, None
    starts = [np.full(n, 1.0 / n)]
    starts.extend(rng.dirichlet(np.ones(n)) + floor for _ in range(n_restarts))
    for u0 in starts:
        u = np.maximum(u0, floor)
        u /= u.sum()
        m = margin_of(u)
        eta = 0.5
        for _ in range(n_steps):
            g = grad(u)
            trial = None
            e = eta
            for _ in range(25):
                cand = np.maximum(u - e * g, floor)
                cand /= cand.sum()
                mc = margin_of(cand)
                if mc < m:
                    trial, m = cand, mc
                    break
                e *= 0.5
            if trial is None:
                break
            u = trial
        if m < best_margin:
            best_margin, best_u = m, u.copy()
        if best_margin < -1e-6:  # clearly negative; no need to polish further
            break
    return best_margin, best_u


def mutation_pairing(M, u) -> float:
    """sum_i (M u)_i / u_i for an essentially nonnegative M, evaluated through
    eaves_gap on the nonnegative shift A = M - min_i(m_ii) I (the two agree
    identically because the shift cancels between lhs and rhs).

    Nonnegative for every positive u when M satisfies A1.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("M must be square")
    off = M - np.diag(np.diag(M))
    if off.min() < 0:
        raise ValueError("M must be essentially nonnegative")
    shift = float(np.diag(M).min())
    A = M - shift * np.eye(M.shape[0])
    return eaves_gap(A, u).margin


def competition_pairing(C, q, tol=1e-10, eq_tol=EQUALITY_TOL) -> InequalityCertificate:
    """Certificate for <q, C q> >= min Re(sp C) * ||q||^2 (normal C).

    Requires C to satisfy A2; under A3 the left side is additionally
    nonnegative.  q may be any finite real vector.
    """
    C = np.asarray(C, dtype=float)
    verdicts = check_competition_matrix(C, tol)
    bad = [k for k in ("a2_positive", "a2_normal", "a2_pf_one")
           if not verdicts[k].ok]
    if bad:
        raise ValueError(f"C violates A2 ({', '.join(bad)})")
    q = np.asarray(q, dtype=float)
    if q.shape != (C.shape[0],) or not np.all(np.isfinite(q)):
        raise ValueError("q must be a finite vector matching C")
    lhs = float(q @ (C @ q))
    min_re = spectrum(C).min_real
    rhs = min_re * float(q @ q)
    margin = lhs - rhs
    return InequalityCertificate(
        lhs=lhs, rhs=rhs, margin=margin,
        equality_case_detected=bool(abs(margin) <= eq_tol),
        witness=q.copy())


def lyapunov_pairing_split(spec, u):
    """The two halves of the dissipation of V(u) = sum_i (u_i - ln u_i):

        mutation side     -<M u, 1/u>          (<= 0 under A1, line-sum gap)
        competition side  <C (u - 1), (u - 1)> (>= 0 under A3)

    Along the reaction ODE u' = F(u), dV/dt = mutation - competition, so V
    decays under A1-A3.  At any equilibrium the two sides coincide; with A3
    that pins both to zero, and the equality case of the line-sum gap then
    forces u = 1.
    """
    u = _positive_vector(u, spec.n)
    mutation_side = -float((spec.M @ u) @ (1.0 / u))
    w = u - 1.0
    competition_side = float((spec.C @ w) @ w)
    return mutation_side, competition_side


def parabolic_lyapunov(values, dx) -> float:
    """sum_i integral (u_i - ln u_i) dx by the trapezoid rule.

    Non-increasing along trajectories of the reaction-diffusion system when
    D = I and A1-A3 hold; callers pass a positive field sampled on a uniform
    grid as an (n, n_points) array.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError("values must be a 2-d field (components x points)")
    if not (dx > 0):
        raise ValueError("dx must be positive")
    if values.min() <= 0 or not np.all(np.isfinite(values)):
        raise ValueError("field must be strictly positive and finite")
    integrand = values - np.log(values)
    return float(np.trapezoid(integrand, dx=dx, axis=1).sum())
