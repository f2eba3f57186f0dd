"""Matrix structure checks and spectral utilities for coupled KPP systems.

The reaction-diffusion systems handled by this package have the form

    du/dt - D u_xx = M u + u - u o (C u),        (o = Hadamard product)

with D a positive diagonal diffusion matrix, M a mutation-type matrix and C a
competition matrix.  The structural assumptions the theory rests on are
grouped as

* A1 (mutation structure): M essentially nonnegative, irreducible,
  line-sum-symmetric, with M 1 = 0 (Perron pair (0, 1)).
* A2 (competition structure): C entrywise positive, normal, with C 1 = 1
  (Perron pair (1, 1)).
* A3 (competition spectrum): every eigenvalue of C has nonnegative real part.

This module builds the standard matrix families (circulants, discrete
Laplacians, the two-component symmetric family), checks A1-A3 with
per-item verdicts, and provides the spectral primitives used everywhere
else in the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import EigenvalueError

DEFAULT_TOL = 1e-10        # structural tolerance, relative to the Frobenius norm
EQUALITY_TOL = 1e-8        # equality-case detection in inequality certificates

HOLDS = "holds"
FAILS = "fails"
WITHIN_TOL = "holds_within_tolerance"


# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class Verdict:
    """Outcome of one structural check.

    status is "holds" (satisfied exactly, up to eigensolver machine noise for
    spectral checks), "holds_within_tolerance" (mismatch below the relative
    tolerance) or "fails".  evidence is the scalar the classification was made
    on (a mismatch norm, a minimum entry, a minimum real part, ...).
    """

    status: str
    evidence: float
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.status in (HOLDS, WITHIN_TOL)

    def __str__(self):
        return f"{self.status} (evidence={self.evidence:.3e})"


@dataclass(frozen=True)
class AssumptionReport:
    """Per-item verdicts for the assumption groups A1, A2, A3."""

    a1_essentially_nonnegative: Verdict
    a1_irreducible: Verdict
    a1_line_sum_symmetric: Verdict
    a1_pf_eigenpair: Verdict
    a2_positive: Verdict
    a2_normal: Verdict
    a2_pf_one: Verdict
    a3_right_half_plane: Verdict
    tol: float = DEFAULT_TOL

    @property
    def a1_ok(self):
        return (self.a1_essentially_nonnegative.ok and self.a1_irreducible.ok
                and self.a1_line_sum_symmetric.ok and self.a1_pf_eigenpair.ok)

    @property
    def a2_ok(self):
        return self.a2_positive.ok and self.a2_normal.ok and self.a2_pf_one.ok

    @property
    def a3_ok(self):
        return self.a3_right_half_plane.ok

    @property
    def all_ok(self):
        return self.a1_ok and self.a2_ok and self.a3_ok

    def items(self):
        """(name, Verdict) pairs in a fixed order, for reports and tests."""
        names = ("a1_essentially_nonnegative", "a1_irreducible",
                 "a1_line_sum_symmetric", "a1_pf_eigenpair",
                 "a2_positive", "a2_normal", "a2_pf_one",
                 "a3_right_half_plane")
        return [(n, getattr(self, n)) for n in names]

    def group_ok(self, group: str) -> bool:
        return {"A1": self.a1_ok, "A2": self.a2_ok, "A3": self.a3_ok}[group.upper()]


@dataclass(frozen=True)
class ComplexSpectrum:
    """Eigenvalues (with algebraic multiplicity) in a deterministic order.

    Eigenvalues are sorted lexicographically by (real, imaginary) part.
    Eigenvectors, when requested, are the columns of ``eigenvectors`` matching
    ``eigenvalues`` entrywise; ``residuals[k]`` is ||A v_k - lambda_k v_k||_2.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    residuals: np.ndarray | None = None

    @property
    def min_real(self) -> float:
        return float(self.eigenvalues.real.min())

    @property
    def max_real(self) -> float:
        return float(self.eigenvalues.real.max())


@dataclass(frozen=True)
class SystemSpec:
    """One reaction-diffusion system (D, M, C) of size n.

    d holds the diagonal of D.  Arrays are stored as read-only float copies so
    a spec can be shared freely across solver calls.
    """

    d: np.ndarray
    M: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        d = np.atleast_1d(np.asarray(self.d, dtype=float))
        if d.ndim == 2:
            if not np.array_equal(d, np.diag(np.diag(d))):
                raise ValueError("D must be diagonal")
            d = np.diag(d).copy()
        M = _as_square(self.M, "M")
        C = _as_square(self.C, "C")
        n = M.shape[0]
        if d.shape != (n,) or C.shape != (n, n):
            raise ValueError("D, M, C must share one size n")
        if not np.all(np.isfinite(d)) or np.any(d <= 0):
            raise ValueError("diffusion rates must be positive and finite")
        for a in (d, M, C):
            a.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "C", C)

    @property
    def n(self) -> int:
        return self.M.shape[0]

    @property
    def D(self) -> np.ndarray:
        return np.diag(self.d)


def _as_square(a, name):
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


# ---------------------------------------------------------------------------
# spectral primitives


def spectrum(A, compute_eigenvectors=False, residual_tol=1e-9) -> ComplexSpectrum:
    """Full eigenvalue set of a real dense matrix.

    Backed by LAPACK's Hessenberg-reduction + shifted-QR path.  When
    eigenvectors are requested each pair is verified against the residual
    ||A v - lambda v||_2 <= residual_tol * max(1, ||A||_F); a failed check
    raises EigenvalueError.
    """
    A = _as_square(A, "A")
    try:
        if compute_eigenvectors:
            lam, V = np.linalg.eig(A)
        else:
            lam = np.linalg.eigvals(A)
            V = None
    except np.linalg.LinAlgError as exc:
        raise EigenvalueError(
            f"eigenvalue iteration did not converge for n={A.shape[0]}: {exc} "
            "(LAPACK QR sweep limit reached)") from exc
    order = np.lexsort((lam.imag, lam.real))
    lam = lam[order]
    residuals = None
    if V is not None:
        V = V[:, order]
        residuals = np.linalg.norm(A @ V - V * lam, axis=0)
        bound = residual_tol * max(1.0, np.linalg.norm(A))
        if residuals.max() > bound:
            raise EigenvalueError(
                f"eigenpair residual {residuals.max():.3e} exceeds {bound:.3e}")
    return ComplexSpectrum(eigenvalues=lam, eigenvectors=V, residuals=residuals)


def perron_eigenpair(A, tol=1e-12, max_iter=100_000):
    """Perron root and positive eigenvector of an essentially nonnegative,
    irreducible matrix.

    Power iteration on A + s I with s = 1 + max_i |a_ii| (making the iteration
    matrix nonnegative, irreducible, and aperiodic).  Collatz-Wielandt ratios
    bracket the root; iteration stops when the bracket width falls below
    tol * max(1, |root|).

    Returns
    -------
    (value, vector) : the Perron root of A and a positive eigenvector
        normalized to ||v||_1 = n (so the vector is exactly 1 when 1 is the
        Perron direction).
    """
    A = _as_square(A, "A")
    n = A.shape[0]
    off = A - np.diag(np.diag(A))
    if off.min() < 0:
        raise ValueError("matrix must be essentially nonnegative")
    if not is_irreducible(A):
        raise ValueError("matrix must be irreducible")
    s = 1.0 + np.abs(np.diag(A)).max()
    B = A + s * np.eye(n)
    v = np.full(n, 1.0)
    lam = float("nan")
    for it in range(1, max_iter + 1):
        w = B @ v
        ratios = w / v
        lo, hi = ratios.min(), ratios.max()
        lam = 0.5 * (lo + hi)
        if hi - lo <= tol * max(1.0, abs(lam)):
            v = w * (n / w.sum())
            return lam - s, v
        v = w * (n / w.sum())
    raise EigenvalueError(
        f"power iteration did not converge in {max_iter} iterations "
        f"(bracket width {hi - lo:.3e})", iterations=max_iter)


def is_irreducible(A) -> bool:
    """Strong connectivity of the digraph on strictly positive off-diagonal
    entries (exact comparison; an edge exists iff a_ij > 0, i != j)."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n == 1:
        return True
    adj = (A > 0).astype(np.int8)
    np.fill_diagonal(adj, 0)
    ncomp, _ = connected_components(csr_matrix(adj), directed=True,
                                    connection="strong")
    return ncomp == 1


def line_sum_mismatch(A) -> float:
    """max_i |row_sum_i - column_sum_i| (zero iff A is line-sum-symmetric)."""
    A = _as_square(A, "A")
    return float(np.abs(A.sum(axis=1) - A.sum(axis=0)).max())


# ---------------------------------------------------------------------------
# assumption checking

# Spectral-location checks ("holds" vs a strict >= 0) cannot be exact through
# a floating-point eigensolver: LAPACK returns min Re ~ -1e-17 even for an
# exactly PSD uniform matrix.  Evidence within this backward-error band of the
# ideal value still classifies as "holds".
_MACHINE_BAND = 64 * np.finfo(float).eps


def _classify(mismatch, scale, tol, exact_zero_ok=True):
    """Verdict for an equality-type check from its mismatch norm."""
    if exact_zero_ok and mismatch == 0.0:
        return Verdict(HOLDS, 0.0)
    if mismatch <= tol * max(scale, 1e-300):
        return Verdict(WITHIN_TOL, float(mismatch))
    return Verdict(FAILS, float(mismatch))


def check_mutation_matrix(M, tol=DEFAULT_TOL):
    """A1 verdicts for a candidate mutation matrix, as a dict."""
    M = _as_square(M, "M")
    n = M.shape[0]
    normM = np.linalg.norm(M)
    off = M - np.diag(np.diag(M))
    min_off = float(off.min()) if n > 1 else 0.0
    if min_off >= 0.0:
        v_nonneg = Verdict(HOLDS, min_off)
    elif min_off >= -tol * max(normM, 1e-300):
        v_nonneg = Verdict(WITHIN_TOL, min_off)
    else:
        v_nonneg = Verdict(FAILS, min_off)
    v_irred = Verdict(HOLDS if is_irreducible(M) else FAILS,
                      0.0 if is_irreducible(M) else 1.0,
                      note="strong connectivity of positive off-diagonal entries")
    v_lss = _classify(line_sum_mismatch(M), normM, tol)
    v_pf = _classify(float(np.abs(M @ np.ones(n)).max()), normM, tol)
    return {
        "a1_essentially_nonnegative": v_nonneg,
        "a1_irreducible": v_irred,
        "a1_line_sum_symmetric": v_lss,
        "a1_pf_eigenpair": v_pf,
    }


def check_competition_matrix(C, tol=DEFAULT_TOL):
    """A2 and A3 verdicts for a candidate competition matrix, as a dict."""
    C = _as_square(C, "C")
    n = C.shape[0]
    normC = np.linalg.norm(C)
    min_entry = float(C.min())
    v_pos = Verdict(HOLDS if min_entry > 0.0 else FAILS, min_entry)
    G = C @ C.T - C.T @ C
    v_normal = _classify(float(np.linalg.norm(G)), normC ** 2, tol)
    v_pf1 = _classify(float(np.abs(C @ np.ones(n) - np.ones(n)).max()),
                      normC, tol)
    min_re = spectrum(C).min_real
    if min_re >= -_MACHINE_BAND * max(normC, 1.0):
        v_rhp = Verdict(HOLDS, min_re)
    elif min_re >= -tol * max(normC, 1e-300):
        v_rhp = Verdict(WITHIN_TOL, min_re)
    else:
        v_rhp = Verdict(FAILS, min_re)
    return {
        "a2_positive": v_pos,
        "a2_normal": v_normal,
        "a2_pf_one": v_pf1,
        "a3_right_half_plane": v_rhp,
    }


def check_assumptions(spec: SystemSpec, tol=DEFAULT_TOL) -> AssumptionReport:
    """Check A1 (on M), A2 and A3 (on C) and report per-item verdicts.

    Each sub-assumption is tested independently; a verdict of
    "holds_within_tolerance" means the defining identity is met to within
    tol relative to the matrix's Frobenius norm rather than exactly.
    """
    if not isinstance(spec, SystemSpec):
        raise ValueError("check_assumptions expects a SystemSpec")
    parts = check_mutation_matrix(spec.M, tol)
    parts.update(check_competition_matrix(spec.C, tol))
    return AssumptionReport(tol=tol, **parts)


# ---------------------------------------------------------------------------
# matrix families


def make_circulant(phi) -> np.ndarray:
    """Circulant matrix C with C_ij = phi_{i-j}, indices extended periodically
    (phi_{i-j} := phi_{n+i-j} when i-j <= 0).  The first row therefore reads
    (phi_n, phi_{n-1}, ..., phi_1), and C u equals the cyclic convolution
    (phi * u)_i = sum_j phi_{i-j} u_j."""
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    if phi.ndim != 1 or phi.size < 1 or not np.all(np.isfinite(phi)):
        raise ValueError("phi must be a finite vector")
    n = phi.size
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :] - 1) % n
    return phi[idx]


def dft_matrix(n: int) -> np.ndarray:
    """Normalized DFT matrix U with U_jk = exp(-2 pi i (j-1)(k-1)/n) / sqrt(n).

    Unitary; diagonalizes every n x n circulant.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    j = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(j, j) / n) / np.sqrt(n)


def circulant_spectrum_via_dft(phi) -> ComplexSpectrum:
    """Eigenvalues of make_circulant(phi) through the DFT diagonalization.

    The diagonalization gives lambda_k = sqrt(n) e^{-2 pi i k/n} (U phi)_{k+1}
    = sum_m phi_m e^{-2 pi i k m / n}; the per-frequency phase in front of
    (U phi) comes from the one-based indexing of the convolution kernel and is
    required for the multiset to match the direct spectrum.
    """
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    n = phi.size
    u = dft_matrix(n) @ phi
    lam = np.sqrt(n) * np.exp(-2j * np.pi * np.arange(n) / n) * u
    order = np.lexsort((lam.imag, lam.real))
    return ComplexSpectrum(eigenvalues=lam[order])


def make_discrete_laplacian(sigmas, boundary="periodic") -> np.ndarray:
    """Weighted discrete Laplacian M = -grad^T Sigma grad on n nodes.

    grad is the cyclic first-difference matrix ((grad u)_1 = u_n - u_1,
    (grad u)_j = u_{j-1} - u_j for j >= 2) and Sigma = diag(sigmas).  With
    boundary="neumann" the first row of grad is zeroed, which removes the wrap
    link; sigmas[0] is then unused.  Row and column sums vanish by
    construction and the result is symmetric.

    For n = 2 (periodic) the wrap link and the direct link connect the same
    pair of nodes and the couplings add: (sigma_1+sigma_2) [[-1, 1], [1, -1]].
    """
    sigmas = np.atleast_1d(np.asarray(sigmas, dtype=float))
    n = sigmas.size
    if n < 2:
        raise ValueError("need at least two nodes")
    if boundary not in ("periodic", "neumann"):
        raise ValueError(f"unknown boundary {boundary!r}")
    checked = sigmas if boundary == "periodic" else sigmas[1:]
    if not np.all(np.isfinite(sigmas)) or np.any(checked <= 0):
        raise ValueError("conductances must be positive and finite")
    M = np.zeros((n, n))
    for j in range(1, n):  # link j-1 <-> j with weight sigmas[j]
        s = sigmas[j]
        M[j - 1, j] += s
        M[j, j - 1] += s
        M[j - 1, j - 1] -= s
        M[j, j] -= s
    if boundary == "periodic":  # wrap link n-1 <-> 0 with weight sigmas[0]
        s = sigmas[0]
        M[n - 1, 0] += s
        M[0, n - 1] += s
        M[0, 0] -= s
        M[n - 1, n - 1] -= s
    return M


def family_n2(gamma, sigma, d=(1.0, 1.0)) -> SystemSpec:
    """The two-component symmetric family:

        M = sigma [[-1, 1], [1, -1]],   C = [[1-gamma, gamma], [gamma, 1-gamma]].

    Requires sigma > 0 and 0 < gamma < 1 so that A1 and A2 hold; A3 holds iff
    gamma <= 1/2 (the eigenvalues of C are 1 and 1 - 2 gamma).
    """
    if not (sigma > 0):
        raise ValueError("sigma must be positive")
    if not (0 < gamma < 1):
        raise ValueError("gamma must lie in (0, 1)")
    M = sigma * np.array([[-1.0, 1.0], [1.0, -1.0]])
    C = np.array([[1.0 - gamma, gamma], [gamma, 1.0 - gamma]])
    return SystemSpec(d=np.asarray(d, dtype=float), M=M, C=C)


def family_n2_linearization(gamma, sigma):
    """Eigenvalues of M - C for the two-component family, by direct 2x2
    eigendecomposition of the symmetric matrix [[a, b], [b, a]] (a +- b with
    a = gamma - sigma - 1, b = sigma - gamma):

        eigenvector 1      ->  -1
        eigenvector (1,-1) ->  2 (gamma - sigma) - 1

    The growth eigenvalue crosses zero at sigma = gamma - 1/2.
    """
    return -1.0, 2.0 * (gamma - sigma) - 1.0
