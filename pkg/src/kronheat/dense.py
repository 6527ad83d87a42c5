"""Dense linear-algebra kernels for the temporal pencil.

Wraps LAPACK-backed routines (Schur, eigen, SVD, Cholesky) behind the
small set of forms the space-time solvers need, with residual checks
baked into the constructors.  All tolerances are relative Frobenius
residuals around 1e-12.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (
    DefectivePencil,
    DimensionMismatch,
    NotPositiveDefinite,
    ConvergenceFailure,
)

RESIDUAL_TOL = 1e-12


def _frob(a):
    return np.linalg.norm(a, "fro")


@dataclass(frozen=True)
class RealSchurForm:
    """Real Schur decomposition P = Q R Q^T.

    R is upper quasi-triangular: 1x1 blocks hold real eigenvalues, 2x2
    blocks hold conjugate pairs alpha +- i*sqrt(b1*b2) with the two
    off-diagonal entries b1, b2 of opposite signs.
    """

    Q: np.ndarray
    R: np.ndarray

    def block_starts(self):
        """Indices where diagonal blocks begin, scanning the subdiagonal."""
        n = self.R.shape[0]
        starts = []
        k = 0
        while k < n:
            starts.append(k)
            if k + 1 < n and self.R[k + 1, k] != 0.0:
                k += 2
            else:
                k += 1
        return starts

    def eigenvalues(self):
        """Eigenvalues recovered from the diagonal blocks."""
        vals = []
        n = self.R.shape[0]
        k = 0
        while k < n:
            if k + 1 < n and self.R[k + 1, k] != 0.0:
                alpha = self.R[k, k]
                beta = np.sqrt(-self.R[k, k + 1] * self.R[k + 1, k])
                vals.extend([alpha + 1j * beta, alpha - 1j * beta])
                k += 2
            else:
                vals.append(self.R[k, k] + 0j)
                k += 1
        return np.array(vals)


@dataclass(frozen=True)
class ComplexSchurForm:
    """Complex Schur decomposition P = W S W* with S upper triangular."""

    W: np.ndarray
    S: np.ndarray

    def eigenvalues(self):
        return np.diag(self.S).copy()


@dataclass(frozen=True)
class EigenSvdForm:
    """Eigendecomposition P X = X D plus an SVD of the eigenvector matrix.

    The SVD X = U diag(sigma) V* is kept alongside because the solver
    applies X^{-1} = V diag(1/sigma) U* for numerical damping, and the
    spectral study reports sigma_min, sigma_max, kappa_2.
    """

    X: np.ndarray
    D: np.ndarray
    U: np.ndarray
    sigma: np.ndarray
    Vh: np.ndarray

    @property
    def sigma_min(self):
        return float(self.sigma[-1])

    @property
    def sigma_max(self):
        return float(self.sigma[0])

    @property
    def kappa2(self):
        return float(self.sigma[0] / self.sigma[-1])


def _check_square(P):
    P = np.asarray(P)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {P.shape}")
    if not np.all(np.isfinite(P)):
        raise ConvergenceFailure("matrix contains non-finite entries")
    return P


def real_schur(P):
    """Real Schur form of a square real matrix.

    Returns
    -------
    RealSchurForm
        With ``P = Q R Q^T`` to a relative Frobenius residual of 1e-12.
    """
    P = _check_square(P).astype(float)
    try:
        R, Q = sla.schur(P, output="real")
    except sla.LinAlgError as exc:  # pragma: no cover - QR failure is rare
        raise ConvergenceFailure(str(exc)) from exc
    scale = max(_frob(P), 1.0)
    if _frob(Q @ R @ Q.T - P) > 100 * RESIDUAL_TOL * scale:
        raise ConvergenceFailure("real Schur residual above tolerance")
    return RealSchurForm(Q=Q, R=R)


def complex_schur(P):
    """Complex Schur form of a square matrix (real input allowed)."""
    P = _check_square(P).astype(complex)
    try:
        S, W = sla.schur(P, output="complex")
    except sla.LinAlgError as exc:  # pragma: no cover
        raise ConvergenceFailure(str(exc)) from exc
    scale = max(_frob(P), 1.0)
    if _frob(W @ S @ W.conj().T - P) > 100 * RESIDUAL_TOL * scale:
        raise ConvergenceFailure("complex Schur residual above tolerance")
    return ComplexSchurForm(W=W, S=S)


def eig_svd(P, residual_tol=1e-8):
    """Eigendecomposition of P with an SVD of the eigenvector matrix.

    Parameters
    ----------
    P : (N, N) array
        Real or complex square matrix, diagonalizable in practice.
    residual_tol : float
        Relative bound on ||P X - X D||_F; beyond it the matrix is
        treated as numerically defective.

    Raises
    ------
    DefectivePencil
        If the eigenvector residual exceeds ``residual_tol``; the caller
        is expected to fall back to a Schur-based solver.
    """
    P = _check_square(P)
    vals, vecs = sla.eig(P)
    scale = max(_frob(P), 1.0)
    if _frob(P @ vecs - vecs * vals[None, :]) > residual_tol * scale:
        raise DefectivePencil("eigenvector residual above tolerance")
    U, sigma, Vh = sla.svd(vecs)
    if sigma[-1] <= 0.0:
        raise DefectivePencil("eigenvector matrix is numerically singular")
    return EigenSvdForm(X=vecs, D=vals, U=U, sigma=sigma, Vh=Vh)


def eig_pencil(M, A):
    """Generalized eigenpairs of M z = lambda A z via the QZ iteration.

    Returns
    -------
    vals : (N,) complex array
    vecs : (N, N) complex array
        Columns keep LAPACK's raw scaling (largest component has
        |Re| + |Im| = 1); they are deliberately not renormalized, so
        condition numbers of the eigenvector matrix are comparable with
        tables produced by environments using the same convention.

    Raises
    ------
    DefectivePencil
        On QZ failure or an infinite eigenvalue (beta = 0).
    """
    from scipy.linalg.lapack import dggev

    M = _check_square(M).astype(float)
    A = _check_square(A).astype(float)
    if M.shape != A.shape:
        raise DimensionMismatch("pencil matrices differ in shape")
    alphar, alphai, beta, _, vr, _, info = dggev(
        M, A, compute_vl=0, compute_vr=1
    )
    if info != 0:
        raise DefectivePencil(f"QZ iteration failed with info={info}")
    if np.any(beta == 0.0):
        raise DefectivePencil("pencil has an infinite eigenvalue")
    vals = (alphar + 1j * alphai) / beta
    n = M.shape[0]
    vecs = np.zeros((n, n), dtype=complex)
    j = 0
    while j < n:
        if alphai[j] != 0.0:
            # conjugate pair stored as (real part, imaginary part)
            vecs[:, j] = vr[:, j] + 1j * vr[:, j + 1]
            vecs[:, j + 1] = vr[:, j] - 1j * vr[:, j + 1]
            j += 2
        else:
            vecs[:, j] = vr[:, j]
            j += 1
    return vals, vecs


def svd_of_eigenvectors(vecs, vals):
    """Package eigenpairs with the SVD of the eigenvector matrix.

    For eigenpairs obtained from :func:`eig_pencil`, whose column scaling
    is part of the reported condition number.
    """
    vecs = _check_square(vecs)
    U, sigma, Vh = sla.svd(vecs)
    if sigma[-1] <= 0.0:
        raise DefectivePencil("eigenvector matrix is numerically singular")
    return EigenSvdForm(X=vecs, D=np.asarray(vals), U=U, sigma=sigma, Vh=Vh)


def cholesky_lower(A):
    """Lower Cholesky factor of a symmetric positive definite matrix."""
    A = _check_square(A)
    if not np.allclose(A, A.T, rtol=1e-10, atol=1e-14):
        raise NotPositiveDefinite("matrix is not symmetric")
    try:
        return sla.cholesky(A, lower=True)
    except sla.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc


def tri_solve(T, rhs, lower=False, trans=False):
    """Solve T x = rhs (or T^T x = rhs) with T triangular."""
    T = _check_square(T)
    rhs = np.asarray(rhs)
    if rhs.shape[0] != T.shape[0]:
        raise DimensionMismatch(
            f"rhs has leading dimension {rhs.shape[0]}, matrix is {T.shape[0]}"
        )
    return sla.solve_triangular(T, rhs, lower=lower, trans=1 if trans else 0)


def spd_solve(L, rhs):
    """Solve A x = rhs given the lower Cholesky factor L of A."""
    return tri_solve(L, tri_solve(L, rhs, lower=True), lower=True, trans=True)


def kron_apply_right(B, A_action, v):
    """Apply (B^T kron A) to v without forming the Kronecker product.

    Uses vec(A V B) = (B^T kron A) vec(V) with V the column-major
    unvec of ``v``.  ``A_action`` is either a matrix (dense or sparse)
    or a callable mapping an (N_A, N_B) matrix to its image under A.
    """
    B = np.asarray(B)
    v = np.asarray(v)
    n_b = B.shape[0]
    if B.ndim != 2:
        raise DimensionMismatch("B must be a matrix")
    if v.size % n_b != 0:
        raise DimensionMismatch(
            f"vector of length {v.size} is not a multiple of {n_b}"
        )
    n_a = v.size // n_b
    V = v.reshape(n_a, n_b, order="F")
    AV = A_action(V) if callable(A_action) else A_action @ V
    AV = np.asarray(AV)
    if AV.ndim != 2 or AV.shape[1] != n_b:
        raise DimensionMismatch("A_action changed the column count")
    return (AV @ B).ravel(order="F")
