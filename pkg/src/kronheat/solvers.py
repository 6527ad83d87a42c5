"""Direct space-time solvers for the Kronecker-sum global system.

The global matrix K = A_t (x) M_x + M_t (x) A_x is never formed.  All
three algorithms decompose the temporal pencil (M_t, A_t), transform the
right-hand side, solve N_t spatial sparse systems, and transform back:

* Bartels-Stewart, real Schur: back-substitution over quasi-triangular
  blocks; conjugate pairs couple two spatial solves into one symmetric
  indefinite system of dimension 2 M_x.
* Bartels-Stewart, complex Schur: triangular back-substitution in
  complex arithmetic.
* Fast diagonalization: N_t fully independent complex solves, suitable
  for time parallelism, stabilized by applying the eigenvector inverse
  through its SVD.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from . import sparse_direct
from .dense import (
    ComplexSchurForm,
    EigenSvdForm,
    RealSchurForm,
    cholesky_lower,
    complex_schur,
    eig_pencil,
    kron_apply_right,
    real_schur,
    spd_solve,
    svd_of_eigenvectors,
)
from .errors import (
    DefectivePencil,
    DimensionMismatch,
    ImaginaryResidueTooLarge,
    SizeGuardExceeded,
)
from .fem import SpatialOperators
from .temporal import TemporalOperators

DENSE_ORACLE_GUARD = 5000


@dataclass(frozen=True)
class SpaceTimeSystem:
    """Assembled operators plus the transformed global right-hand side.

    ``rhs`` is ordered with the spatial index fastest: it is the
    column-major vectorization of the M_x-by-N_t right-hand-side matrix.
    """

    temporal: TemporalOperators
    spatial: SpatialOperators
    rhs: np.ndarray

    def __post_init__(self):
        if self.rhs.shape != (self.n_t * self.m_x,):
            raise DimensionMismatch(
                f"rhs length {self.rhs.shape} does not match "
                f"N_t*M_x = {self.n_t}*{self.m_x}"
            )

    @property
    def n_t(self):
        return self.temporal.A.shape[0]

    @property
    def m_x(self):
        return self.spatial.n_interior

    @property
    def dof(self):
        return self.n_t * self.m_x

    def rhs_matrix(self):
        return self.rhs.reshape(self.m_x, self.n_t, order="F")


@dataclass(frozen=True)
class PencilFactorization:
    """Decomposition of the temporal pencil plus the Cholesky of A_t."""

    variant: str
    chol_A: np.ndarray
    form: object

    @property
    def eigenvalues(self):
        if isinstance(self.form, EigenSvdForm):
            return self.form.D
        return self.form.eigenvalues()

    @property
    def min_re_lambda(self):
        return float(np.min(self.eigenvalues.real))


@dataclass(frozen=True)
class SpaceTimeSolution:
    """Interior coefficients (spatial index fastest) plus boundary data."""

    coefficients: np.ndarray
    boundary_values: Optional[np.ndarray] = None

    def interior_matrix(self, m_x):
        return self.coefficients.reshape(m_x, -1, order="F")

    def full_coefficients(self, spatial):
        """(n_vertices, N_t) array including Dirichlet boundary rows."""
        Z = self.interior_matrix(spatial.n_interior)
        full = np.zeros((spatial.interior.size + spatial.boundary.size,
                         Z.shape[1]))
        full[spatial.interior] = Z
        if self.boundary_values is not None:
            full[spatial.boundary] = self.boundary_values
        return full


@dataclass
class SolveReport:
    """Wall times per step and spectral statistics of one solve."""

    variant: str
    dof: int
    n_t: int
    m_x: int
    t_decompose: float = 0.0
    t_transform_in: float = 0.0
    t_spatial: float = 0.0
    t_transform_out: float = 0.0
    residual: float = 0.0
    min_re_lambda: float = 0.0
    sigma_min: float = 0.0
    sigma_max: float = 0.0
    kappa2: float = 0.0
    threads: int = 1
    analyze_calls: int = 0
    fallback: Optional[str] = None

    @property
    def t_total(self):
        return (self.t_decompose + self.t_transform_in + self.t_spatial
                + self.t_transform_out)

    def csv_row(self):
        return (
            f"{self.dof},{self.n_t},{self.m_x},{self.variant},"
            f"{self.t_decompose:.6f},{self.t_transform_in:.6f},"
            f"{self.t_spatial:.6f},{self.t_transform_out:.6f},"
            f"{self.residual:.3e},{self.min_re_lambda:.3e},"
            f"{self.kappa2:.3e},{self.threads}"
        )

    @staticmethod
    def csv_header():
        return ("dof,N_t,M_x,variant,t_decomp,t_transform_in,t_spatial,"
                "t_transform_out,residual,minReLambda,kappa2,threads")


def build_pencil(temporal, variant):
    """Decompose the temporal pencil for one solver variant.

    Parameters
    ----------
    temporal : TemporalOperators
    variant : {"bs-real", "bs-complex", "fd"}

    Returns
    -------
    PencilFactorization

    Raises
    ------
    DefectivePencil
        If an eigenvalue has nonpositive real part, or (fd only) the
        eigenvector matrix is numerically defective; the caller should
        fall back to "bs-complex".
    """
    L = cholesky_lower(temporal.A)
    P = spd_solve(L, temporal.M)
    if variant == "bs-real":
        form = real_schur(P)
    elif variant == "bs-complex":
        form = complex_schur(P)
    elif variant == "fd":
        # pencil route keeps the reference eigenvector scaling for the
        # spectral statistics; eigenvectors of (M, A) and of A^{-1} M
        # coincide
        vals, vecs = eig_pencil(temporal.M, temporal.A)
        scale = max(np.linalg.norm(P, "fro"), 1.0)
        resid = np.linalg.norm(P @ vecs - vecs * vals[None, :], "fro")
        if resid > 1e-8 * scale:
            raise DefectivePencil("eigenvector residual above tolerance")
        form = svd_of_eigenvectors(vecs, vals)
    else:
        raise ValueError(f"unknown pencil variant: {variant!r}")
    pencil = PencilFactorization(variant=variant, chol_A=L, form=form)
    if pencil.min_re_lambda <= 0.0:
        raise DefectivePencil("pencil eigenvalue with nonpositive real part")
    return pencil


def _transform_in(system, pencil, right):
    """vec(F_hat A_t^{-1} right) as an M_x-by-N_t matrix."""
    F = system.rhs_matrix()
    FA = spd_solve(pencil.chol_A, F.T).T
    return FA @ right


def _spatial_csr(system):
    M = system.spatial.M_II.tocsr()
    A = system.spatial.A_II.tocsr()
    return M, A


def _union_symbolic(M, A):
    return sparse_direct.analyze((M + A).tocsr())


def solve_bs_real(system, pencil=None):
    """Bartels-Stewart with real Schur decomposition.

    Returns
    -------
    (SpaceTimeSolution, SolveReport)
    """
    report = SolveReport(variant="bs-real", dof=system.dof,
                         n_t=system.n_t, m_x=system.m_x)
    t0 = time.perf_counter()
    if pencil is None:
        pencil = build_pencil(system.temporal, "bs-real")
    if not isinstance(pencil.form, RealSchurForm):
        raise DimensionMismatch("solve_bs_real needs a real Schur pencil")
    Q, R = pencil.form.Q, pencil.form.R
    report.t_decompose = time.perf_counter() - t0
    report.min_re_lambda = pencil.min_re_lambda

    t0 = time.perf_counter()
    G = _transform_in(system, pencil, Q)
    report.t_transform_in = time.perf_counter() - t0

    t0 = time.perf_counter()
    analyze_before = sparse_direct.analyze_call_count()
    M, A = _spatial_csr(system)
    n_t, m_x = system.n_t, system.m_x
    sym1 = None
    sym2 = None
    Z = np.zeros((m_x, n_t))
    acc = np.zeros((m_x, n_t))
    k = n_t - 1
    while k >= 0:
        if k == 0 or R[k, k - 1] == 0.0:
            # single real eigenvalue: one SPD spatial system
            if sym1 is None:
                sym1 = _union_symbolic(M, A)
            K = (M + R[k, k] * A).tocsr()
            rhs = G[:, k] - acc[:, k]
            z = sparse_direct.factorize(sym1, K).solve(rhs)
            Z[:, k] = z
            Az = A @ z
            if k > 0:
                acc[:, :k] += np.outer(Az, R[:k, k])
            k -= 1
        else:
            # conjugate pair: scaled symmetric indefinite 2 M_x system
            # for the unknown (z_{k-1}, -z_k)
            alpha = R[k - 1, k - 1]
            b1, b2 = R[k - 1, k], R[k, k - 1]
            D = (M + alpha * A).tocsr()
            top = sp.hstack([abs(b2) * D, -b1 * abs(b2) * A])
            bot = sp.hstack([abs(b1) * b2 * A, -abs(b1) * D])
            K2 = sp.vstack([top, bot]).tocsr()
            if sym2 is None:
                sym2 = sparse_direct.analyze(K2)
            r_top = abs(b2) * (G[:, k - 1] - acc[:, k - 1])
            r_bot = abs(b1) * (G[:, k] - acc[:, k])
            zz = sparse_direct.factorize(sym2, K2).solve(
                np.concatenate([r_top, r_bot]))
            Z[:, k - 1] = zz[:m_x]
            Z[:, k] = -zz[m_x:]
            if k > 1:
                Az1 = A @ Z[:, k - 1]
                Az2 = A @ Z[:, k]
                acc[:, :k - 1] += np.outer(Az1, R[:k - 1, k - 1])
                acc[:, :k - 1] += np.outer(Az2, R[:k - 1, k])
            k -= 2
    report.analyze_calls = sparse_direct.analyze_call_count() - analyze_before
    report.t_spatial = time.perf_counter() - t0

    t0 = time.perf_counter()
    U = Z @ Q.T
    coeffs = U.ravel(order="F")
    report.t_transform_out = time.perf_counter() - t0
    report.residual = residual(system, coeffs)
    return SpaceTimeSolution(coefficients=coeffs), report


def solve_bs_complex(system, pencil=None):
    """Bartels-Stewart with complex Schur decomposition."""
    report = SolveReport(variant="bs-complex", dof=system.dof,
                         n_t=system.n_t, m_x=system.m_x)
    t0 = time.perf_counter()
    if pencil is None:
        pencil = build_pencil(system.temporal, "bs-complex")
    if not isinstance(pencil.form, ComplexSchurForm):
        raise DimensionMismatch("solve_bs_complex needs a complex Schur pencil")
    W, S = pencil.form.W, pencil.form.S
    report.t_decompose = time.perf_counter() - t0
    report.min_re_lambda = pencil.min_re_lambda

    t0 = time.perf_counter()
    G = _transform_in(system, pencil, np.conj(W))
    report.t_transform_in = time.perf_counter() - t0

    t0 = time.perf_counter()
    analyze_before = sparse_direct.analyze_call_count()
    M, A = _spatial_csr(system)
    n_t, m_x = system.n_t, system.m_x
    Mc, Ac = M.astype(complex), A.astype(complex)
    sym = _union_symbolic(M, A)
    Z = np.zeros((m_x, n_t), dtype=complex)
    acc = np.zeros((m_x, n_t), dtype=complex)
    for k in range(n_t - 1, -1, -1):
        K = (Mc + S[k, k] * Ac).tocsr()
        rhs = G[:, k] - acc[:, k]
        z = sparse_direct.factorize(sym, K).solve(rhs)
        Z[:, k] = z
        if k > 0:
            Az = Ac @ z
            acc[:, :k] += np.outer(Az, S[:k, k])
    report.analyze_calls = sparse_direct.analyze_call_count() - analyze_before
    report.t_spatial = time.perf_counter() - t0

    t0 = time.perf_counter()
    U = Z @ W.T
    coeffs = _discard_imaginary(U, 1e-9).ravel(order="F")
    report.t_transform_out = time.perf_counter() - t0
    report.residual = residual(system, coeffs)
    return SpaceTimeSolution(coefficients=coeffs), report


def solve_fd(system, pencil=None, threads=1):
    """Fast diagonalization: N_t independent complex spatial solves.

    ``threads`` sizes the worker pool for the independent solves; the
    symbolic factorization is shared read-only.
    """
    report = SolveReport(variant="fd", dof=system.dof, n_t=system.n_t,
                         m_x=system.m_x, threads=threads)
    t0 = time.perf_counter()
    if pencil is None:
        pencil = build_pencil(system.temporal, "fd")
    form = pencil.form
    if not isinstance(form, EigenSvdForm):
        raise DimensionMismatch("solve_fd needs an eigen-SVD pencil")
    report.t_decompose = time.perf_counter() - t0
    report.min_re_lambda = pencil.min_re_lambda
    report.sigma_min = form.sigma_min
    report.sigma_max = form.sigma_max
    report.kappa2 = form.kappa2

    t0 = time.perf_counter()
    # g = vec(F_hat A^{-1} conj(U) Sigma^{-1} V^T); V^T = conj(Vh)
    FA = _transform_in(system, pencil, np.conj(form.U))
    G = (FA / form.sigma[None, :]) @ np.conj(form.Vh)
    report.t_transform_in = time.perf_counter() - t0

    t0 = time.perf_counter()
    analyze_before = sparse_direct.analyze_call_count()
    M, A = _spatial_csr(system)
    n_t, m_x = system.n_t, system.m_x
    Mc, Ac = M.astype(complex), A.astype(complex)
    sym = _union_symbolic(M, A)
    lam = form.D
    Z = np.zeros((m_x, n_t), dtype=complex)

    def spatial_solve(k):
        K = (Mc + lam[k] * Ac).tocsr()
        return k, sparse_direct.factorize(sym, K).solve(G[:, k])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for k, z in pool.map(spatial_solve, range(n_t)):
                Z[:, k] = z
    else:
        for k in range(n_t):
            Z[:, k] = spatial_solve(k)[1]
    report.analyze_calls = sparse_direct.analyze_call_count() - analyze_before
    report.t_spatial = time.perf_counter() - t0

    t0 = time.perf_counter()
    # u = vec(Z X^T) with X^T = conj(V) Sigma U^T; conj(V) = Vh^T
    U_mat = ((Z @ form.Vh.T) * form.sigma[None, :]) @ form.U.T
    coeffs = _discard_imaginary(U_mat, 1e-6).ravel(order="F")
    report.t_transform_out = time.perf_counter() - t0
    report.residual = residual(system, coeffs)
    return SpaceTimeSolution(coefficients=coeffs), report


def _discard_imaginary(U, tol):
    norm = np.linalg.norm(U)
    imag = np.linalg.norm(U.imag)
    if norm > 0 and imag > tol * norm:
        raise ImaginaryResidueTooLarge(
            f"imaginary residue {imag / norm:.3e} above {tol:.1e}"
        )
    return np.ascontiguousarray(U.real)


def solve_dense_oracle(system):
    """Reference solve forming the Kronecker-sum matrix explicitly."""
    if system.dof > DENSE_ORACLE_GUARD:
        raise SizeGuardExceeded(
            f"dof {system.dof} exceeds oracle guard {DENSE_ORACLE_GUARD}"
        )
    K = (np.kron(system.temporal.A, system.spatial.M_II.toarray())
         + np.kron(system.temporal.M, system.spatial.A_II.toarray()))
    coeffs = np.linalg.solve(K, system.rhs)
    return SpaceTimeSolution(coefficients=coeffs)


def residual(system, coefficients):
    """Relative residual of K u = f, applying K matrix-free."""
    coefficients = np.asarray(coefficients)
    if coefficients.shape != system.rhs.shape:
        raise DimensionMismatch("coefficient vector has wrong length")
    Ku = (kron_apply_right(system.temporal.A.T, system.spatial.M_II,
                           coefficients)
          + kron_apply_right(system.temporal.M.T, system.spatial.A_II,
                             coefficients))
    denom = np.linalg.norm(system.rhs)
    if denom == 0.0:
        return float(np.linalg.norm(Ku))
    return float(np.linalg.norm(Ku - system.rhs) / denom)


def solve(system, variant, threads=1, fallback=True):
    """Dispatch a solve by variant name with the FD fallback policy.

    If the fast-diagonalization pencil is defective or its imaginary
    residue is too large, the solve is rerun with the complex-Schur
    variant and the report carries ``fallback``.
    """
    if variant == "bs-real":
        return solve_bs_real(system)
    if variant == "bs-complex":
        return solve_bs_complex(system)
    if variant == "fd":
        if not fallback:
            return solve_fd(system, threads=threads)
        try:
            return solve_fd(system, threads=threads)
        except (DefectivePencil, ImaginaryResidueTooLarge) as exc:
            sol, report = solve_bs_complex(system)
            report.fallback = f"fd failed: {type(exc).__name__}"
            return sol, report
    raise ValueError(f"unknown solver variant: {variant!r}")


def eig_study(temporal):
    """Spectral statistics row for the temporal pencil.

    Returns
    -------
    dict with keys n_t, h_max, h_min, min_re_lambda, sigma_min,
    sigma_max, kappa2.
    """
    pencil = build_pencil(temporal, "fd")
    form = pencil.form
    return {
        "n_t": temporal.A.shape[0],
        "min_re_lambda": pencil.min_re_lambda,
        "sigma_min": form.sigma_min,
        "sigma_max": form.sigma_max,
        "kappa2": form.kappa2,
    }
