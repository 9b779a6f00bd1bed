"""Dense matrix helpers and the SPD machinery behind Gaussian topic densities.

Everything is float64. Covariance determinants and inverses are never formed
explicitly: all Gaussian densities go through a lower Cholesky factor and
triangular solves, which is both cheaper and numerically safer.
"""

import numpy as np
from scipy.linalg import solve_triangular

LOG_2PI = float(np.log(2.0 * np.pi))


def as_matrix(a):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={a.ndim}")
    return a


def matmul(a, b):
    """Matrix product with an explicit dimension check."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def cholesky(a, sym_tol=1e-10):
    """Lower Cholesky factor L of a symmetric positive definite matrix.

    Raises ValueError if the matrix is not square, not symmetric within
    ``sym_tol``, or not positive definite.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got {a.shape}")
    if not np.allclose(a, a.T, atol=sym_tol, rtol=0.0):
        raise ValueError("matrix not symmetric")
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise ValueError("matrix not positive definite") from None


def chol_logdet(chol):
    """log det(Sigma) for Sigma = L L^T, i.e. 2 * sum(log diag(L))."""
    return 2.0 * float(np.sum(np.log(np.diag(chol))))


def mvn_log_density(e, mu, chol):
    """Log density of N(mu, L L^T) at point(s) e, via triangular solves.

    ``e`` may be a single length-D vector or an (n, D) stack of points;
    the result is a scalar or length-n vector accordingly. Computed as
    -0.5 ||L^{-1}(e - mu)||^2 - sum(log diag(L)) - (D/2) log(2 pi).
    """
    e = np.asarray(e, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    chol = as_matrix(chol)
    d = mu.size
    if chol.shape != (d, d):
        raise ValueError(f"Cholesky factor shape {chol.shape} does not match dim {d}")
    single = e.ndim == 1
    pts = e[None, :] if single else e
    if pts.shape[1] != d:
        raise ValueError(f"point dim {pts.shape[1]} does not match mean dim {d}")
    z = solve_triangular(chol, (pts - mu).T, lower=True)
    out = -0.5 * np.sum(z * z, axis=0) - np.sum(np.log(np.diag(chol))) - 0.5 * d * LOG_2PI
    return float(out[0]) if single else out
