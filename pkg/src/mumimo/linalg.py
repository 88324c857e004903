"""Complex dense linear algebra kernels: Hermitian solves, thin QR, PSD square roots.

These wrap numpy.linalg with the argument checking and conventions the
detection and channel code relies on (real positive R diagonal, Hermitian
roots, conditioning guards).
"""

from __future__ import annotations

import numpy as np

from .validation import as_complex_matrix, check_hermitian

__all__ = ["solve_hermitian_psd", "qr_decompose", "psd_sqrt", "COND_LIMIT"]

# Conditioning threshold beyond which a Hermitian solve is refused.
COND_LIMIT = 1e12


def solve_hermitian_psd(a, b) -> np.ndarray:
    """Solve A X = B for Hermitian positive (semi)definite A.

    Parameters
    ----------
    a : (n, n) array_like, Hermitian within 1e-9 relative tolerance.
    b : (n,) or (n, m) array_like right-hand side.

    Returns
    -------
    X with the same trailing shape as ``b``.

    Raises
    ------
    ValueError on shape mismatch or non-Hermitian input.
    numpy.linalg.LinAlgError ("ill-conditioned") when cond(A) exceeds COND_LIMIT.
    """
    a = as_complex_matrix(a, "A")
    check_hermitian(a, 1e-9, "A")
    b_arr = np.asarray(b, dtype=np.complex128)
    if b_arr.ndim not in (1, 2):
        raise ValueError(f"B must be 1-D or 2-D, got ndim={b_arr.ndim}")
    if b_arr.shape[0] != a.shape[0]:
        raise ValueError(f"dimension mismatch: A is {a.shape}, B has leading dim {b_arr.shape[0]}")
    if np.linalg.cond(a) > COND_LIMIT:
        raise np.linalg.LinAlgError("ill-conditioned Hermitian system")
    # Symmetrize to wash out the tolerated Hermitian deviation before solving.
    a_sym = 0.5 * (a + a.conj().T)
    return np.linalg.solve(a_sym, b_arr)


def qr_decompose(h) -> tuple[np.ndarray, np.ndarray]:
    """Thin QR factorization H = QR with a real positive R diagonal.

    Parameters
    ----------
    h : (m, n) array_like with m >= n and full column rank.

    Returns
    -------
    (Q, R): Q is (m, n) with orthonormal columns, R is (n, n) upper
    triangular with real positive diagonal entries.

    Raises
    ------
    ValueError when m < n; numpy.linalg.LinAlgError ("rank deficient")
    when a diagonal entry of R vanishes numerically.
    """
    h = as_complex_matrix(h, "H")
    m, n = h.shape
    if m < n:
        raise ValueError(f"H must have at least as many rows as columns, got {h.shape}")
    q, r = np.linalg.qr(h, mode="reduced")
    diag = np.diagonal(r).copy()
    tol = max(m, n) * np.finfo(np.float64).eps * max(float(np.max(np.abs(diag))), 1e-300)
    if np.min(np.abs(diag)) <= tol:
        raise np.linalg.LinAlgError("rank deficient input")
    # Rotate unit phases so every diagonal entry of R is real positive.
    phase = diag / np.abs(diag)
    q = q * phase[np.newaxis, :]
    r = r * phase.conj()[:, np.newaxis]
    r[np.diag_indices(n)] = np.abs(diag)
    return q, r


def psd_sqrt(r) -> np.ndarray:
    """Hermitian square root of a Hermitian PSD matrix via eigendecomposition.

    Eigenvalues in [-1e-10, 0) are clamped to zero; anything below -1e-6
    is rejected as not PSD. The returned S is Hermitian and satisfies
    S @ S = R within 1e-8.
    """
    r = as_complex_matrix(r, "R")
    check_hermitian(r, 1e-9, "R")
    r_sym = 0.5 * (r + r.conj().T)
    w, v = np.linalg.eigh(r_sym)
    if float(np.min(w)) < -1e-6:
        raise np.linalg.LinAlgError(f"not PSD: smallest eigenvalue {np.min(w):.3e}")
    w = np.clip(w, 0.0, None)
    s = (v * np.sqrt(w)[np.newaxis, :]) @ v.conj().T
    return 0.5 * (s + s.conj().T)
