"""Complex LLL (CLLL) lattice basis reduction with exact integer bookkeeping.

Reduces a channel matrix H to H̃ = H·T where T is unimodular with
Gaussian-integer entries, so the columns of H̃ span the same lattice but are
shorter and more orthogonal. T and T⁻¹ are maintained incrementally through
exact elementary integer column operations; no floating-point inversion ever
touches them. The reduction is QR-based: size reduction rounds R[j,k]/R[j,j]
to the nearest Gaussian integer, and columns swap when the complex Lovász
test δ·|R[k-1,k-1]|² ≤ |R[k,k]|² + |R[k-1,k]|² fails.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import qr_decompose
from .validation import as_complex_matrix

__all__ = [
    "ReducedLattice",
    "clll_reduce",
    "orthogonality_defect",
    "round_half_away",
    "gaussian_round",
    "DEFAULT_DELTA_LLL",
]

DEFAULT_DELTA_LLL = 0.99

# Outer-loop iteration cap factor: reduction of an n-column basis may take at
# most 10·n² loop passes before a numerical bug is assumed.
_ITER_CAP_FACTOR = 10

# Lovász comparisons within this relative margin count as equality: no swap,
# which prevents cycling on exact ties.
_LOVASZ_TIE_REL = 1e-12


@dataclass(frozen=True)
class ReducedLattice:
    """Result of a CLLL reduction: H̃ = H·T with unimodular Gaussian-integer T."""

    h_tilde: np.ndarray
    t: np.ndarray
    t_inv: np.ndarray
    delta_lll: float

    def __post_init__(self):
        for name in ("h_tilde", "t", "t_inv"):
            getattr(self, name).setflags(write=False)


def round_half_away(x):
    """Elementwise round to nearest integer, halves away from zero (platform-pinned)."""
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def gaussian_round(z):
    """Elementwise round to the nearest Gaussian integer, halves away from zero."""
    return round_half_away(np.real(z)) + 1j * round_half_away(np.imag(z))


def clll_reduce(h, delta_lll: float = DEFAULT_DELTA_LLL) -> ReducedLattice:
    """Reduce the basis given by the columns of ``h``.

    Parameters
    ----------
    h : (m, n) complex matrix, m >= n, numerically full column rank.
    delta_lll : Lovász parameter in (0.25, 1]; larger means stronger reduction.

    The returned basis never has a larger orthogonality defect than the
    input: when the swap sequence would end somewhere worse (possible for
    rare near-orthogonal inputs), the input basis is returned with T = I.

    Raises
    ------
    ValueError for an out-of-range delta_lll.
    numpy.linalg.LinAlgError for rank-deficient input ("rank deficient") or a
    failure to terminate within 10·n² loop passes ("iteration cap").
    """
    h = as_complex_matrix(h, "H")
    if not 0.25 < delta_lll <= 1.0:
        raise ValueError(f"delta_lll must be in (0.25, 1], got {delta_lll}")
    _, r = qr_decompose(h)
    n = h.shape[1]
    t = np.eye(n, dtype=np.complex128)
    t_inv = np.eye(n, dtype=np.complex128)

    def size_reduce(k: int, j: int) -> None:
        mu = complex(gaussian_round(r[j, k] / r[j, j]))
        if mu != 0:
            r[: j + 1, k] -= mu * r[: j + 1, j]
            t[:, k] -= mu * t[:, j]
            t_inv[j, :] += mu * t_inv[k, :]

    cap = _ITER_CAP_FACTOR * n * n
    iters = 0
    k = 1
    while k < n:
        iters += 1
        if iters > cap:
            raise np.linalg.LinAlgError(f"iteration cap exceeded ({cap} passes)")
        size_reduce(k, k - 1)
        lhs = delta_lll * abs(r[k - 1, k - 1]) ** 2
        rhs = abs(r[k, k]) ** 2 + abs(r[k - 1, k]) ** 2
        if lhs > rhs and lhs - rhs > _LOVASZ_TIE_REL * max(lhs, rhs):
            r[:, [k - 1, k]] = r[:, [k, k - 1]]
            t[:, [k - 1, k]] = t[:, [k, k - 1]]
            t_inv[[k - 1, k], :] = t_inv[[k, k - 1], :]
            # Re-triangularize rows k-1, k with a Givens rotation.
            a, b = r[k - 1, k - 1], r[k, k - 1]
            nu = np.hypot(abs(a), abs(b))
            if nu == 0.0:
                raise np.linalg.LinAlgError("rank deficient during reduction")
            g = np.array(
                [[a.conjugate() / nu, b.conjugate() / nu], [-b / nu, a / nu]],
                dtype=np.complex128,
            )
            r[k - 1 : k + 1, k - 1 :] = g @ r[k - 1 : k + 1, k - 1 :]
            r[k, k - 1] = 0.0
            k = max(k - 1, 1)
        else:
            for j in range(k - 2, -1, -1):
                size_reduce(k, j)
            k += 1

    h_tilde = h @ t
    # The Lovász condition does not by itself guarantee the final basis beats
    # the input on orthogonality defect (rare near-orthogonal inputs lose a
    # little through swaps). The contract here is "never worse", so fall back
    # to the untouched basis in that case.
    if orthogonality_defect(h_tilde) > orthogonality_defect(h):
        eye = np.eye(n, dtype=np.complex128)
        return ReducedLattice(h_tilde=h.copy(), t=eye, t_inv=eye.copy(), delta_lll=delta_lll)
    return ReducedLattice(h_tilde=h_tilde, t=t, t_inv=t_inv, delta_lll=delta_lll)


def orthogonality_defect(h) -> float:
    """(Product of column norms) / sqrt(det(HᴴH)); 1 iff the columns are orthogonal.

    Computed through QR in log space so products stay well-scaled. Raises
    numpy.linalg.LinAlgError for rank-deficient input.
    """
    h = as_complex_matrix(h, "H")
    _, r = qr_decompose(h)
    col_norms = np.linalg.norm(h, axis=0)
    log_defect = float(np.sum(np.log(col_norms)) - np.sum(np.log(np.abs(np.diagonal(r)))))
    return float(np.exp(log_defect))
