"""Input validation helpers shared by all modules."""

from __future__ import annotations

import numpy as np

__all__ = [
    "as_complex_matrix",
    "as_complex_vector",
    "check_square",
    "check_hermitian",
]


def _check_finite(arr: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError(f"{name} must contain only finite values")


def as_complex_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce input to a finite 2-D complex128 array."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    _check_finite(arr, name)
    return arr


def as_complex_vector(a, name: str = "vector") -> np.ndarray:
    """Coerce input to a finite 1-D complex128 array."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got ndim={arr.ndim}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    _check_finite(arr, name)
    return arr


def check_square(a: np.ndarray, name: str = "matrix") -> None:
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")


def check_hermitian(a: np.ndarray, tol: float = 1e-9, name: str = "matrix") -> None:
    """Require Hermitian symmetry within a relative tolerance."""
    check_square(a, name)
    scale = max(float(np.linalg.norm(a)), 1.0)
    dev = float(np.linalg.norm(a - a.conj().T))
    if dev > tol * scale:
        raise ValueError(f"{name} is not Hermitian (relative deviation {dev / scale:.3e})")
