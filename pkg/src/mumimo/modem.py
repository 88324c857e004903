"""Square M-QAM on the unnormalized odd-integer grid with per-axis Gray labeling.

Constellation points live on {±1, ±3, ...}² (no unit-power scaling): the
lattice-domain quantizer assumes the odd grid with shift constant κ = 1+j,
and the SNR definition 10·log10(N_t σ_s² / σ_n²) absorbs the symbol power.

Bit labels are per-axis reflected-binary Gray codes, in-phase bits first
(most significant). The label of a point is the integer whose binary
expansion is its bit sequence; ``points[label]`` is the matching symbol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "KAPPA",
    "SUPPORTED_ORDERS",
    "Constellation",
    "build_constellation",
    "modulate",
    "demodulate",
    "slice_symbols",
    "noise_variance_for_snr",
]

# Shift constant of the odd-integer grid: every point is κ + 2·(Gaussian integer).
KAPPA = 1.0 + 1.0j

SUPPORTED_ORDERS = (4, 16, 64)


def _gray(k: np.ndarray) -> np.ndarray:
    return k ^ (k >> 1)


def _gray_inverse_table(n_levels: int) -> np.ndarray:
    """Table g -> k with gray(k) = g, for k in [0, n_levels)."""
    k = np.arange(n_levels)
    table = np.empty(n_levels, dtype=np.int64)
    table[_gray(k)] = k
    return table


@dataclass(frozen=True)
class Constellation:
    """Immutable M-QAM description used by the modulator and detectors."""

    order: int
    bits_per_symbol: int
    points: np.ndarray  # (M,) complex points indexed by integer Gray label
    sigma_s2: float
    kappa: complex = KAPPA
    # levels per axis, cached for slicing and label recovery
    levels_per_axis: int = field(default=0)

    def __post_init__(self):
        object.__setattr__(self, "points", np.asarray(self.points, dtype=np.complex128))
        self.points.setflags(write=False)

    @property
    def bits_per_axis(self) -> int:
        return self.bits_per_symbol // 2

    def labels_of(self, symbols) -> np.ndarray:
        """Integer Gray labels of exact grid points (inverse of ``points[label]``)."""
        sym = np.asarray(symbols, dtype=np.complex128)
        n_lv = self.levels_per_axis
        k_i = np.rint((sym.real + n_lv - 1) / 2.0).astype(np.int64)
        k_q = np.rint((sym.imag + n_lv - 1) / 2.0).astype(np.int64)
        out_of_box = (k_i < 0) | (k_i >= n_lv) | (k_q < 0) | (k_q >= n_lv)
        if np.any(out_of_box):
            raise ValueError("symbols are not constellation points")
        # Grid levels are small odd integers, so exact equality is the right
        # notion of "is a constellation point" here.
        recon = (2 * k_i - (n_lv - 1)) + 1j * (2 * k_q - (n_lv - 1))
        if not np.array_equal(recon, sym):
            raise ValueError("symbols are not constellation points")
        return (_gray(k_i) << self.bits_per_axis) | _gray(k_q)


def build_constellation(order: int) -> Constellation:
    """Construct the M-QAM constellation for M in {4, 16, 64}."""
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported constellation order {order}: must be one of {SUPPORTED_ORDERS}")
    bits = int(math.log2(order))
    n_lv = int(math.isqrt(order))
    bits_axis = bits // 2
    inv = _gray_inverse_table(n_lv)
    labels = np.arange(order)
    g_i = labels >> bits_axis
    g_q = labels & (n_lv - 1)
    amp_i = 2 * inv[g_i] - (n_lv - 1)
    amp_q = 2 * inv[g_q] - (n_lv - 1)
    points = amp_i.astype(np.float64) + 1j * amp_q.astype(np.float64)
    sigma_s2 = float(np.mean(points.real**2 + points.imag**2))
    return Constellation(
        order=order,
        bits_per_symbol=bits,
        points=points,
        sigma_s2=sigma_s2,
        levels_per_axis=n_lv,
    )


def modulate(bits, c: Constellation) -> np.ndarray:
    """Map a flat 0/1 sequence to symbols, ``bits_per_symbol`` bits each.

    The first half of each group selects the in-phase level, the second half
    the quadrature level, most significant bit first.
    """
    bit_arr = np.asarray(bits, dtype=np.int64).ravel()
    if bit_arr.size % c.bits_per_symbol != 0:
        raise ValueError(
            f"bit count {bit_arr.size} not divisible by bits per symbol {c.bits_per_symbol}"
        )
    if np.any((bit_arr != 0) & (bit_arr != 1)):
        raise ValueError("bits must be 0 or 1")
    groups = bit_arr.reshape(-1, c.bits_per_symbol)
    weights = 1 << np.arange(c.bits_per_symbol - 1, -1, -1)
    labels = groups @ weights
    return c.points[labels]


def demodulate(symbols, c: Constellation) -> np.ndarray:
    """Hard-demap exact constellation points back to a flat bit array."""
    labels = c.labels_of(symbols).ravel()
    shifts = np.arange(c.bits_per_symbol - 1, -1, -1)
    return ((labels[:, np.newaxis] >> shifts[np.newaxis, :]) & 1).ravel()


def slice_symbols(x, c: Constellation):
    """Nearest constellation point(s) to ``x``.

    Ties break toward the smaller real part, then the smaller imaginary part,
    so simulations are bit-reproducible. Accepts scalars or arrays.
    """
    arr = np.asarray(x, dtype=np.complex128)
    n_lv = c.levels_per_axis
    # Midpoints round down (toward the more negative level) via ceil(v - 1/2).
    k_i = np.clip(np.ceil((arr.real + n_lv - 1) / 2.0 - 0.5), 0, n_lv - 1)
    k_q = np.clip(np.ceil((arr.imag + n_lv - 1) / 2.0 - 0.5), 0, n_lv - 1)
    out = (2.0 * k_i - (n_lv - 1)) + 1j * (2.0 * k_q - (n_lv - 1))
    if np.isscalar(x) or arr.ndim == 0:
        return complex(out)
    return out


def noise_variance_for_snr(snr_db: float, n_t: int, sigma_s2: float) -> float:
    """Noise variance σ_n² for SNR defined as 10·log10(N_t σ_s² / σ_n²)."""
    if n_t < 1:
        raise ValueError(f"n_t must be >= 1, got {n_t}")
    if sigma_s2 <= 0:
        raise ValueError(f"sigma_s2 must be positive, got {sigma_s2}")
    return float(n_t * sigma_s2 * 10.0 ** (-snr_db / 10.0))
