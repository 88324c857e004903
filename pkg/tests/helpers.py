"""Shared helpers for the test suite."""

from __future__ import annotations

import math

import numpy as np

from mumimo.channel import SystemDimensions, gen_iid_channel

Z95 = 1.959963984540054


def well_conditioned_channel(
    rng: np.random.Generator, n_r: int, n_t: int, cond_max: float = 4.0
) -> np.ndarray:
    """Draw i.i.d. complex Gaussian channels until the condition number is tame."""
    dims = SystemDimensions((n_t,), n_r)
    for _ in range(10_000):
        h = gen_iid_channel(dims, rng)
        if np.linalg.cond(h) <= cond_max:
            return h
    raise RuntimeError("failed to draw a well-conditioned channel")


def wilson_interval(successes: int, total: int) -> tuple[float, float]:
    """Two-sided 95% Wilson score interval for a binomial proportion."""
    if total == 0:
        return (0.0, 1.0)
    p = successes / total
    z2 = Z95 * Z95
    denom = 1.0 + z2 / total
    center = (p + z2 / (2 * total)) / denom
    half = Z95 * math.sqrt(p * (1 - p) / total + z2 / (4 * total * total)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def ordering_consistent(errors_low, bits_low, errors_high, bits_high) -> bool:
    """True when "low BER <= high BER" is consistent with 95% binomial intervals.

    The check passes unless the supposedly-lower rate is significantly above
    the supposedly-higher one, i.e. unless the intervals separate the wrong
    way around.
    """
    lo_low, _ = wilson_interval(errors_low, bits_low)
    _, hi_high = wilson_interval(errors_high, bits_high)
    return lo_low <= hi_high


def snr_at_ber(curve: list[tuple[float, float]], target: float) -> float:
    """Log-linear interpolation of the SNR (dB) where a BER curve crosses target.

    ``curve`` is a list of (snr_db, ber) points sorted by SNR; zero-BER points
    are ignored because they carry no log-domain information.
    """
    pts = [(s, b) for s, b in curve if b > 0]
    for (s1, b1), (s2, b2) in zip(pts, pts[1:]):
        if b1 >= target >= b2:
            return s1 + (s2 - s1) * math.log10(target / b1) / math.log10(b2 / b1)
    raise ValueError(f"curve does not cross BER {target:g}")


def enumerate_candidates(points: np.ndarray, n_t: int) -> np.ndarray:
    """All symbol vectors of length n_t over the constellation, label order."""
    grids = np.meshgrid(*([points] * n_t), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def brute_force_ml(y: np.ndarray, h: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Reference exhaustive minimum-distance detector, one row per vector."""
    cand = enumerate_candidates(points, h.shape[1])
    metric = np.sum(np.abs(y[:, None, :] - cand[None] @ h.T) ** 2, axis=2)
    return cand[np.argmin(metric, axis=1)]
