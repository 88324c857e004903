"""Uplink channel generation, noisy transmission, and RLS channel estimation.

Two fading scenarios are supported: i.i.d. Rayleigh entries, and a realistic
model combining per-user path loss, log-normal shadowing redrawn once per
channel realization (block fading), and Kronecker-structured antenna
correlation on both link ends.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .linalg import psd_sqrt
from .validation import as_complex_matrix

__all__ = [
    "SystemDimensions",
    "FadingConfig",
    "gen_iid_channel",
    "correlation_matrix",
    "gen_realistic_channel",
    "transmit",
    "RlsChannelEstimator",
]


@dataclass(frozen=True)
class SystemDimensions:
    """Antenna bookkeeping: K users with nt_per_user[k] transmit antennas each."""

    nt_per_user: tuple[int, ...]
    n_r: int

    def __post_init__(self):
        object.__setattr__(self, "nt_per_user", tuple(int(v) for v in self.nt_per_user))
        if len(self.nt_per_user) == 0:
            raise ValueError("nt_per_user must list at least one user")
        if any(v < 1 for v in self.nt_per_user):
            raise ValueError(f"per-user antenna counts must be >= 1, got {self.nt_per_user}")
        if self.n_r < self.n_t:
            raise ValueError(
                f"n_r must be >= total transmit antennas: n_r={self.n_r}, n_t={self.n_t}"
            )

    @property
    def num_users(self) -> int:
        return len(self.nt_per_user)

    @property
    def n_t(self) -> int:
        return sum(self.nt_per_user)


@dataclass(frozen=True)
class FadingConfig:
    """Realistic-scenario knobs: path loss, shadowing spread, antenna correlation."""

    path_loss: float = 1.0
    shadowing_db: float = 0.0
    rho_tx: float = 0.0
    rho_rx: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.path_loss <= 1.0:
            raise ValueError(f"path_loss must be in (0, 1], got {self.path_loss}")
        if self.shadowing_db < 0.0:
            raise ValueError(f"shadowing_db must be >= 0, got {self.shadowing_db}")
        for name in ("rho_tx", "rho_rx"):
            rho = getattr(self, name)
            if not 0.0 <= rho < 1.0:
                raise ValueError(f"{name} must be in [0, 1), got {rho}")


def _iid_gaussian(n_rows: int, n_cols: int, rng: np.random.Generator) -> np.ndarray:
    """Circularly symmetric complex Gaussian entries with unit variance."""
    return np.sqrt(0.5) * (
        rng.standard_normal((n_rows, n_cols)) + 1j * rng.standard_normal((n_rows, n_cols))
    )


def gen_iid_channel(dims: SystemDimensions, rng: np.random.Generator) -> np.ndarray:
    """Scenario-1 channel: i.i.d. CN(0, 1) entries, shape (n_r, n_t)."""
    return _iid_gaussian(dims.n_r, dims.n_t, rng)


def correlation_matrix(n_a: int, rho: float) -> np.ndarray:
    """Antenna correlation with entries rho^((i-j)^2): unit diagonal, symmetric."""
    if n_a < 1:
        raise ValueError(f"n_a must be >= 1, got {n_a}")
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must be in [0, 1), got {rho}")
    idx = np.arange(n_a, dtype=np.float64)
    exponents = (idx[:, np.newaxis] - idx[np.newaxis, :]) ** 2
    return rho ** exponents


def gen_realistic_channel(
    dims: SystemDimensions, cfg: FadingConfig, rng: np.random.Generator
) -> np.ndarray:
    """Scenario-2 channel: per user, sqrt(path_loss) · shadowing · Kronecker fading.

    Per user k the block is α·β_k·(R_rx^{1/2} G0_k R_tx^{1/2}) with
    α = sqrt(path_loss) and β_k = 10^(shadowing_db·n_k/10), n_k standard
    normal, redrawn once per realization. Draw order per user is pinned
    (shadowing first, then fading entries) for reproducibility.
    """
    alpha = float(np.sqrt(cfg.path_loss))
    sqrt_r_rx = psd_sqrt(correlation_matrix(dims.n_r, cfg.rho_rx))
    sqrt_r_tx_cache: dict[int, np.ndarray] = {}
    blocks = []
    for nt_k in dims.nt_per_user:
        beta = 10.0 ** (cfg.shadowing_db * float(rng.standard_normal()) / 10.0)
        g0 = _iid_gaussian(dims.n_r, nt_k, rng)
        if nt_k not in sqrt_r_tx_cache:
            sqrt_r_tx_cache[nt_k] = psd_sqrt(correlation_matrix(nt_k, cfg.rho_tx))
        g = sqrt_r_rx @ g0 @ sqrt_r_tx_cache[nt_k]
        blocks.append(alpha * beta * g)
    return np.hstack(blocks)


def transmit(h, s, sigma_n2: float, rng: np.random.Generator) -> np.ndarray:
    """y = H s + n with i.i.d. CN(0, sigma_n2) noise per receive antenna.

    ``s`` may be one vector (n_t,) or a batch (n, n_t); the result matches.
    """
    h = as_complex_matrix(h, "H")
    s_arr = np.asarray(s, dtype=np.complex128)
    if sigma_n2 < 0:
        raise ValueError(f"sigma_n2 must be >= 0, got {sigma_n2}")
    single = s_arr.ndim == 1
    if single:
        s_arr = s_arr[np.newaxis, :]
    if s_arr.ndim != 2 or s_arr.shape[1] != h.shape[1]:
        raise ValueError(f"symbol shape {np.shape(s)} does not match channel {h.shape}")
    y = s_arr @ h.T
    if sigma_n2 > 0:
        y = y + np.sqrt(sigma_n2 / 2.0) * (
            rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)
        )
    return y[0] if single else y


class RlsChannelEstimator(BaseEstimator):
    """Recursive least-squares estimator of a MIMO channel matrix.

    Each update with a known pilot vector s and its observation y applies

        D[i] = λ D[i-1] + y s^H
        P[i] = λ^{-1} P[i-1] - λ^{-2} P[i-1] s s^H P[i-1] / (1 + λ^{-1} s^H P[i-1] s)
        Ĥ[i] = D[i] P[i]

    started from D[0] = 0 and P[0] = δ^{-1} I, which makes Ĥ[i] the
    exponentially weighted regularized LS solution at every step.

    Parameters
    ----------
    forgetting : float in (0, 1], exponential forgetting factor λ.
        1.0 weights all pilots equally (static channel); < 1 tracks drift.
    init_delta : float > 0, inverse scale δ of the P initialization.

    Attributes (after fitting)
    --------------------------
    estimate_ : (n_r, n_t) current channel estimate Ĥ.
    n_updates_ : number of pilot vectors absorbed.
    """

    def __init__(self, forgetting: float = 0.998, init_delta: float = 1e-3):
        self.forgetting = forgetting
        self.init_delta = init_delta

    def _validate_params(self) -> None:
        if not 0.0 < self.forgetting <= 1.0:
            raise ValueError(f"forgetting must be in (0, 1], got {self.forgetting}")
        if self.init_delta <= 0.0:
            raise ValueError(f"init_delta must be positive, got {self.init_delta}")

    def _init_state(self, n_t: int, n_r: int) -> None:
        self.D_ = np.zeros((n_r, n_t), dtype=np.complex128)
        self.P_ = np.eye(n_t, dtype=np.complex128) / self.init_delta
        self.estimate_ = np.zeros((n_r, n_t), dtype=np.complex128)
        self.n_updates_ = 0

    def partial_fit(self, pilots, observations) -> "RlsChannelEstimator":
        """Absorb pilot/observation pairs, one recursion step per row.

        ``pilots``: (n, n_t) or (n_t,) known transmitted vectors.
        ``observations``: (n, n_r) or (n_r,) matching received vectors.
        """
        self._validate_params()
        s_mat = np.atleast_2d(np.asarray(pilots, dtype=np.complex128))
        y_mat = np.atleast_2d(np.asarray(observations, dtype=np.complex128))
        if s_mat.shape[0] != y_mat.shape[0]:
            raise ValueError(
                f"pilot count {s_mat.shape[0]} does not match observation count {y_mat.shape[0]}"
            )
        if not hasattr(self, "P_"):
            self._init_state(n_t=s_mat.shape[1], n_r=y_mat.shape[1])
        if s_mat.shape[1] != self.P_.shape[0] or y_mat.shape[1] != self.D_.shape[0]:
            raise ValueError("pilot/observation width does not match the fitted dimensions")
        lam = self.forgetting
        d, p = self.D_, self.P_
        for s_vec, y_vec in zip(s_mat, y_mat):
            ps = p @ s_vec
            denom = 1.0 + float((s_vec.conj() @ ps).real) / lam
            p = p / lam - np.outer(ps, ps.conj()) / (lam * lam * denom)
            p = 0.5 * (p + p.conj().T)
            d = lam * d + np.outer(y_vec, s_vec.conj())
            self.n_updates_ += 1
        self.D_, self.P_ = d, p
        self.estimate_ = d @ p
        return self

    def fit(self, pilots, observations) -> "RlsChannelEstimator":
        """Reset state, then absorb the given pilot block."""
        s_mat = np.atleast_2d(np.asarray(pilots, dtype=np.complex128))
        y_mat = np.atleast_2d(np.asarray(observations, dtype=np.complex128))
        self._validate_params()
        self._init_state(n_t=s_mat.shape[1], n_r=y_mat.shape[1])
        return self.partial_fit(s_mat, y_mat)
