"""Uplink MIMO detectors with a fit/predict estimator interface.

Every detector is fitted to one channel realization (``fit(channel,
noise_var)``) and then detects batches of received vectors
(``predict(received)``). Fitting precomputes everything that depends only on
the channel: the lattice reduction, detection orderings, and the per-stage
MMSE filters, which is how a block-fading receiver amortizes that work over
a burst of symbols.

Detectors
---------
- MLDetector: exhaustive search over all M^{n_t} candidate vectors.
- SicDetector: MMSE ordered successive interference cancellation,
  strongest column (largest norm) first.
- MbSicDetector: SIC over multiple detection orders (column-norm order plus
  deterministic pre-stored patterns), best candidate by residual.
- LrSicDetector: SIC in the lattice-reduced domain with shift/scale
  quantization and unimodular back-transform.
- MbLrSicDetector: multi-branch LR-domain SIC sharing a single lattice
  reduction across all branches, best candidate by residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import lattice
from .linalg import solve_hermitian_psd
from .modem import KAPPA, Constellation, build_constellation, slice_symbols
from .validation import as_complex_matrix, as_complex_vector, check_hermitian

__all__ = [
    "MAX_ML_BITS",
    "BranchPlan",
    "column_norm_order",
    "psp_shift",
    "psp_permutation",
    "build_branch_plan",
    "lr_quantize",
    "mmse_filter",
    "select_best_candidate",
    "MLDetector",
    "SicDetector",
    "MbSicDetector",
    "LrSicDetector",
    "MbLrSicDetector",
    "DETECTOR_REGISTRY",
    "make_detector",
]

# Exhaustive search refuses candidate spaces beyond 2^20 vectors.
MAX_ML_BITS = 20


# ---------------------------------------------------------------------------
# Ordering strategies and branch plans
# ---------------------------------------------------------------------------


def column_norm_order(h) -> np.ndarray:
    """Detection order sorting columns by descending norm, ties by column index."""
    h = as_complex_matrix(h, "H")
    norms = np.linalg.norm(h, axis=0)
    return np.argsort(-norms, kind="stable")


def psp_shift(n_t: int, l: int, num_branches: int) -> int:
    """Shift s = floor((l-2)·n_t / L) of the l-th pre-stored pattern."""
    return (l - 2) * n_t // num_branches


def psp_permutation(n_t: int, l: int, num_branches: int) -> np.ndarray:
    """Pre-stored pattern l: keep the first s positions, reverse the rest.

    Valid for branch indices 2 <= l <= L <= n_t. Branch 1 is by convention
    the column-norm ordering and is not a pre-stored pattern.
    """
    if not 2 <= l <= num_branches <= n_t:
        raise ValueError(
            f"branch index out of range: need 2 <= l <= L <= n_t, got l={l}, L={num_branches}, n_t={n_t}"
        )
    s = psp_shift(n_t, l, num_branches)
    return np.concatenate([np.arange(s), np.arange(n_t - 1, s - 1, -1)])


@dataclass(frozen=True)
class BranchPlan:
    """Detection orders for multi-branch SIC: column-norm order first, then patterns."""

    num_branches: int
    perms: tuple[tuple[int, ...], ...]
    shifts: tuple[int | None, ...]

    def __post_init__(self):
        n_t = len(self.perms[0])
        for perm in self.perms:
            if sorted(perm) != list(range(n_t)):
                raise ValueError(f"not a permutation of 0..{n_t - 1}: {perm}")
        if not 1 <= self.num_branches <= n_t:
            raise ValueError(f"need 1 <= L <= n_t, got L={self.num_branches}, n_t={n_t}")


def build_branch_plan(basis, num_branches: int) -> BranchPlan:
    """Branch plan over the columns of ``basis``: norm order, then L-1 patterns."""
    basis = as_complex_matrix(basis, "basis")
    n_t = basis.shape[1]
    if not 1 <= num_branches <= n_t:
        raise ValueError(f"need 1 <= L <= n_t, got L={num_branches}, n_t={n_t}")
    perms = [tuple(int(i) for i in column_norm_order(basis))]
    shifts: list[int | None] = [None]
    for l in range(2, num_branches + 1):
        perms.append(tuple(int(i) for i in psp_permutation(n_t, l, num_branches)))
        shifts.append(psp_shift(n_t, l, num_branches))
    return BranchPlan(num_branches=num_branches, perms=tuple(perms), shifts=tuple(shifts))


# ---------------------------------------------------------------------------
# Filtering and quantization primitives
# ---------------------------------------------------------------------------


def mmse_filter(h_eff, k_x, sigma_n2: float) -> np.ndarray:
    """MMSE filter W for y = H x + n with signal covariance K_x: estimate = Wᴴ y.

    Wᴴ = K_x Hᴴ (H K_x Hᴴ + σ_n² I)⁻¹, evaluated through the equivalent
    (Hᴴ H + σ_n² K_x⁻¹)⁻¹ Hᴴ form, which stays well-posed as σ_n² → 0 for a
    full-column-rank H (zero-forcing limit).
    """
    h = as_complex_matrix(h_eff, "H_eff")
    k_x = as_complex_matrix(k_x, "K_x")
    check_hermitian(k_x, 1e-9, "K_x")
    if sigma_n2 < 0:
        raise ValueError(f"sigma_n2 must be >= 0, got {sigma_n2}")
    if k_x.shape[0] != h.shape[1]:
        raise ValueError(f"K_x shape {k_x.shape} does not match H columns {h.shape[1]}")
    gram = h.conj().T @ h
    if sigma_n2 > 0:
        k_inv = solve_hermitian_psd(k_x, np.eye(k_x.shape[0], dtype=np.complex128))
        gram = gram + sigma_n2 * k_inv
    gram = 0.5 * (gram + gram.conj().T)
    w_h = solve_hermitian_psd(gram, h.conj().T)
    return w_h.conj().T


def lr_quantize(z_tilde, t_inv_row_sum, kappa: complex = KAPPA):
    """Quantize lattice-domain estimates onto the shifted lattice 2·(Z+jZ) + κσ.

    σ is the row sum of the matching T⁻¹ row; rounding treats real and
    imaginary parts independently, halves away from zero. Accepts scalars
    or arrays (broadcast together).
    """
    z = np.asarray(z_tilde, dtype=np.complex128)
    shift = kappa * np.asarray(t_inv_row_sum, dtype=np.complex128)
    quantized = 2.0 * lattice.gaussian_round((z - shift) / 2.0) + shift
    if np.isscalar(z_tilde) or quantized.ndim == 0:
        return complex(quantized)
    return quantized


def select_best_candidate(y, h, candidates) -> tuple[int, np.ndarray]:
    """Pick the candidate minimizing ‖y − H·ŝ‖²; ties go to the lowest index."""
    y = as_complex_vector(y, "y")
    h = as_complex_matrix(h, "H")
    cands = [as_complex_vector(cand, "candidate") for cand in candidates]
    if not cands:
        raise ValueError("candidate set must be non-empty")
    residuals = [float(np.sum(np.abs(y - h @ cand) ** 2)) for cand in cands]
    idx = int(np.argmin(residuals))
    return idx, cands[idx]


# ---------------------------------------------------------------------------
# SIC machinery shared by all ordered-cancellation detectors
# ---------------------------------------------------------------------------


def _stage_filters(h_perm: np.ndarray, cov: np.ndarray, noise_var: float):
    """Front-to-back MMSE stage filters for one detection order.

    Stage i detects the first remaining column; the filter is rebuilt from
    scratch on the shrunken system at every stage, with the matching
    covariance sub-block.
    """
    stages = []
    h_cur, k_cur = h_perm, cov
    for _ in range(h_perm.shape[1]):
        w = mmse_filter(h_cur, k_cur, noise_var)
        stages.append((w[:, 0].conj(), h_cur[:, 0].copy()))
        h_cur = h_cur[:, 1:]
        k_cur = k_cur[1:, 1:]
    return stages


def _run_sic(y_mat: np.ndarray, stages, quantize) -> np.ndarray:
    """Run the cancellation loop on a batch; returns stage decisions (n, n_t)."""
    n_vec = y_mat.shape[0]
    n_stages = len(stages)
    decisions = np.empty((n_vec, n_stages), dtype=np.complex128)
    y_cur = y_mat.copy()
    for i, (w_conj, col) in enumerate(stages):
        estimates = y_cur @ w_conj
        decided = quantize(i, estimates)
        decisions[:, i] = decided
        if i < n_stages - 1:
            y_cur -= decided[:, np.newaxis] * col[np.newaxis, :]
    return decisions


# ---------------------------------------------------------------------------
# Estimator classes
# ---------------------------------------------------------------------------


class _ChannelDetector(BaseEstimator):
    """Common plumbing: channel validation, batch dispatch, residual selection."""

    name = "base"

    def _fit_channel(self, channel, noise_var: float) -> np.ndarray:
        h = as_complex_matrix(channel, "channel")
        if noise_var < 0:
            raise ValueError(f"noise_var must be >= 0, got {noise_var}")
        self.constellation_: Constellation = build_constellation(self.modulation)
        self.channel_ = h
        self.noise_var_ = float(noise_var)
        return h

    def predict(self, received) -> np.ndarray:
        """Detect received vectors; 1-D input gives a 1-D symbol vector back."""
        check_is_fitted(self, "channel_")
        y = np.asarray(received, dtype=np.complex128)
        single = y.ndim == 1
        y_mat = np.atleast_2d(y)
        if y_mat.ndim != 2 or y_mat.shape[1] != self.channel_.shape[0]:
            raise ValueError(
                f"received shape {np.shape(received)} does not match channel rows {self.channel_.shape[0]}"
            )
        out = self._predict_batch(y_mat)
        return out[0] if single else out

    def _predict_batch(self, y_mat: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _pick_best(self, y_mat: np.ndarray, candidates: np.ndarray) -> np.ndarray:
        """Per-vector argmin of ‖y − H ŝ_l‖² across the branch axis (ties: lowest branch)."""
        residuals = self._branch_residuals(y_mat, candidates)
        best = np.argmin(residuals, axis=0)
        return candidates[best, np.arange(y_mat.shape[0]), :]

    def _branch_residuals(self, y_mat: np.ndarray, candidates: np.ndarray) -> np.ndarray:
        h_t = self.channel_.T
        residuals = np.empty((candidates.shape[0], y_mat.shape[0]), dtype=np.float64)
        for b in range(candidates.shape[0]):
            diff = y_mat - candidates[b] @ h_t
            residuals[b] = np.sum(np.abs(diff) ** 2, axis=1)
        return residuals


class MLDetector(_ChannelDetector):
    """Exhaustive maximum-likelihood detection over all M^{n_t} candidates.

    Refuses constellations with more than MAX_ML_BITS total bits per vector.
    Ties break toward the lexicographically first candidate (streams ordered
    by label, first stream most significant).
    """

    name = "ML"

    def __init__(self, modulation: int = 4):
        self.modulation = modulation

    def fit(self, channel, noise_var: float) -> "MLDetector":
        h = self._fit_channel(channel, noise_var)
        c = self.constellation_
        n_t = h.shape[1]
        total_bits = n_t * c.bits_per_symbol
        if total_bits > MAX_ML_BITS:
            raise ValueError(
                f"ML too large: {total_bits} candidate bits exceed the {MAX_ML_BITS}-bit cap"
            )
        cache_key = (c.order, n_t)
        if getattr(self, "_candidate_key", None) != cache_key:
            self._candidates = _candidate_matrix(c, n_t)
            self._candidate_key = cache_key
        self.candidates_hs_ = self._candidates @ h.T
        self.candidates_norm2_ = np.sum(np.abs(self.candidates_hs_) ** 2, axis=1)
        self._hs_re = np.ascontiguousarray(self.candidates_hs_.real)
        self._hs_im = np.ascontiguousarray(self.candidates_hs_.imag)
        return self

    # Vectors per chunk are sized so each chunk's metric block stays small
    # enough to live in cache: per-vector cost then tracks the candidate
    # count (the enumeration size) instead of the memory hierarchy.
    _CHUNK_ELEMENTS = 1 << 10
    _MIN_CHUNK = 16

    def _predict_batch(self, y_mat: np.ndarray) -> np.ndarray:
        n_cand = self.candidates_hs_.shape[0]
        out = np.empty((y_mat.shape[0], self._candidates.shape[1]), dtype=np.complex128)
        chunk = max(self._MIN_CHUNK, self._CHUNK_ELEMENTS // n_cand)
        for start in range(0, y_mat.shape[0], chunk):
            block = y_mat[start : start + chunk]
            # ‖y − Hs‖² = ‖y‖² − 2·Re⟨y, Hs⟩ + ‖Hs‖²; the ‖y‖² term is
            # constant per row and dropped from the argmin metric. Only the
            # real part of the cross term is needed, so two real GEMMs in a
            # candidates-major layout keep every pass linear in the
            # candidate count.
            yt_re = np.ascontiguousarray(block.real.T)
            yt_im = np.ascontiguousarray(block.imag.T)
            cross = self._hs_re @ yt_re
            cross += self._hs_im @ yt_im
            cross *= -2.0
            cross += self.candidates_norm2_[:, np.newaxis]
            best = cross.min(axis=0)
            idx = (cross <= best[np.newaxis, :]).argmax(axis=0)
            out[start : start + chunk] = self._candidates[idx]
        return out


def _candidate_matrix(c: Constellation, n_streams: int) -> np.ndarray:
    """All M^{n_streams} candidate vectors in lexicographic label order."""
    n_cand = c.order**n_streams
    idx = np.arange(n_cand)
    cols = []
    for t in range(n_streams):
        digit = (idx // (c.order ** (n_streams - 1 - t))) % c.order
        cols.append(c.points[digit])
    return np.column_stack(cols)


class _SicFamilyDetector(_ChannelDetector):
    """Shared fit/predict for constellation-domain SIC with 1..L branches."""

    def _effective_branches(self, n_t: int) -> int:
        raise NotImplementedError

    def fit(self, channel, noise_var: float):
        h = self._fit_channel(channel, noise_var)
        c = self.constellation_
        n_t = h.shape[1]
        num_branches = self._effective_branches(n_t)
        self.plan_ = build_branch_plan(h, num_branches)
        cov = c.sigma_s2 * np.eye(n_t, dtype=np.complex128)
        self.branches_ = []
        for perm in self.plan_.perms:
            perm = np.asarray(perm)
            stages = _stage_filters(h[:, perm], cov, self.noise_var_)
            self.branches_.append((perm, stages))
        return self

    def branch_candidates(self, received) -> tuple[np.ndarray, np.ndarray]:
        """Per-branch candidates (L, n, n_t) and residuals (L, n) for a batch."""
        check_is_fitted(self, "branches_")
        y_mat = np.atleast_2d(np.asarray(received, dtype=np.complex128))
        cands = self._branch_candidates(y_mat)
        return cands, self._branch_residuals(y_mat, cands)

    def _branch_candidates(self, y_mat: np.ndarray) -> np.ndarray:
        c = self.constellation_
        n_t = self.channel_.shape[1]
        cands = np.empty((len(self.branches_), y_mat.shape[0], n_t), dtype=np.complex128)
        for b, (perm, stages) in enumerate(self.branches_):
            decisions = _run_sic(y_mat, stages, lambda _i, z: slice_symbols(z, c))
            cands[b][:, perm] = decisions
        return cands

    def _predict_batch(self, y_mat: np.ndarray) -> np.ndarray:
        cands = self._branch_candidates(y_mat)
        if cands.shape[0] == 1:
            return cands[0]
        return self._pick_best(y_mat, cands)


class SicDetector(_SicFamilyDetector):
    """MMSE-SIC in the constellation domain, strongest column detected first."""

    name = "SIC"

    def __init__(self, modulation: int = 4):
        self.modulation = modulation

    def _effective_branches(self, n_t: int) -> int:
        return 1


class MbSicDetector(_SicFamilyDetector):
    """Multi-branch SIC: column-norm order plus pre-stored patterns, best residual wins."""

    name = "MB-SIC"

    def __init__(self, modulation: int = 4, num_branches: int | None = None):
        self.modulation = modulation
        self.num_branches = num_branches

    def _effective_branches(self, n_t: int) -> int:
        return n_t if self.num_branches is None else self.num_branches


class _LrSicFamilyDetector(_ChannelDetector):
    """Shared fit/predict for lattice-reduced SIC with 1..L branches.

    One lattice reduction per fit serves every branch. By default
    (``lr_extend=True``) the reduced basis is the noise-scaled extension
    [H; sqrt(σ_n²/σ_s²)·I], whose zero-noise stage filters realize the MMSE
    equalizer of the original system; the unimodular transform then adapts
    to the operating SNR and degrades gracefully toward plain SIC in the
    noise-dominated regime. With ``lr_extend=False`` the channel matrix
    itself is reduced and each stage applies an MMSE filter whose signal
    covariance follows the reduced-domain signal z = T⁻¹s, which is not
    white: the default is K_z = σ_s²·(P_lᵀT⁻¹)(P_lᵀT⁻¹)ᴴ with rows/columns
    dropped as streams cancel; ``lr_mmse_white`` switches to the σ_s²·I
    approximation.
    """

    def _effective_branches(self, n_t: int) -> int:
        raise NotImplementedError

    def fit(self, channel, noise_var: float):
        h = self._fit_channel(channel, noise_var)
        c = self.constellation_
        n_t = h.shape[1]
        if self.lr_extend:
            scale = np.sqrt(self.noise_var_ / c.sigma_s2)
            basis = np.vstack([h, scale * np.eye(n_t, dtype=np.complex128)])
            stage_noise = 0.0
        else:
            basis = h
            stage_noise = self.noise_var_
        self.extended_ = bool(self.lr_extend)
        self.reduction_ = lattice.clll_reduce(basis, self.delta_lll)
        h_tilde = self.reduction_.h_tilde
        t_inv = self.reduction_.t_inv
        row_sums = t_inv.sum(axis=1)
        num_branches = self._effective_branches(n_t)
        self.plan_ = build_branch_plan(h_tilde, num_branches)
        self.branches_ = []
        for perm in self.plan_.perms:
            perm = np.asarray(perm)
            if self.lr_mmse_white:
                cov = c.sigma_s2 * np.eye(n_t, dtype=np.complex128)
            else:
                t_inv_perm = t_inv[perm, :]
                cov = c.sigma_s2 * (t_inv_perm @ t_inv_perm.conj().T)
                cov = 0.5 * (cov + cov.conj().T)
            stages = _stage_filters(h_tilde[:, perm], cov, stage_noise)
            self.branches_.append((perm, stages, row_sums[perm]))
        return self

    def branch_candidates(self, received) -> tuple[np.ndarray, np.ndarray]:
        """Per-branch candidates (L, n, n_t) and residuals (L, n) for a batch."""
        check_is_fitted(self, "branches_")
        y_mat = np.atleast_2d(np.asarray(received, dtype=np.complex128))
        cands = self._branch_candidates(y_mat)
        return cands, self._branch_residuals(y_mat, cands)

    def _branch_candidates(self, y_mat: np.ndarray) -> np.ndarray:
        c = self.constellation_
        n_t = self.channel_.shape[1]
        t_mat_t = self.reduction_.t.T
        if self.extended_:
            # The extension rows observe 0·s; the matching received entries are 0.
            pad = np.zeros((y_mat.shape[0], n_t), dtype=np.complex128)
            y_mat = np.concatenate([y_mat, pad], axis=1)
        cands = np.empty((len(self.branches_), y_mat.shape[0], n_t), dtype=np.complex128)
        z_full = np.empty((y_mat.shape[0], n_t), dtype=np.complex128)
        for b, (perm, stages, shifts) in enumerate(self.branches_):
            decisions = _run_sic(
                y_mat, stages, lambda i, z, _s=shifts: lr_quantize(z, _s[i])
            )
            z_full[:, perm] = decisions
            # Back to the constellation domain, then project onto the grid.
            cands[b] = slice_symbols(z_full @ t_mat_t, c)
        return cands

    def _predict_batch(self, y_mat: np.ndarray) -> np.ndarray:
        cands = self._branch_candidates(y_mat)
        if cands.shape[0] == 1:
            return cands[0]
        return self._pick_best(y_mat, cands)


class LrSicDetector(_LrSicFamilyDetector):
    """Lattice-reduced MMSE-SIC, single branch with column-norm ordering of H̃."""

    name = "LR-SIC"

    def __init__(
        self,
        modulation: int = 4,
        delta_lll: float = lattice.DEFAULT_DELTA_LLL,
        lr_mmse_white: bool = False,
        lr_extend: bool = True,
    ):
        self.modulation = modulation
        self.delta_lll = delta_lll
        self.lr_mmse_white = lr_mmse_white
        self.lr_extend = lr_extend

    def _effective_branches(self, n_t: int) -> int:
        return 1


class MbLrSicDetector(_LrSicFamilyDetector):
    """Multi-branch lattice-reduced SIC with maximum-likelihood branch selection.

    One CLLL reduction of the channel serves all branches; branch 1 orders
    the reduced columns by descending norm, branches 2..L apply the
    pre-stored patterns. The candidate with minimal ‖y − H ŝ_l‖² wins,
    ties to the lowest branch index.
    """

    name = "MB-LR-SIC"

    def __init__(
        self,
        modulation: int = 4,
        num_branches: int | None = None,
        delta_lll: float = lattice.DEFAULT_DELTA_LLL,
        lr_mmse_white: bool = False,
        lr_extend: bool = True,
    ):
        self.modulation = modulation
        self.num_branches = num_branches
        self.delta_lll = delta_lll
        self.lr_mmse_white = lr_mmse_white
        self.lr_extend = lr_extend

    def _effective_branches(self, n_t: int) -> int:
        return n_t if self.num_branches is None else self.num_branches


DETECTOR_REGISTRY = {
    cls.name: cls
    for cls in (MLDetector, SicDetector, MbSicDetector, LrSicDetector, MbLrSicDetector)
}


def make_detector(name: str, modulation: int, **kwargs) -> _ChannelDetector:
    """Instantiate a detector by its registry name (the CSV detector column)."""
    if name not in DETECTOR_REGISTRY:
        raise ValueError(f"unknown detector name {name!r}: choose from {sorted(DETECTOR_REGISTRY)}")
    cls = DETECTOR_REGISTRY[name]
    accepted = {k: v for k, v in kwargs.items() if k in cls().get_params()}
    return cls(modulation=modulation, **accepted)
