"""End-to-end acceptance checks for the detection library.

Every test covers one headline guarantee, reuses the shipped experiment
configs as the single source of truth, and pins its tolerance explicitly.
Run with ``pytest -v`` to get one PASS/FAIL line per criterion.
"""

from __future__ import annotations

import importlib.resources
import time
from dataclasses import replace

import numpy as np
import pytest

from mumimo.channel import RlsChannelEstimator, transmit
from mumimo.cli import parse_config
from mumimo.detectors import MbLrSicDetector, MLDetector, make_detector
from mumimo.lattice import clll_reduce, gaussian_round, orthogonality_defect
from mumimo.modem import build_constellation, noise_variance_for_snr
from mumimo.simulate import bench_detectors, run_ber_sweep

from conftest import report_criterion
from helpers import (
    brute_force_ml,
    ordering_consistent,
    snr_at_ber,
    well_conditioned_channel,
)

DETECTOR_CHAIN = ("ML", "MB-LR-SIC", "LR-SIC", "SIC")  # best to worst
ALL_NAMES = ("ML", "SIC", "MB-SIC", "LR-SIC", "MB-LR-SIC")


def load_shipped_config(name):
    text = (importlib.resources.files("mumimo") / "configs" / name).read_text()
    return parse_config(text)


def timed_sweep(cfg):
    start = time.monotonic()
    records = run_ber_sweep(cfg)
    return records, time.monotonic() - start


def curves(records):
    """{detector: {snr: record}} lookup."""
    out = {}
    for rec in records:
        out.setdefault(rec.detector, {})[rec.snr_db] = rec
    return out


def assert_ordering_chain(records, label):
    """BER(ML) <= BER(MB-LR-SIC) <= BER(LR-SIC) <= BER(SIC) at every SNR,
    consistent with 95% binomial (Wilson) intervals."""
    table = curves(records)
    snrs = sorted(table[DETECTOR_CHAIN[0]])
    for better, worse in zip(DETECTOR_CHAIN, DETECTOR_CHAIN[1:]):
        for snr in snrs:
            lo = table[better][snr]
            hi = table[worse][snr]
            assert ordering_consistent(
                lo.bit_errors, lo.bits, hi.bit_errors, hi.bits
            ), (
                f"{label}: {better} (BER {lo.ber:.3e}) significantly above "
                f"{worse} (BER {hi.ber:.3e}) at {snr} dB"
            )


def db_gap_at(records, target_ber):
    table = curves(records)
    as_curve = lambda det: sorted((s, r.ber) for s, r in table[det].items())
    return snr_at_ber(as_curve("MB-LR-SIC"), target_ber) - snr_at_ber(
        as_curve("ML"), target_ber
    )


@pytest.fixture(scope="module")
def qpsk_sweep():
    return timed_sweep(load_shipped_config("qpsk_iid.yaml"))


@pytest.fixture(scope="module")
def qam16_sweep():
    return timed_sweep(load_shipped_config("qam16_iid.yaml"))


@pytest.fixture(scope="module")
def realistic_sweep():
    return timed_sweep(load_shipped_config("qpsk_realistic.yaml"))


@pytest.fixture(scope="module")
def estimation_sweeps():
    base = load_shipped_config("qpsk_estimation.yaml")
    assert base.training_len == 50 and base.rls_forgetting == 1.0
    return {
        length: run_ber_sweep(replace(base, training_len=length))
        for length in (10, 50, 200)
    }


def test_lattice_reduction_invariants_on_random_batch():
    rng = np.random.default_rng(2026)
    start = time.monotonic()
    for _ in range(1000):
        n = int(rng.integers(2, 9))
        h = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2)
        red = clll_reduce(h)
        assert abs(abs(np.linalg.det(red.t)) - 1.0) <= 1e-6
        assert np.max(np.abs(red.t - gaussian_round(red.t))) < 1e-9
        assert np.max(np.abs(red.t_inv - gaussian_round(red.t_inv))) < 1e-9
        assert np.max(np.abs(red.h_tilde - h @ red.t)) <= 1e-9
        assert orthogonality_defect(red.h_tilde) <= orthogonality_defect(h) + 1e-9
    elapsed = time.monotonic() - start
    assert elapsed < 30.0, f"reduction batch took {elapsed:.1f}s"
    report_criterion(
        f"PASS reduction invariants: 1000 random bases 2x2..8x8, |det T|=1 +/-1e-6, "
        f"Gaussian-integer T/T^-1 <1e-9, H~=HT +/-1e-9, defect never worse +1e-9, "
        f"{elapsed:.1f}s < 30s"
    )


def test_exhaustive_oracle_match_and_branch_dominance():
    rng = np.random.default_rng(77)
    c = build_constellation(4)
    sigma_n2 = {n: noise_variance_for_snr(12.0, n, c.sigma_s2) for n in (2, 3)}
    start = time.monotonic()
    for n_t in (2, 3):
        for _ in range(500):
            h = (
                rng.normal(size=(n_t, n_t)) + 1j * rng.normal(size=(n_t, n_t))
            ) / np.sqrt(2)
            labels = rng.integers(0, 4, size=(4, n_t))
            y = transmit(h, c.points[labels], sigma_n2[n_t], rng)

            ml = MLDetector(4).fit(h, sigma_n2[n_t])
            np.testing.assert_array_equal(
                ml.predict(y), brute_force_ml(y, h, c.points)
            )

            mb = MbLrSicDetector(4).fit(h, sigma_n2[n_t])
            _, branch_res = mb.branch_candidates(y)
            final = np.sum(np.abs(y - mb.predict(y) @ h.T) ** 2, axis=1)
            assert np.all(final <= branch_res.min(axis=0) + 1e-9)
    elapsed = time.monotonic() - start
    assert elapsed < 60.0, f"oracle batch took {elapsed:.1f}s"
    report_criterion(
        f"PASS exhaustive-search oracle: 500 random 2x2 + 500 random 3x3 QPSK "
        f"instances at 12 dB match enumeration exactly; final multi-branch "
        f"residual <= every branch residual (+1e-9); {elapsed:.1f}s < 60s"
    )


@pytest.mark.parametrize("order", [4, 16])
def test_noiseless_recovery_for_all_detectors(order):
    rng = np.random.default_rng(55 + order)
    c = build_constellation(order)
    sigma_n2 = noise_variance_for_snr(30.0, 4, c.sigma_s2)
    detectors = {name: make_detector(name, order) for name in ALL_NAMES}
    for _ in range(100):
        h = well_conditioned_channel(rng, 4, 4)
        labels = rng.integers(0, order, size=(10, 4))
        s = c.points[labels]
        y = s @ h.T
        for name, det in detectors.items():
            np.testing.assert_array_equal(
                det.fit(h, sigma_n2).predict(y), s, err_msg=name
            )
    report_criterion(
        f"PASS noiseless exactness ({order}-point constellation): all five "
        f"detectors recover 100 well-conditioned 4x4 instances bit-exactly"
    )


def test_qpsk_curve_ordering_and_near_optimal_gap(qpsk_sweep):
    records, elapsed = qpsk_sweep
    assert elapsed < 600.0, f"sweep took {elapsed:.0f}s"
    assert all(rec.bits >= 2e5 for rec in records)
    assert_ordering_chain(records, "QPSK i.i.d.")
    gap = db_gap_at(records, 1e-3)
    assert gap <= 1.0, f"MB-LR-SIC is {gap:.2f} dB from exhaustive search at BER 1e-3"
    report_criterion(
        f"PASS QPSK curves: ML<=MB-LR-SIC<=LR-SIC<=SIC at all 9 points within 95% "
        f"binomial intervals, {records[0].bits} bits/point, gap at BER 1e-3 = "
        f"{gap:.2f} dB <= 1.0 dB, sweep {elapsed:.0f}s < 600s"
    )


def test_16qam_curve_ordering_and_near_optimal_gap(qam16_sweep):
    records, elapsed = qam16_sweep
    assert elapsed < 600.0, f"sweep took {elapsed:.0f}s"
    assert all(rec.bits >= 2e5 for rec in records)
    assert_ordering_chain(records, "16-QAM i.i.d.")
    gap = db_gap_at(records, 1e-2)
    assert gap <= 1.5, f"MB-LR-SIC is {gap:.2f} dB from exhaustive search at BER 1e-2"
    report_criterion(
        f"PASS 16-QAM curves: same ordering at all 9 points within 95% binomial "
        f"intervals, {records[0].bits} bits/point, gap at BER 1e-2 = {gap:.2f} dB "
        f"<= 1.5 dB, sweep {elapsed:.0f}s < 600s"
    )


def test_estimated_csi_tracks_perfect_csi(qpsk_sweep, estimation_sweeps):
    perfect, _ = qpsk_sweep
    perfect_curves = curves(perfect)
    gaps = {}
    for length, records in estimation_sweeps.items():
        est_curves = curves(records)
        for det in ALL_NAMES:
            ref = sorted((s, r.ber) for s, r in perfect_curves[det].items())
            est = sorted((s, r.ber) for s, r in est_curves[det].items())
            gaps.setdefault(det, {})[length] = snr_at_ber(est, 1e-2) - snr_at_ber(
                ref, 1e-2
            )
    for det, g in gaps.items():
        assert g[50] <= 2.0, f"{det}: estimated CSI costs {g[50]:.2f} dB at BER 1e-2"
        assert g[10] > g[50] > g[200], (
            f"{det}: estimation gap not shrinking with training length: "
            f"{g[10]:.2f} -> {g[50]:.2f} -> {g[200]:.2f} dB"
        )
    summary = ", ".join(f"{det} {g[50]:+.2f} dB" for det, g in gaps.items())
    report_criterion(
        f"PASS channel estimation: 50 recursive training vectors put every "
        f"detector within 2 dB of perfect CSI at BER 1e-2 ({summary}); gap "
        f"shrinks monotonically over training lengths 10 -> 50 -> 200"
    )


def test_correlated_fading_degrades_all_but_preserves_winner(
    qpsk_sweep, realistic_sweep
):
    iid_records, _ = qpsk_sweep
    fade_records, _ = realistic_sweep
    iid = curves(iid_records)
    fade = curves(fade_records)
    snrs = sorted(fade["ML"])
    assert set(snrs) <= set(iid["ML"]), "fading grid must be a subset for matching"
    for det in ALL_NAMES:
        for snr in snrs:
            assert fade[det][snr].ber > iid[det][snr].ber, (
                f"{det} did not degrade under path loss/shadowing/correlation "
                f"at {snr} dB: {fade[det][snr].ber:.3e} vs {iid[det][snr].ber:.3e}"
            )
    for rival in ("SIC", "LR-SIC"):
        for snr in snrs:
            assert fade["MB-LR-SIC"][snr].ber < fade[rival][snr].ber, (
                f"MB-LR-SIC lost to {rival} at {snr} dB under fading"
            )
    report_criterion(
        f"PASS correlated fading: every detector's BER strictly degrades vs the "
        f"i.i.d. scenario at all {len(snrs)} matched SNRs, and MB-LR-SIC stays "
        f"strictly below SIC and LR-SIC at every point"
    )


@pytest.mark.parametrize("forgetting", [1.0, 0.99])
def test_recursive_estimator_equals_batch_regularized_ls(forgetting):
    rng = np.random.default_rng(909)
    c = build_constellation(4)
    delta = 1e-3
    worst = 0.0
    for _ in range(5):
        h = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))) / np.sqrt(2)
        pilots = c.points[rng.integers(0, 4, size=(50, 4))]
        obs = transmit(h, pilots, 0.3, rng)
        est = RlsChannelEstimator(forgetting=forgetting, init_delta=delta)
        num = np.zeros((4, 4), dtype=complex)
        den = np.zeros((4, 4), dtype=complex)
        for i in range(50):
            est.partial_fit(pilots[i : i + 1], obs[i : i + 1])
            num = forgetting * num + np.outer(obs[i], pilots[i].conj())
            den = forgetting * den + np.outer(pilots[i], pilots[i].conj())
            reg = (forgetting ** (i + 1)) * delta * np.eye(4)
            batch = num @ np.linalg.inv(den + reg)
            rel = np.linalg.norm(est.estimate_ - batch) / np.linalg.norm(batch)
            worst = max(worst, rel)
            assert rel < 1e-6, f"step {i}: relative error {rel:.2e}"
    report_criterion(
        f"PASS recursive least squares (forgetting {forgetting}): matches the "
        f"batch regularized solution at every one of 50 steps x 5 sequences, "
        f"worst relative error {worst:.2e} < 1e-6"
    )


def test_detection_cost_scales_with_enumeration():
    from mumimo.simulate import SimConfig
    from mumimo.channel import SystemDimensions

    qpsk_cfg = SimConfig(
        dims=SystemDimensions((2,), 2),
        modulation=4,
        snr_grid_db=(12.0,),
        detectors=("ML",),
        runs=1,
        symbols_per_run=1,
        seed=7,
    )
    recs = bench_detectors(qpsk_cfg, [2, 3])
    per_size = {r.size: r.mean_s for r in recs}
    ratio = per_size[3] / per_size[2]
    assert 3.5 <= ratio <= 4.5, (
        f"exhaustive-search cost ratio 3-vs-2 streams is {ratio:.2f}, "
        f"expected the 4x enumeration growth within [3.5, 4.5]"
    )

    qam_cfg = replace(qpsk_cfg, modulation=16, detectors=("ML", "MB-LR-SIC"))
    recs16 = bench_detectors(qam_cfg, [4])
    per_det = {r.detector: r.mean_s for r in recs16}
    speedup = per_det["ML"] / per_det["MB-LR-SIC"]
    assert speedup >= 10.0, (
        f"MB-LR-SIC is only {speedup:.1f}x faster than exhaustive search "
        f"at 4x4 16-QAM, expected >= 10x"
    )
    report_criterion(
        f"PASS runtime scaling: QPSK exhaustive-search per-vector cost ratio "
        f"(3 vs 2 streams) = {ratio:.2f} in [3.5, 4.5]; at 4x4 16-QAM "
        f"MB-LR-SIC is {speedup:.0f}x faster than exhaustive search (>= 10x)"
    )
