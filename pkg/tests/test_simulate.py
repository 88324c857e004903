import io

import numpy as np
import pytest

from mumimo.channel import SystemDimensions, transmit
from mumimo.modem import build_constellation, noise_variance_for_snr
from mumimo.simulate import (
    BENCH_CSV_HEADER,
    BENCH_MAX_BATCH,
    SWEEP_CSV_HEADER,
    BenchRecord,
    SimConfig,
    bench_detectors,
    run_ber_sweep,
    run_trial,
    trial_rng,
    write_bench_csv,
    write_ber_csv,
)

from helpers import brute_force_ml, ordering_consistent


def small_cfg(**overrides):
    base = dict(
        dims=SystemDimensions((2,), 2),
        modulation=4,
        snr_grid_db=(10.0,),
        detectors=("ML", "SIC"),
        runs=3,
        symbols_per_run=40,
        seed=7,
    )
    base.update(overrides)
    return SimConfig(**base)


class TestConfigValidation:
    def test_rejects_zero_runs(self):
        with pytest.raises(ValueError, match="runs must be >= 1"):
            small_cfg(runs=0)

    def test_rejects_unknown_detector(self):
        with pytest.raises(ValueError, match="unknown detector name"):
            small_cfg(detectors=("ZF",))

    def test_rejects_fading_for_iid(self):
        from mumimo.channel import FadingConfig

        with pytest.raises(ValueError, match="only valid for the realistic scenario"):
            small_cfg(fading=FadingConfig(path_loss=0.5))

    def test_defaults_resolve_from_dimensions(self):
        cfg = SimConfig(
            dims=SystemDimensions((4, 4), 8),
            modulation=4,
            snr_grid_db=(0.0,),
            detectors=("SIC",),
        )
        assert cfg.branches == 8
        assert cfg.symbols_per_run == 800

    def test_rejects_out_of_range_branches(self):
        with pytest.raises(ValueError, match="branches must be in"):
            small_cfg(branches=3)


class TestTrialRng:
    def test_streams_are_reproducible(self):
        a = trial_rng(42, 1, 5).normal(size=4)
        b = trial_rng(42, 1, 5).normal(size=4)
        np.testing.assert_array_equal(a, b)

    def test_streams_differ_across_cells(self):
        draws = {
            (i, j): tuple(trial_rng(42, i, j).normal(size=2))
            for i in range(3)
            for j in range(3)
        }
        assert len(set(draws.values())) == 9


class TestRunBerSweep:
    def test_deterministic_apart_from_wall_time(self):
        cfg = small_cfg()
        a = run_ber_sweep(cfg)
        b = run_ber_sweep(cfg)
        strip = lambda recs: [
            (r.detector, r.snr_db, r.trials, r.bits, r.bit_errors, r.ber) for r in recs
        ]
        assert strip(a) == strip(b)

    def test_trials_are_shared_across_detector_subsets(self):
        full = run_ber_sweep(small_cfg(detectors=("ML", "SIC")))
        only = run_ber_sweep(small_cfg(detectors=("ML",)))
        ml_full = [r for r in full if r.detector == "ML"]
        ml_only = [r for r in only if r.detector == "ML"]
        assert [(r.snr_db, r.bit_errors) for r in ml_full] == [
            (r.snr_db, r.bit_errors) for r in ml_only
        ]

    def test_record_layout_and_bit_accounting(self):
        cfg = small_cfg(snr_grid_db=(0.0, 10.0))
        recs = run_ber_sweep(cfg)
        assert [r.detector for r in recs] == ["ML", "SIC", "ML", "SIC"]
        assert [r.snr_db for r in recs] == [0.0, 0.0, 10.0, 10.0]
        for r in recs:
            assert r.trials == cfg.runs * cfg.symbols_per_run
            assert r.bits == r.trials * 2 * 2  # n_t streams x 2 bits per symbol
            assert r.ber == r.bit_errors / r.bits
            assert r.elapsed_s >= 0

    def test_effectively_noiseless_point_has_zero_errors(self):
        cfg = small_cfg(
            dims=SystemDimensions((2, 2), 4),
            snr_grid_db=(200.0,),
            detectors=("ML", "SIC", "MB-SIC", "LR-SIC", "MB-LR-SIC"),
        )
        for rec in run_ber_sweep(cfg):
            assert rec.bit_errors == 0, rec.detector

    def test_empty_detector_list_yields_no_records(self):
        assert run_ber_sweep(small_cfg(detectors=())) == []

    def test_exhaustive_detector_ber_is_monotone_within_intervals(self):
        cfg = small_cfg(
            snr_grid_db=(0.0, 4.0, 8.0, 12.0),
            detectors=("ML",),
            runs=50,
            symbols_per_run=500,
        )
        recs = run_ber_sweep(cfg)
        assert recs[0].bits >= 1e5
        for lo, hi in zip(recs[1:], recs[:-1]):
            assert ordering_consistent(
                lo.bit_errors, lo.bits, hi.bit_errors, hi.bits
            ), f"BER rose from {hi.snr_db} to {lo.snr_db} dB beyond noise"

    def test_matches_independent_reimplementation(self):
        runs, symbols = 150, 80
        cfg = small_cfg(
            snr_grid_db=(10.0,), detectors=("ML",), runs=runs, symbols_per_run=symbols
        )
        rec = run_ber_sweep(cfg)[0]

        c = build_constellation(4)
        rng = np.random.default_rng(987654)
        sigma_n2 = noise_variance_for_snr(10.0, 2, c.sigma_s2)
        bits_per_run = symbols * 2 * 2
        run_bers = []
        for _ in range(runs):
            h = (
                rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            ) / np.sqrt(2)
            labels = rng.integers(0, 4, size=(symbols, 2))
            y = transmit(h, c.points[labels], sigma_n2, rng)
            decided = brute_force_ml(y, h, c.points)
            run_errors = int(np.bitwise_count(labels ^ c.labels_of(decided)).sum())
            run_bers.append(run_errors / bits_per_run)
        ber_independent = float(np.mean(run_bers))
        # Errors cluster by channel realization, so the run (not the bit) is
        # the independent sampling unit; both estimates share that dispersion.
        se_run = float(np.std(run_bers, ddof=1)) / np.sqrt(runs)
        tol = 3.0 * np.sqrt(2.0) * se_run
        assert abs(rec.ber - ber_independent) <= tol

    def test_estimated_csi_runs_and_degrades_gracefully(self):
        perfect = run_ber_sweep(small_cfg(runs=30, symbols_per_run=100))
        estimated = run_ber_sweep(
            small_cfg(runs=30, symbols_per_run=100, training_len=12)
        )
        for p, e in zip(perfect, estimated):
            assert e.bits == p.bits  # training pilots are not counted as payload
            assert e.bit_errors >= 0

    def test_detector_failure_is_reported_with_context(self):
        class Boom:
            def fit(self, *_args):
                raise RuntimeError("exploded")

        cfg = small_cfg(detectors=("SIC",))
        with pytest.raises(RuntimeError, match="detector SIC failed"):
            run_trial(cfg, 10.0, trial_rng(0, 0, 0), {"SIC": Boom()})


class TestBench:
    def test_records_for_each_cell(self):
        cfg = small_cfg(detectors=("SIC", "MB-LR-SIC"))
        recs = bench_detectors(cfg, [2, 3], min_invocations=5)
        assert [(r.detector, r.size) for r in recs] == [
            ("SIC", 2),
            ("MB-LR-SIC", 2),
            ("SIC", 3),
            ("MB-LR-SIC", 3),
        ]
        for r in recs:
            assert r.available
            assert r.invocations == 5
            assert 0 < r.mean_s < 1.0
            assert r.std_s >= 0
            assert 256 <= r.batch <= BENCH_MAX_BATCH

    def test_oversized_exhaustive_cell_is_marked_unavailable(self):
        cfg = small_cfg(modulation=16, detectors=("ML",))
        recs = bench_detectors(cfg, [6], min_invocations=5)
        assert len(recs) == 1
        assert not recs[0].available
        assert recs[0].batch == 0

    def test_empty_sizes_gives_no_records(self):
        assert bench_detectors(small_cfg(), [], min_invocations=5) == []


class TestCsvWriters:
    def test_sweep_rows_round_trip(self):
        recs = run_ber_sweep(small_cfg())
        buf = io.StringIO()
        write_ber_csv(recs, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == SWEEP_CSV_HEADER
        assert len(lines) == 1 + len(recs)
        for line, rec in zip(lines[1:], recs):
            fields = line.split(",")
            assert fields[0] == rec.detector
            assert float(fields[1]) == rec.snr_db
            assert int(fields[2]) == rec.trials
            assert int(fields[3]) == rec.bits
            assert int(fields[4]) == rec.bit_errors
            assert float(fields[5]) == rec.ber
            assert float(fields[6]) == pytest.approx(rec.elapsed_s, abs=1e-6)

    def test_bench_rows_including_unavailable(self):
        recs = [
            BenchRecord("SIC", 2, 8192, 100, 1.5e-6, 2e-7),
            BenchRecord("ML", 6, 0, 0, float("nan"), float("nan"), available=False),
        ]
        buf = io.StringIO()
        write_bench_csv(recs, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == BENCH_CSV_HEADER
        assert lines[1] == "SIC,2,8192,100,1.5e-06,2e-07"
        assert lines[2] == "ML,6,0,0,unavailable,unavailable"
