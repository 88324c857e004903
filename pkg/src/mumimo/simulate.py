"""Seeded Monte Carlo engine: BER sweeps, estimation experiments, benchmarks.

Reproducibility model: every (SNR index, trial index) cell gets its own RNG
stream derived from the master seed through numpy SeedSequence spawn keys.
Detectors consume no randomness, so the (channel, symbols, noise) triple a
trial sees is identical regardless of which detectors run — comparisons
between detectors are paired, and trials could run in parallel without
changing a single count.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .channel import (
    FadingConfig,
    RlsChannelEstimator,
    SystemDimensions,
    gen_iid_channel,
    gen_realistic_channel,
    transmit,
)
from .detectors import DETECTOR_REGISTRY, MAX_ML_BITS, make_detector
from .modem import build_constellation, noise_variance_for_snr

__all__ = [
    "SCENARIOS",
    "SWEEP_CSV_HEADER",
    "BENCH_CSV_HEADER",
    "SimConfig",
    "BerRecord",
    "BenchRecord",
    "TrialResult",
    "trial_rng",
    "run_trial",
    "run_ber_sweep",
    "bench_detectors",
    "write_ber_csv",
    "write_bench_csv",
]

logger = logging.getLogger(__name__)

SCENARIOS = ("iid", "realistic")

SWEEP_CSV_HEADER = "detector,snr_db,trials,bits,bit_errors,ber,elapsed_s"
BENCH_CSV_HEADER = "detector,size,batch,invocations,mean_s_per_vector,std_s_per_vector"

# Benchmark protocol constants: per-vector time is measured by predicting a
# fixed batch and dividing, because a single small detection is dominated by
# call overhead rather than arithmetic. The batch shrinks for huge candidate
# spaces to bound memory and wall time.
BENCH_SNR_DB = 12.0
BENCH_MIN_BATCH = 256
BENCH_MAX_BATCH = 8192
BENCH_ELEMENT_BUDGET = 1 << 23
BENCH_WARMUP = 3


@dataclass(frozen=True)
class SimConfig:
    """Full description of one Monte Carlo experiment.

    ``symbols_per_run=None`` resolves to 100·n_t, ``branches=None`` to n_t.
    ``fading`` is required when scenario is "realistic" and must be absent
    for "iid".
    """

    dims: SystemDimensions
    modulation: int
    snr_grid_db: tuple[float, ...]
    detectors: tuple[str, ...]
    runs: int = 200
    symbols_per_run: int | None = None
    training_len: int = 0
    scenario: str = "iid"
    fading: FadingConfig | None = None
    branches: int | None = None
    delta_lll: float = 0.99
    lr_mmse_white: bool = False
    lr_extend: bool = True
    rls_forgetting: float = 1.0
    rls_delta: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "snr_grid_db", tuple(float(v) for v in self.snr_grid_db))
        object.__setattr__(self, "detectors", tuple(str(v) for v in self.detectors))
        if self.symbols_per_run is None:
            object.__setattr__(self, "symbols_per_run", 100 * self.dims.n_t)
        if self.branches is None:
            object.__setattr__(self, "branches", self.dims.n_t)
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if self.symbols_per_run < 1:
            raise ValueError(f"symbols_per_run must be >= 1, got {self.symbols_per_run}")
        if self.training_len < 0:
            raise ValueError(f"training_len must be >= 0, got {self.training_len}")
        if len(self.snr_grid_db) == 0:
            raise ValueError("snr_grid_db must be non-empty")
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.scenario == "realistic" and self.fading is None:
            object.__setattr__(self, "fading", FadingConfig())
        if self.scenario == "iid" and self.fading is not None:
            raise ValueError("fading config is only valid for the realistic scenario")
        if not 1 <= self.branches <= self.dims.n_t:
            raise ValueError(f"branches must be in [1, n_t], got {self.branches}")
        unknown = [d for d in self.detectors if d not in DETECTOR_REGISTRY]
        if unknown:
            raise ValueError(f"unknown detector name(s) {unknown}: choose from {sorted(DETECTOR_REGISTRY)}")
        if not 0.0 < self.rls_forgetting <= 1.0:
            raise ValueError(f"rls_forgetting must be in (0, 1], got {self.rls_forgetting}")
        if self.rls_delta <= 0:
            raise ValueError(f"rls_delta must be positive, got {self.rls_delta}")
        if self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed}")


@dataclass(frozen=True)
class BerRecord:
    """One sweep cell. ``trials`` counts detected symbol vectors, so
    bits = trials × n_t × bits_per_symbol. ``elapsed_s`` is cumulative
    detection wall time (fit + predict) and is the one field that is not
    reproducible bit-for-bit."""

    detector: str
    snr_db: float
    trials: int
    bits: int
    bit_errors: int
    ber: float
    elapsed_s: float


@dataclass(frozen=True)
class BenchRecord:
    """One benchmark cell: per-vector detection time at N_t = N_r = size."""

    detector: str
    size: int
    batch: int
    invocations: int
    mean_s: float
    std_s: float
    available: bool = True


@dataclass(frozen=True)
class TrialResult:
    bit_errors: int
    elapsed_s: float


def trial_rng(seed: int, snr_index: int, trial_index: int) -> np.random.Generator:
    """Independent per-(SNR, trial) stream derived from the master seed."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(snr_index, trial_index))
    return np.random.default_rng(ss)


@lru_cache(maxsize=None)
def _popcount_table(order: int) -> np.ndarray:
    return np.array([bin(v).count("1") for v in range(order)], dtype=np.int64)


def _build_detectors(cfg: SimConfig) -> dict:
    return {
        name: make_detector(
            name,
            cfg.modulation,
            num_branches=cfg.branches,
            delta_lll=cfg.delta_lll,
            lr_mmse_white=cfg.lr_mmse_white,
            lr_extend=cfg.lr_extend,
        )
        for name in cfg.detectors
    }


def _draw_channel(cfg: SimConfig, rng: np.random.Generator) -> np.ndarray:
    if cfg.scenario == "realistic":
        return gen_realistic_channel(cfg.dims, cfg.fading, rng)
    return gen_iid_channel(cfg.dims, rng)


def run_trial(cfg: SimConfig, snr_db: float, rng: np.random.Generator, detectors=None):
    """One channel realization: optional RLS training, then a symbol burst.

    Detection always runs against the receiver's channel knowledge (the RLS
    estimate when ``training_len > 0``) while the observations are generated
    with the true channel. Returns {detector name: TrialResult}.
    """
    c = build_constellation(cfg.modulation)
    dims = cfg.dims
    sigma_n2 = noise_variance_for_snr(snr_db, dims.n_t, c.sigma_s2)
    h = _draw_channel(cfg, rng)
    h_known = h
    if cfg.training_len > 0:
        pilot_labels = rng.integers(0, c.order, size=(cfg.training_len, dims.n_t))
        pilots = c.points[pilot_labels]
        pilot_obs = transmit(h, pilots, sigma_n2, rng)
        estimator = RlsChannelEstimator(forgetting=cfg.rls_forgetting, init_delta=cfg.rls_delta)
        estimator.fit(pilots, pilot_obs)
        h_known = estimator.estimate_

    labels = rng.integers(0, c.order, size=(cfg.symbols_per_run, dims.n_t))
    symbols = c.points[labels]
    y = transmit(h, symbols, sigma_n2, rng)

    if detectors is None:
        detectors = _build_detectors(cfg)
    popcount = _popcount_table(c.order)
    results = {}
    for name in cfg.detectors:
        det = detectors[name]
        start = time.perf_counter()
        try:
            det.fit(h_known, sigma_n2)
            decided = det.predict(y)
        except Exception as exc:
            raise RuntimeError(
                f"detector {name} failed at snr={snr_db} dB: {exc}"
            ) from exc
        elapsed = time.perf_counter() - start
        errors = int(popcount[labels ^ c.labels_of(decided)].sum())
        results[name] = TrialResult(bit_errors=errors, elapsed_s=elapsed)
    return results


def run_ber_sweep(cfg: SimConfig) -> list[BerRecord]:
    """Aggregate ``cfg.runs`` trials per SNR point into one BerRecord per detector."""
    detectors = _build_detectors(cfg)
    c = build_constellation(cfg.modulation)
    bits_per_vector = cfg.dims.n_t * c.bits_per_symbol
    records: list[BerRecord] = []
    for snr_index, snr_db in enumerate(cfg.snr_grid_db):
        errors = dict.fromkeys(cfg.detectors, 0)
        elapsed = dict.fromkeys(cfg.detectors, 0.0)
        for trial_index in range(cfg.runs):
            rng = trial_rng(cfg.seed, snr_index, trial_index)
            for name, result in run_trial(cfg, snr_db, rng, detectors).items():
                errors[name] += result.bit_errors
                elapsed[name] += result.elapsed_s
        vectors = cfg.runs * cfg.symbols_per_run
        bits = vectors * bits_per_vector
        for name in cfg.detectors:
            records.append(
                BerRecord(
                    detector=name,
                    snr_db=float(snr_db),
                    trials=vectors,
                    bits=bits,
                    bit_errors=errors[name],
                    ber=errors[name] / bits,
                    elapsed_s=elapsed[name],
                )
            )
        if logger.isEnabledFor(logging.INFO):
            summary = ", ".join(
                f"{name}={errors[name] / bits:.3e}" for name in cfg.detectors
            )
            logger.info("snr %.1f dB done: %s", snr_db, summary)
    return records


def bench_detectors(cfg: SimConfig, sizes, min_invocations: int = 100) -> list[BenchRecord]:
    """Per-vector wall time of each configured detector at N_t = N_r = size.

    For each cell a fixed channel and symbol batch are drawn, the detector is
    fitted once (per-realization work amortizes over the burst, as in the
    sweep), and ``predict`` is timed over >= ``min_invocations`` warm calls.
    ML cells beyond the enumeration cap are reported as unavailable.
    """
    c = build_constellation(cfg.modulation)
    records: list[BenchRecord | None] = []
    cells = []
    for size in sizes:
        dims = SystemDimensions((size,), size)
        sized_cfg = replace(cfg, dims=dims, branches=None, fading=None, scenario="iid")
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=int(cfg.seed), spawn_key=(0xBE7C4, size))
        )
        h = gen_iid_channel(dims, rng)
        sigma_n2 = noise_variance_for_snr(BENCH_SNR_DB, size, c.sigma_s2)
        for name in cfg.detectors:
            if name == "ML" and size * c.bits_per_symbol > MAX_ML_BITS:
                records.append(
                    BenchRecord(name, size, 0, 0, float("nan"), float("nan"), available=False)
                )
                continue
            n_cand = c.order**size if name == "ML" else c.order
            batch = int(np.clip(BENCH_ELEMENT_BUDGET // n_cand, BENCH_MIN_BATCH, BENCH_MAX_BATCH))
            labels = rng.integers(0, c.order, size=(batch, size))
            y = transmit(h, c.points[labels], sigma_n2, rng)
            det = make_detector(
                name,
                cfg.modulation,
                num_branches=sized_cfg.branches,
                delta_lll=cfg.delta_lll,
                lr_mmse_white=cfg.lr_mmse_white,
                lr_extend=cfg.lr_extend,
            )
            det.fit(h, sigma_n2)
            for _ in range(BENCH_WARMUP):
                det.predict(y)
            samples = np.empty(min_invocations, dtype=np.float64)
            records.append(None)
            cells.append((len(records) - 1, name, size, batch, det, y, samples))
    # Interleave the timed invocations round-robin across cells so that slow
    # host-load drift hits every cell equally; per-cell means then stay
    # comparable even when the machine's speed wanders over the run.
    for i in range(min_invocations):
        for _, _, _, batch, det, y, samples in cells:
            start = time.perf_counter()
            det.predict(y)
            samples[i] = (time.perf_counter() - start) / batch
    for slot, name, size, batch, _, _, samples in cells:
        records[slot] = BenchRecord(
            detector=name,
            size=size,
            batch=batch,
            invocations=min_invocations,
            mean_s=float(samples.mean()),
            std_s=float(samples.std()),
        )
    return records


def write_ber_csv(records, fh) -> None:
    """Write sweep records with the pinned header; floats use shortest repr."""
    fh.write(SWEEP_CSV_HEADER + "\n")
    for rec in records:
        fh.write(
            f"{rec.detector},{rec.snr_db},{rec.trials},{rec.bits},"
            f"{rec.bit_errors},{rec.ber},{rec.elapsed_s:.6f}\n"
        )


def write_bench_csv(records, fh) -> None:
    fh.write(BENCH_CSV_HEADER + "\n")
    for rec in records:
        if rec.available:
            fh.write(
                f"{rec.detector},{rec.size},{rec.batch},{rec.invocations},"
                f"{rec.mean_s!r},{rec.std_s!r}\n"
            )
        else:
            fh.write(f"{rec.detector},{rec.size},0,0,unavailable,unavailable\n")
