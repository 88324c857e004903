"""Multiuser MIMO uplink detection and Monte Carlo BER simulation.

The package provides square-QAM modulation with Gray labeling, i.i.d. and
correlated Rayleigh channel models, recursive least-squares channel
estimation, complex lattice basis reduction, a family of interference
cancellation detectors built around multi-branch lattice-reduced SIC, and a
seeded simulation harness with a CSV-producing command line.
"""

from .channel import (
    FadingConfig,
    RlsChannelEstimator,
    SystemDimensions,
    correlation_matrix,
    gen_iid_channel,
    gen_realistic_channel,
    transmit,
)
from .detectors import (
    DETECTOR_REGISTRY,
    MAX_ML_BITS,
    BranchPlan,
    LrSicDetector,
    MbLrSicDetector,
    MbSicDetector,
    MLDetector,
    SicDetector,
    build_branch_plan,
    column_norm_order,
    lr_quantize,
    make_detector,
    mmse_filter,
    psp_permutation,
    select_best_candidate,
)
from .lattice import (
    ReducedLattice,
    clll_reduce,
    gaussian_round,
    orthogonality_defect,
    round_half_away,
)
from .linalg import psd_sqrt, qr_decompose, solve_hermitian_psd
from .modem import (
    KAPPA,
    SUPPORTED_ORDERS,
    Constellation,
    build_constellation,
    demodulate,
    modulate,
    noise_variance_for_snr,
    slice_symbols,
)
from .simulate import (
    BenchRecord,
    BerRecord,
    SimConfig,
    TrialResult,
    bench_detectors,
    run_ber_sweep,
    run_trial,
    trial_rng,
    write_bench_csv,
    write_ber_csv,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # modem
    "KAPPA",
    "SUPPORTED_ORDERS",
    "Constellation",
    "build_constellation",
    "modulate",
    "demodulate",
    "slice_symbols",
    "noise_variance_for_snr",
    # linalg
    "solve_hermitian_psd",
    "qr_decompose",
    "psd_sqrt",
    # lattice
    "ReducedLattice",
    "clll_reduce",
    "orthogonality_defect",
    "gaussian_round",
    "round_half_away",
    # channel
    "SystemDimensions",
    "FadingConfig",
    "correlation_matrix",
    "gen_iid_channel",
    "gen_realistic_channel",
    "transmit",
    "RlsChannelEstimator",
    # detectors
    "DETECTOR_REGISTRY",
    "MAX_ML_BITS",
    "BranchPlan",
    "MLDetector",
    "SicDetector",
    "MbSicDetector",
    "LrSicDetector",
    "MbLrSicDetector",
    "build_branch_plan",
    "column_norm_order",
    "psp_permutation",
    "lr_quantize",
    "mmse_filter",
    "select_best_candidate",
    "make_detector",
    # simulate
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
