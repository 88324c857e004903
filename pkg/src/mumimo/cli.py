"""Command-line front end: YAML config parsing and the sweep/bench/reduce subcommands.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
Output files are written atomically (temp file + rename), so a failed run
never leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import io
import logging
import math
import os
import sys
import tempfile
from dataclasses import replace

import numpy as np
import yaml

from .channel import FadingConfig, SystemDimensions
from .lattice import clll_reduce, orthogonality_defect
from .simulate import (
    SCENARIOS,
    SimConfig,
    bench_detectors,
    run_ber_sweep,
    write_bench_csv,
    write_ber_csv,
)

__all__ = ["ConfigError", "parse_config", "config_from_dict", "config_to_dict", "main"]

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Invalid or unusable configuration; maps to exit code 2."""


_REQUIRED_KEYS = ("nt_per_user", "n_r", "modulation", "snr_db", "detectors")
_REALISTIC_ONLY_KEYS = ("path_loss", "shadowing_db", "rho_tx", "rho_rx")
_OPTIONAL_KEYS = (
    "runs",
    "symbols_per_run",
    "training_len",
    "scenario",
    "branches",
    "delta_lll",
    "lr_mmse_white",
    "lr_extend",
    "rls_forgetting",
    "rls_delta",
    "seed",
) + _REALISTIC_ONLY_KEYS
_KNOWN_KEYS = frozenset(_REQUIRED_KEYS) | frozenset(_OPTIONAL_KEYS)


def _parse_snr_grid(value) -> tuple[float, ...]:
    if isinstance(value, (list, tuple)):
        if not value:
            raise ConfigError("snr_db list must be non-empty")
        try:
            return tuple(float(v) for v in value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"snr_db entries must be numbers: {exc}") from exc
    if isinstance(value, dict):
        extra = set(value) - {"start", "stop", "step"}
        if extra:
            raise ConfigError(f"unknown snr_db key {sorted(extra)[0]!r}")
        missing = {"start", "stop", "step"} - set(value)
        if missing:
            raise ConfigError(f"snr_db range is missing key {sorted(missing)[0]!r}")
        start, stop, step = (float(value[k]) for k in ("start", "stop", "step"))
        if step <= 0:
            raise ConfigError(f"snr_db step must be positive, got {step}")
        if stop < start:
            raise ConfigError(f"snr_db stop must be >= start, got {start}..{stop}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + i * step for i in range(count))
    raise ConfigError("snr_db must be a list of values or a {start, stop, step} range")


def config_from_dict(doc: dict) -> SimConfig:
    """Validate a parsed key-value document and build a SimConfig."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a key-value mapping at top level")
    for key in doc:
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
    for key in _REQUIRED_KEYS:
        if key not in doc:
            raise ConfigError(f"missing required config key {key!r}")

    scenario = doc.get("scenario", "iid")
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario must be one of {SCENARIOS}, got {scenario!r}")
    if scenario != "realistic":
        for key in _REALISTIC_ONLY_KEYS:
            if key in doc:
                raise ConfigError(
                    f"config key {key!r} is only valid when scenario is 'realistic'"
                )

    nt = doc["nt_per_user"]
    if isinstance(nt, int):
        nt = [nt]
    if not isinstance(nt, (list, tuple)) or not nt:
        raise ConfigError("nt_per_user must be a positive integer or a non-empty list")

    detectors = doc["detectors"]
    if not isinstance(detectors, (list, tuple)):
        raise ConfigError("detectors must be a list of detector names")

    try:
        dims = SystemDimensions(tuple(int(v) for v in nt), int(doc["n_r"]))
        fading = None
        if scenario == "realistic":
            fading = FadingConfig(
                path_loss=float(doc.get("path_loss", 1.0)),
                shadowing_db=float(doc.get("shadowing_db", 0.0)),
                rho_tx=float(doc.get("rho_tx", 0.0)),
                rho_rx=float(doc.get("rho_rx", 0.0)),
            )
        return SimConfig(
            dims=dims,
            modulation=int(doc["modulation"]),
            snr_grid_db=_parse_snr_grid(doc["snr_db"]),
            detectors=tuple(str(d) for d in detectors),
            runs=int(doc.get("runs", 200)),
            symbols_per_run=(
                None if doc.get("symbols_per_run") is None else int(doc["symbols_per_run"])
            ),
            training_len=int(doc.get("training_len", 0)),
            scenario=scenario,
            fading=fading,
            branches=None if doc.get("branches") is None else int(doc["branches"]),
            delta_lll=float(doc.get("delta_lll", 0.99)),
            lr_mmse_white=bool(doc.get("lr_mmse_white", False)),
            lr_extend=bool(doc.get("lr_extend", True)),
            rls_forgetting=float(doc.get("rls_forgetting", 1.0)),
            rls_delta=float(doc.get("rls_delta", 1e-3)),
            seed=int(doc.get("seed", 0)),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(text: str) -> SimConfig:
    """Parse YAML config text into a validated SimConfig."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    return config_from_dict(doc)


def config_to_dict(cfg: SimConfig) -> dict:
    """Serialize a SimConfig so that re-parsing yields an identical config."""
    doc = {
        "nt_per_user": [int(v) for v in cfg.dims.nt_per_user],
        "n_r": int(cfg.dims.n_r),
        "modulation": int(cfg.modulation),
        "snr_db": [float(v) for v in cfg.snr_grid_db],
        "detectors": list(cfg.detectors),
        "runs": int(cfg.runs),
        "symbols_per_run": int(cfg.symbols_per_run),
        "training_len": int(cfg.training_len),
        "scenario": cfg.scenario,
        "branches": int(cfg.branches),
        "delta_lll": float(cfg.delta_lll),
        "lr_mmse_white": bool(cfg.lr_mmse_white),
        "lr_extend": bool(cfg.lr_extend),
        "rls_forgetting": float(cfg.rls_forgetting),
        "rls_delta": float(cfg.rls_delta),
        "seed": int(cfg.seed),
    }
    if cfg.scenario == "realistic":
        doc["path_loss"] = float(cfg.fading.path_loss)
        doc["shadowing_db"] = float(cfg.fading.shadowing_db)
        doc["rho_tx"] = float(cfg.fading.rho_tx)
        doc["rho_rx"] = float(cfg.fading.rho_rx)
    return doc


def _load_config(path: str, seed_override: int | None) -> SimConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"config path does not exist or is unreadable: {path}") from exc
    cfg = parse_config(text)
    if seed_override is not None:
        cfg = replace(cfg, seed=seed_override)
    return cfg


def _atomic_write_text(path: str, text: str) -> None:
    """Write via a sibling temp file + rename so readers never see a partial file."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".mumimo-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        try:
            os.unlink(tmp_path)
        except OSError:
            pass
        raise


def _format_complex(z: complex) -> str:
    re = 0.0 if z.real == 0 else float(z.real)
    im = 0.0 if z.imag == 0 else float(z.imag)
    return f"{re:.6g}{im:+.6g}i"


def _format_matrix(a: np.ndarray) -> str:
    return "\n".join(" ".join(_format_complex(v) for v in row) for row in a)


def _read_matrix(path: str) -> np.ndarray:
    """Read a matrix file: first line "rows cols", then rows of a+bi tokens."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise ConfigError(f"matrix path does not exist or is unreadable: {path}") from exc
    if not lines:
        raise ConfigError(f"matrix file is empty: {path}")
    header = lines[0].split()
    if len(header) != 2:
        raise ConfigError(f"matrix header must be 'rows cols', got {lines[0]!r}")
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError as exc:
        raise ConfigError(f"matrix header must be two integers, got {lines[0]!r}") from exc
    if rows < 1 or cols < 1 or len(lines) - 1 != rows:
        raise ConfigError(
            f"matrix file declares {rows}x{cols} but has {len(lines) - 1} data row(s)"
        )
    out = np.empty((rows, cols), dtype=np.complex128)
    for i, line in enumerate(lines[1:]):
        tokens = line.split()
        if len(tokens) != cols:
            raise ConfigError(f"matrix row {i + 1} has {len(tokens)} entries, expected {cols}")
        for j, token in enumerate(tokens):
            try:
                out[i, j] = complex(token.replace("i", "j"))
            except ValueError as exc:
                raise ConfigError(
                    f"matrix row {i + 1}, column {j + 1}: cannot parse {token!r}"
                ) from exc
    return out


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config, args.seed)
    records = run_ber_sweep(cfg)
    buf = io.StringIO()
    write_ber_csv(records, buf)
    _atomic_write_text(args.out, buf.getvalue())
    logger.info("wrote %d rows to %s", len(records), args.out)
    return 0


def _parse_sizes(text: str) -> list[int]:
    try:
        sizes = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"--sizes must be comma-separated integers, got {text!r}") from exc
    if not sizes or any(s < 1 for s in sizes):
        raise ConfigError(f"--sizes entries must be positive integers, got {text!r}")
    return sizes


def _cmd_bench(args) -> int:
    cfg = _load_config(args.config, args.seed)
    records = bench_detectors(cfg, _parse_sizes(args.sizes))
    buf = io.StringIO()
    write_bench_csv(records, buf)
    _atomic_write_text(args.out, buf.getvalue())
    logger.info("wrote %d rows to %s", len(records), args.out)
    return 0


def _cmd_reduce(args) -> int:
    h = _read_matrix(args.config)
    if h.shape[0] < h.shape[1]:
        raise ConfigError(
            f"matrix must have at least as many rows as columns, got {h.shape[0]}x{h.shape[1]}"
        )
    reduced = clll_reduce(h)
    before = orthogonality_defect(h)
    after = orthogonality_defect(reduced.h_tilde)
    text = (
        "H_tilde:\n"
        + _format_matrix(reduced.h_tilde)
        + "\nT:\n"
        + _format_matrix(reduced.t)
        + f"\ndefect: {before!r} -> {after!r}\n"
    )
    sys.stdout.write(text)
    if args.out is not None:
        _atomic_write_text(args.out, text)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mumimo",
        description="Multiuser MIMO uplink detection: BER sweeps, benchmarks, lattice reduction.",
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="-v logs one line per SNR point; -vv enables debug logging",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a Monte Carlo BER sweep and write a CSV")
    p_sweep.add_argument("--config", required=True, help="YAML experiment config")
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_bench = sub.add_parser("bench", help="measure per-vector detection wall time")
    p_bench.add_argument("--config", required=True, help="YAML experiment config")
    p_bench.add_argument("--out", required=True, help="output CSV path")
    p_bench.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_bench.add_argument(
        "--sizes", default="2,4", help="comma-separated N_t=N_r sizes (default: 2,4)"
    )
    p_bench.set_defaults(func=_cmd_bench)

    p_reduce = sub.add_parser("reduce", help="reduce a basis from a matrix file and print it")
    p_reduce.add_argument(
        "--config", required=True, help="matrix file: first line 'rows cols', then a+bi rows"
    )
    p_reduce.add_argument("--out", default=None, help="optional path for the printed report")
    p_reduce.set_defaults(func=_cmd_reduce)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    level = logging.WARNING
    if args.verbose == 1:
        level = logging.INFO
    elif args.verbose >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"mumimo: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures map to exit 1 with one parsable line
        print(f"mumimo: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
