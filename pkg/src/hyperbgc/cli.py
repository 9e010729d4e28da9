"""Command-line pipeline tying the modules into the end-to-end workflow.

Subcommands::

    simulate     forward-model R_rs for rows of (BGC state, SIOP spectra)
    synth        fit the library distribution and generate the synthetic dataset
    pretrain     meta-pretrain the base model on the synthetic dataset
    adapt        fine-tune per region with k-fold cross-validation and score it
    predict      apply a saved model to reflectance spectra
    evaluate     score predictions against measurements
    sensitivity  EFAST sensitivity of the forward model per wavelength
    chroma       CIE 1931 chromaticity coordinates of reflectance spectra

Configuration comes from a JSON file (--config or the HYPERBGC_CONFIG
environment variable) with command-line flags taking precedence. Every output
embeds the configuration hash and seed, and reruns with identical inputs are
byte-identical (guaranteed with --threads 1). Exit codes: 0 success, 2 input
validation failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import dataio
from .bio_optics import BgcState, bundled_water_iops, forward
from .chromaticity import CieTables, bundled_cie_tables, chromaticity
from .grid import STANDARD_GRID, Spectrum
from .library import median_siops
from .meta import AdaptConfig, TrainConfig, cross_validate, meta_pretrain, region_adapt
from .metrics import retrieval_metrics
from .mlp import predict_bgc
from .sensitivity import EfastConfig, bgc_forward_closure, efast_indices
from .synthetic import GmmConfig, generate_dataset

CONFIG_ENV_VAR = "HYPERBGC_CONFIG"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

DEFAULT_CONFIG = {
    "paths": {
        "library": None,
        "water_iops": None,
        "cie_tables": None,
        "output_dir": ".",
    },
    "synth": {"k": 10000, "seed": 0, "noise_sigma": 0.0},
    "train": {
        "inner_lr": 0.01, "outer_lr": 0.001, "inner_steps": 1,
        "epochs": 200, "n_tasks": 200, "k_min": 5, "k_max": 50,
        "seed": 0, "resample_tasks": False,
    },
    "adapt": {"lr": 0.001, "iterations": 500, "patience": 25, "seed": 0},
    "cv": {"folds": 10},
    "efast": {"n_samples": 1025, "interference": 4, "temp": 22.0, "sal": 35.0,
              "ranges": None},
}


def _deep_update(base: dict, overrides: dict) -> dict:
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], value)
        else:
            base[key] = value
    return base


def load_config(path: str | None) -> dict:
    """Defaults, overlaid with the JSON config file if one is given."""
    config = copy.deepcopy(DEFAULT_CONFIG)
    path = path or os.environ.get(CONFIG_ENV_VAR)
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            _deep_update(config, json.load(fh))
    return config


def _apply_flag_overrides(config: dict, args: argparse.Namespace, mapping: dict):
    for flag, (section, key) in mapping.items():
        value = getattr(args, flag, None)
        if value is not None:
            config[section][key] = value


def _tables(config):
    path = config["paths"]["water_iops"]
    return dataio.read_water_iops(path) if path else bundled_water_iops()


def _out_dir(config) -> Path:
    out = Path(config["paths"]["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _science_config(config: dict) -> dict:
    """Configuration without file locations: the part that determines output
    content, so reruns into different directories hash identically."""
    return {k: v for k, v in config.items() if k != "paths"}


def _stamp(config: dict, seed) -> list:
    return [f"config_sha256={dataio.config_sha256(_science_config(config))} seed={seed}"]


def _chunk_ranges(n: int, chunk: int):
    return [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]


def _predict_chunk(params, rrs_chunk):
    return predict_bgc(params, rrs_chunk)


def _parallel_predict(params, rrs, threads: int, chunk: int = 512) -> np.ndarray:
    ranges = _chunk_ranges(len(rrs), chunk)
    if threads <= 1 or len(ranges) <= 1:
        parts = [_predict_chunk(params, rrs[lo:hi]) for lo, hi in ranges]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_predict_chunk,
                                  [params] * len(ranges),
                                  [rrs[lo:hi] for lo, hi in ranges]))
    return np.vstack(parts)


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------

def cmd_simulate(args, config) -> int:
    scalars, siops = dataio.read_simulation_inputs(args.inputs)
    tables = _tables(config)
    rows = np.empty((len(siops), STANDARD_GRID.n_bands))
    for i, siop in enumerate(siops):
        try:
            state = BgcState(tss=scalars[i, 0], doc=scalars[i, 1],
                             tchla=scalars[i, 2], temp=scalars[i, 3],
                             sal=scalars[i, 4])
            rows[i] = forward(state, siop, tables).values
        except ValueError as exc:
            raise ValueError(f"{args.inputs}: row {i + 1}: {exc}") from exc
    out = _out_dir(config) / (args.output or "simulated_rrs.csv")
    dataio.write_table(out, dataio.RRS_COLUMNS, rows, _stamp(config, "n/a"))
    print(f"wrote {out} ({len(rows)} spectra)")
    return EXIT_OK


def cmd_synth(args, config) -> int:
    _apply_flag_overrides(config, args, {
        "k": ("synth", "k"), "seed": ("synth", "seed"),
        "noise_sigma": ("synth", "noise_sigma"),
    })
    library_path = args.library or config["paths"]["library"]
    if not library_path:
        raise ValueError("no spectral library given (--library or paths.library)")
    library = dataio.read_library_csv(library_path)
    synth = config["synth"]
    dataset = generate_dataset(library, k=synth["k"], seed=synth["seed"],
                               noise_sigma=synth["noise_sigma"],
                               gmm_config=GmmConfig(), tables=_tables(config))
    out = _out_dir(config)
    stamp = _stamp(config, synth["seed"])
    dataio.write_synthetic_csv(out / "synthetic.csv", dataset, stamp)
    dataio.write_gmm_json(out / "gmm.json", dataset, _science_config(config))
    print(f"wrote {out / 'synthetic.csv'} ({len(dataset)} records) and {out / 'gmm.json'}")
    return EXIT_OK


def cmd_pretrain(args, config) -> int:
    _apply_flag_overrides(config, args, {
        "epochs": ("train", "epochs"), "n_tasks": ("train", "n_tasks"),
        "seed": ("train", "seed"),
    })
    dataset = dataio.read_synthetic_csv(args.synthetic)
    t = config["train"]
    train_config = TrainConfig(
        inner_lr=t["inner_lr"], outer_lr=t["outer_lr"], inner_steps=t["inner_steps"],
        epochs=t["epochs"], n_tasks=t["n_tasks"], k_min=t["k_min"], k_max=t["k_max"],
        seed=t["seed"], resample_tasks=t["resample_tasks"])
    initial = None
    if args.resume:
        initial, _ = dataio.read_model_json(args.resume)
    result = meta_pretrain(dataset, train_config, initial_params=initial)
    out = _out_dir(config)
    dataio.write_model_json(out / "model.json", result.best_params,
                            seed=t["seed"], config=_science_config(config))
    dataio.write_model_json(out / "model_final.json", result.final_params,
                            seed=t["seed"], config=_science_config(config))
    log_rows = np.column_stack([np.arange(1, len(result.history) + 1),
                                result.history])
    dataio.write_table(out / "training_log.csv", ["epoch", "meta_loss"],
                       log_rows, _stamp(config, t["seed"]))
    print(f"wrote {out / 'model.json'} (best meta-loss "
          f"{result.history.min():.6f}) and {out / 'training_log.csv'}")
    return EXIT_OK


def cmd_adapt(args, config) -> int:
    _apply_flag_overrides(config, args, {"folds": ("cv", "folds"),
                                         "seed": ("adapt", "seed")})
    base, _ = dataio.read_model_json(args.model)
    timestamps, bgc, rrs = dataio.read_region_csv(args.region)
    a = config["adapt"]
    adapt_config = AdaptConfig(lr=a["lr"], iterations=a["iterations"],
                               patience=a["patience"])
    cv = cross_validate(base, rrs, bgc, folds=config["cv"]["folds"],
                        config=adapt_config, seed=a["seed"])
    adapted, _ = region_adapt(base, rrs, bgc, adapt_config)
    out = _out_dir(config)
    stamp = _stamp(config, a["seed"])
    dataio.write_model_json(out / "adapted_model.json", adapted,
                            seed=a["seed"], config=_science_config(config))
    pred_rows = np.column_stack([timestamps, cv.fold_of_record, cv.predictions, bgc])
    dataio.write_table(out / "cv_predictions.csv",
                       ["timestamp", "fold", "pred_tss", "pred_doc", "pred_tchla",
                        "meas_tss", "meas_doc", "meas_tchla"],
                       pred_rows, stamp)
    dataio.write_metrics_json(out / "metrics.json", cv.metrics,
                              extra={"config_sha256": dataio.config_sha256(_science_config(config)),
                                     "n_records": len(rrs),
                                     "folds": config["cv"]["folds"]})
    summary = "  ".join(f"{name}: rmse={m.rmse:.3f}" for name, m in cv.metrics.items())
    print(f"wrote {out / 'adapted_model.json'}, {out / 'cv_predictions.csv'}, "
          f"{out / 'metrics.json'} ({summary})")
    return EXIT_OK


def cmd_predict(args, config) -> int:
    params, _ = dataio.read_model_json(args.model)
    names, data = dataio.read_table(args.rrs)
    rrs = dataio.select_columns(names, data, dataio.RRS_COLUMNS, args.rrs)
    predictions = _parallel_predict(params, rrs, args.threads)
    out = _out_dir(config) / (args.output or "predictions.csv")
    dataio.write_table(out, ["tss", "doc", "tchla"], predictions,
                       _stamp(config, "n/a"))
    print(f"wrote {out} ({len(predictions)} predictions)")
    return EXIT_OK


def cmd_evaluate(args, config) -> int:
    p_names, p_data = dataio.read_table(args.pred)
    m_names, m_data = dataio.read_table(args.meas)
    pred = dataio.select_columns(p_names, p_data, ["tss", "doc", "tchla"], args.pred)
    meas = dataio.select_columns(m_names, m_data, ["tss", "doc", "tchla"], args.meas)
    if len(pred) != len(meas):
        raise ValueError("prediction and measurement files differ in length")
    metrics = {name: retrieval_metrics(pred[:, j], meas[:, j])
               for j, name in enumerate(("tss", "doc", "tchla"))}
    out = _out_dir(config) / (args.output or "metrics.json")
    dataio.write_metrics_json(out, metrics,
                              extra={"config_sha256": dataio.config_sha256(_science_config(config))})
    print(f"wrote {out}")
    return EXIT_OK


def cmd_sensitivity(args, config) -> int:
    _apply_flag_overrides(config, args, {
        "n_samples": ("efast", "n_samples"), "interference": ("efast", "interference"),
    })
    library_path = args.library or config["paths"]["library"]
    if not library_path:
        raise ValueError("no spectral library given (--library or paths.library)")
    library = dataio.read_library_csv(library_path)
    siops = median_siops(library)
    e = config["efast"]
    ranges = e["ranges"] or {
        name: (float(library.scalar(name).min()), float(library.scalar(name).max()))
        for name in ("tss", "doc", "tchla")
    }
    result = efast_indices(
        bgc_forward_closure(siops, _tables(config), temp=e["temp"], sal=e["sal"]),
        ranges, EfastConfig(n_samples=e["n_samples"], interference=e["interference"]))
    out = _out_dir(config) / "sensitivity.csv"
    dataio.write_sensitivity_csv(out, result, _stamp(config, "n/a"))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_chroma(args, config) -> int:
    cie_path = config["paths"]["cie_tables"]
    tables = bundled_cie_tables()
    if cie_path:
        names, data = dataio.read_table(cie_path)
        wl = dataio.select_columns(names, data, ["wavelength_nm"], cie_path)[:, 0]
        if not np.array_equal(wl, STANDARD_GRID.wavelengths):
            raise ValueError(f"{cie_path}: wavelengths do not match the 400-700/1 nm grid")
        cols = dataio.select_columns(names, data, ["xbar", "ybar", "zbar", "d65"],
                                     cie_path)
        tables = CieTables(Spectrum(cols[:, 0]), Spectrum(cols[:, 1]),
                           Spectrum(cols[:, 2]), Spectrum(cols[:, 3]))
    names, data = dataio.read_table(args.rrs)
    rrs = dataio.select_columns(names, data, dataio.RRS_COLUMNS, args.rrs)
    rows = []
    for i in range(len(rrs)):
        c = chromaticity(Spectrum(rrs[i]), tables)
        rows.append([c.x, c.y])
    out = _out_dir(config) / (args.output or "chromaticity.csv")
    dataio.write_table(out, ["x", "y"], rows, _stamp(config, "n/a"))
    print(f"wrote {out} ({len(rows)} points)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperbgc",
        description="Hyperspectral retrieval of coastal biogeochemical parameters",
    )
    parser.add_argument("--config", help=f"JSON config path (or ${CONFIG_ENV_VAR})")
    parser.add_argument("--output-dir", help="directory for command outputs")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker processes; 1 guarantees byte-reproducibility")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="forward-model R_rs for BGC+SIOP rows")
    p.add_argument("--inputs", required=True)
    p.add_argument("--output")

    p = sub.add_parser("synth", help="generate the synthetic dataset")
    p.add_argument("--library")
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--noise-sigma", dest="noise_sigma", type=float)

    p = sub.add_parser("pretrain", help="meta-pretrain the base model")
    p.add_argument("--synthetic", required=True)
    p.add_argument("--epochs", type=int)
    p.add_argument("--n-tasks", dest="n_tasks", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--resume", help="model.json to continue training from")

    p = sub.add_parser("adapt", help="regional fine-tuning with cross-validation")
    p.add_argument("--region", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--folds", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("predict", help="apply a saved model to spectra")
    p.add_argument("--model", required=True)
    p.add_argument("--rrs", required=True)
    p.add_argument("--output")

    p = sub.add_parser("evaluate", help="score predictions against measurements")
    p.add_argument("--pred", required=True)
    p.add_argument("--meas", required=True)
    p.add_argument("--output")

    p = sub.add_parser("sensitivity", help="EFAST sensitivity of the forward model")
    p.add_argument("--library")
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--interference", type=int)

    p = sub.add_parser("chroma", help="chromaticity coordinates of spectra")
    p.add_argument("--rrs", required=True)
    p.add_argument("--output")
    return parser


_COMMANDS = {
    "simulate": cmd_simulate,
    "synth": cmd_synth,
    "pretrain": cmd_pretrain,
    "adapt": cmd_adapt,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "sensitivity": cmd_sensitivity,
    "chroma": cmd_chroma,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.output_dir:
            config["paths"]["output_dir"] = args.output_dir
        return _COMMANDS[args.command](args, config)
    except (ValueError, KeyError, FileNotFoundError, IsADirectoryError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
