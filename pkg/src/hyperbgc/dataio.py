"""CSV/JSON interchange for spectra, libraries, datasets, models and results.

All floating-point output uses shortest round-trip decimals, so rereading a
file reproduces the exact 64-bit values and reruns with identical inputs are
byte-identical. Lines starting with ``#`` are comments; writers use them to
embed the configuration hash and seed of the producing run.
"""

from __future__ import annotations

import hashlib
import io
import json
import logging

import numpy as np

from .bio_optics import SiopSet, WaterIopTables
from .grid import STANDARD_GRID, Spectrum
from .library import LibraryRecord, SpectralLibrary
from .mlp import HIDDEN, N_INPUT, N_OUTPUT, MlpParams
from .synthetic import (FEATURE_NAMES, GmmModel, PcaBasis, SIOP_FAMILIES,
                        SyntheticDataset)

__all__ = [
    "config_sha256",
    "read_table",
    "write_table",
    "select_columns",
    "write_spectrum_csv",
    "read_spectrum_csv",
    "read_water_iops",
    "write_library_csv",
    "read_library_csv",
    "write_synthetic_csv",
    "read_synthetic_csv",
    "write_gmm_json",
    "read_gmm_json",
    "write_model_json",
    "read_model_json",
    "read_region_csv",
    "write_region_csv",
    "read_simulation_inputs",
    "write_metrics_json",
    "write_sensitivity_csv",
]

log = logging.getLogger(__name__)

_WL_COLUMNS = [f"{int(w)}" for w in STANDARD_GRID.wavelengths]
SCORE_COLUMNS = list(FEATURE_NAMES[3:23])
RRS_COLUMNS = [f"rrs_{c}" for c in _WL_COLUMNS]


def config_sha256(config: dict) -> str:
    """Stable hash of a configuration mapping (canonical JSON)."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _fmt(value) -> str:
    return repr(float(value))


def write_table(path, names, rows, header_comments=()):
    """Write a numeric CSV with optional leading '#' comment lines."""
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header_comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(names) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_table(path):
    """Read a numeric CSV written by :func:`write_table`; returns (names, array)."""
    with open(path, "r", encoding="utf-8") as fh:
        line = fh.readline()
        while line.startswith("#"):
            line = fh.readline()
        names = [c.strip() for c in line.strip().split(",")]
        body = fh.read()
    if body.strip():
        data = np.loadtxt(io.StringIO(body), delimiter=",", ndmin=2)
    else:
        data = np.empty((0, len(names)))
    if data.shape[1] != len(names):
        raise ValueError(f"{path}: {data.shape[1]} columns for {len(names)} header names")
    return names, data


def select_columns(names, data, wanted, path):
    missing = [c for c in wanted if c not in names]
    if missing:
        raise ValueError(f"{path}: missing columns {missing}")
    idx = [names.index(c) for c in wanted]
    return data[:, idx]


# -- spectra ---------------------------------------------------------------

def write_spectrum_csv(path, spectrum: Spectrum, header_comments=()):
    rows = np.column_stack([spectrum.wavelengths, spectrum.values])
    write_table(path, ["wavelength_nm", "value"], rows, header_comments)


def read_spectrum_csv(path) -> Spectrum:
    names, data = read_table(path)
    wl = select_columns(names, data, ["wavelength_nm"], path)[:, 0]
    if not np.array_equal(wl, STANDARD_GRID.wavelengths):
        raise ValueError(f"{path}: wavelengths do not match the 400-700/1 nm grid")
    return Spectrum(select_columns(names, data, ["value"], path)[:, 0])


def read_water_iops(path) -> WaterIopTables:
    names, data = read_table(path)
    wl = select_columns(names, data, ["wavelength_nm"], path)[:, 0]
    if not np.array_equal(wl, STANDARD_GRID.wavelengths):
        raise ValueError(f"{path}: wavelengths do not match the 400-700/1 nm grid")
    cols = select_columns(names, data, ["a_w_ref", "psi_T", "psi_S"], path)
    return WaterIopTables(Spectrum(cols[:, 0]), Spectrum(cols[:, 1]), Spectrum(cols[:, 2]))


# -- spectral library -------------------------------------------------------

_LIBRARY_SCALARS = ["temp", "sal", "tss", "doc", "tchla",
                    "a_y_440", "s_y", "b_bp_550", "s_bbp"]


def write_library_csv(path, library: SpectralLibrary, header_comments=()):
    names = (_LIBRARY_SCALARS
             + [f"a_d_{c}" for c in _WL_COLUMNS]
             + [f"a_ph_{c}" for c in _WL_COLUMNS])
    rows = []
    for r in library:
        rows.append(np.concatenate([
            [r.temp, r.sal, r.tss, r.doc, r.tchla, r.a_y_440, r.s_y,
             r.b_bp_550, r.s_bbp],
            r.a_d.values, r.a_ph.values,
        ]))
    write_table(path, names, rows, header_comments)


def read_library_csv(path) -> SpectralLibrary:
    names, data = read_table(path)
    scalars = select_columns(names, data, _LIBRARY_SCALARS, path)
    a_d = select_columns(names, data, [f"a_d_{c}" for c in _WL_COLUMNS], path)
    a_ph = select_columns(names, data, [f"a_ph_{c}" for c in _WL_COLUMNS], path)
    records = []
    n_dropped = 0
    for i in range(data.shape[0]):
        if not (np.all(np.isfinite(scalars[i])) and np.all(np.isfinite(a_d[i]))
                and np.all(np.isfinite(a_ph[i]))):
            n_dropped += 1
            continue
        records.append(LibraryRecord(
            temp=scalars[i, 0], sal=scalars[i, 1], tss=scalars[i, 2],
            doc=scalars[i, 3], tchla=scalars[i, 4], a_y_440=scalars[i, 5],
            s_y=scalars[i, 6], b_bp_550=scalars[i, 7], s_bbp=scalars[i, 8],
            a_d=Spectrum(a_d[i]), a_ph=Spectrum(a_ph[i]),
        ))
    if n_dropped:
        log.warning("%s: dropped %d records with missing fields", path, n_dropped)
    return SpectralLibrary(records)


# -- synthetic dataset -------------------------------------------------------

def write_synthetic_csv(path, dataset: SyntheticDataset, header_comments=()):
    names = (["k", "tss", "doc", "tchla", "temp", "sal"]
             + SCORE_COLUMNS + RRS_COLUMNS)
    k = len(dataset)
    rows = np.column_stack([
        np.arange(k, dtype=np.float64), dataset.tss, dataset.doc, dataset.tchla,
        dataset.temp, dataset.sal, dataset.scores, dataset.rrs,
    ])
    write_table(path, names, rows, header_comments)


def read_synthetic_csv(path) -> SyntheticDataset:
    """Read a persisted dataset. PCA bases live in gmm.json, so record-level
    SIOP spectra are unavailable on a dataset loaded from CSV alone."""
    names, data = read_table(path)
    cols = select_columns(names, data, ["tss", "doc", "tchla", "temp", "sal"], path)
    scores = select_columns(names, data, SCORE_COLUMNS, path)
    rrs = select_columns(names, data, RRS_COLUMNS, path)
    return SyntheticDataset(tss=cols[:, 0], doc=cols[:, 1], tchla=cols[:, 2],
                            temp=cols[:, 3], sal=cols[:, 4], scores=scores, rrs=rrs)


def write_gmm_json(path, dataset: SyntheticDataset, config: dict | None = None):
    if dataset.gmm is None or dataset.bases is None:
        raise ValueError("dataset carries no fitted mixture to persist")
    gmm = dataset.gmm
    payload = {
        "weights": gmm.weights.tolist(),
        "means": gmm.means.tolist(),
        "covariances": gmm.covariances.tolist(),
        "feature_mean": gmm.feature_mean.tolist(),
        "feature_std": gmm.feature_std.tolist(),
        "elbo_trace": gmm.elbo_trace.tolist(),
        "converged": gmm.converged,
        "bases": {
            name: {
                "mean": basis.mean.tolist(),
                "components": basis.components.tolist(),
                "explained_variance": basis.explained_variance.tolist(),
            }
            for name, basis in dataset.bases.items()
        },
        "seed": dataset.seed,
        "noise_sigma": dataset.noise_sigma,
        "config": config or {},
    }
    if config is not None:
        payload["config_sha256"] = config_sha256(config)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_gmm_json(path):
    """Returns ``(GmmModel, bases_dict, payload)``."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    gmm = GmmModel(
        weights=np.array(payload["weights"]),
        means=np.array(payload["means"]),
        covariances=np.array(payload["covariances"]),
        feature_mean=np.array(payload["feature_mean"]),
        feature_std=np.array(payload["feature_std"]),
        elbo_trace=np.array(payload["elbo_trace"]),
        converged=payload["converged"],
    )
    bases = {
        name: PcaBasis(
            mean=np.array(entry["mean"]),
            components=np.array(entry["components"]),
            explained_variance=np.array(entry["explained_variance"]),
        )
        for name, entry in payload["bases"].items()
    }
    if set(bases) != set(SIOP_FAMILIES):
        raise ValueError(f"{path}: expected bases for {SIOP_FAMILIES}")
    return gmm, bases, payload


# -- network parameters -------------------------------------------------------

def write_model_json(path, params: MlpParams, seed: int | None = None,
                     config: dict | None = None):
    payload = {
        "architecture": {
            "layers": [N_INPUT, *HIDDEN, N_OUTPUT],
            "hidden_activation": "tanh",
            "output_activation": "linear",
            "input_transform": "zscore(log10(rrs + 1e-5))",
            "output_scale": "log10 of (tss mg/L, doc mg/L, tchla ug/L)",
        },
        "weights": {name: getattr(params, name).tolist()
                    for name in ("w1", "b1", "w2", "b2", "w3", "b3")},
        "x_mean": params.x_mean.tolist(),
        "x_std": params.x_std.tolist(),
        "seed": seed,
        "config": config or {},
    }
    if config is not None:
        payload["config_sha256"] = config_sha256(config)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_model_json(path):
    """Returns ``(MlpParams, payload)``."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    layers = payload["architecture"]["layers"]
    if layers != [N_INPUT, *HIDDEN, N_OUTPUT]:
        raise ValueError(f"{path}: unsupported architecture {layers}")
    w = payload["weights"]
    params = MlpParams(
        w1=np.array(w["w1"]), b1=np.array(w["b1"]),
        w2=np.array(w["w2"]), b2=np.array(w["b2"]),
        w3=np.array(w["w3"]), b3=np.array(w["b3"]),
        x_mean=np.array(payload["x_mean"]), x_std=np.array(payload["x_std"]),
    )
    return params, payload


# -- regional data -------------------------------------------------------------

_REGION_SCALARS = ["timestamp", "tss", "doc", "tchla"]


def write_region_csv(path, timestamps, bgc, rrs, header_comments=()):
    bgc = np.asarray(bgc, dtype=np.float64)
    rows = np.column_stack([np.asarray(timestamps, dtype=np.float64),
                            bgc, np.asarray(rrs, dtype=np.float64)])
    write_table(path, _REGION_SCALARS + RRS_COLUMNS, rows, header_comments)


def read_region_csv(path):
    """Returns ``(timestamps, bgc (n,3) linear, rrs (n,301))``."""
    names, data = read_table(path)
    scalars = select_columns(names, data, _REGION_SCALARS, path)
    rrs = select_columns(names, data, RRS_COLUMNS, path)
    keep = np.all(np.isfinite(scalars), axis=1) & np.all(np.isfinite(rrs), axis=1)
    if not np.all(keep):
        log.warning("%s: dropped %d records with missing fields", path,
                    int(np.sum(~keep)))
    return scalars[keep, 0], scalars[keep, 1:4], rrs[keep]


# -- simulation inputs ---------------------------------------------------------

_SIM_SCALARS = ["tss", "doc", "tchla", "temp", "sal"]


def read_simulation_inputs(path):
    """Rows of (BGC state, full SIOP spectra) for direct forward simulation.

    Schema: tss,doc,tchla,temp,sal then four 301-column blocks named
    a_d_star_400..700, a_y_star_400..700, a_ph_star_400..700,
    b_bp_star_400..700. Returns ``(scalars (n,5), siops: list[SiopSet])``.
    """
    names, data = read_table(path)
    scalars = select_columns(names, data, _SIM_SCALARS, path)
    blocks = {}
    for family in SIOP_FAMILIES:
        blocks[family] = select_columns(names, data,
                                  [f"{family}_{c}" for c in _WL_COLUMNS], path)
    siops = []
    for i in range(data.shape[0]):
        try:
            siops.append(SiopSet(**{family: Spectrum(blocks[family][i])
                                    for family in SIOP_FAMILIES}))
        except ValueError as exc:
            raise ValueError(f"{path}: row {i + 1}: {exc}") from exc
    return scalars, siops


def write_simulation_inputs(path, scalars, siops, header_comments=()):
    names = list(_SIM_SCALARS)
    for family in SIOP_FAMILIES:
        names += [f"{family}_{c}" for c in _WL_COLUMNS]
    rows = []
    for row, siop in zip(np.asarray(scalars, dtype=np.float64), siops):
        rows.append(np.concatenate([row] + [getattr(siop, f).values
                                            for f in SIOP_FAMILIES]))
    write_table(path, names, rows, header_comments)


# -- results -------------------------------------------------------------------

def write_metrics_json(path, metrics: dict, extra: dict | None = None):
    """Persist per-variable retrieval metrics; `metrics` maps variable name to
    :class:`~hyperbgc.metrics.RetrievalMetrics`."""
    payload = {"variables": {name: m.as_dict() for name, m in metrics.items()}}
    if extra:
        payload.update(extra)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True, allow_nan=True)
        fh.write("\n")


def write_sensitivity_csv(path, result, header_comments=()):
    """Long-format sensitivity table: wavelength_nm,param,s1,st."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header_comments:
            fh.write(f"# {line}\n")
        fh.write("wavelength_nm,param,s1,st\n")
        for i, name in enumerate(result.parameters):
            for j, wl in enumerate(result.wavelengths):
                fh.write(f"{_fmt(wl)},{name},{_fmt(result.first_order[i, j])},"
                         f"{_fmt(result.total[i, j])}\n")
