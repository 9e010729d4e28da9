"""Synthetic BGC-reflectance dataset generation.

The generator characterises the joint distribution of the spectral library in
a 25-dimensional feature space and simulates new reflectance samples from it:

1. log10-scale the skewed quantities (TSS, DOC, TChl-a and the four SIOP
   spectra); temperature and salinity stay linear,
2. compress each log10 SIOP family onto its own 5-component PCA basis fitted
   by mean-centred SVD, preserving cross-wavelength correlation,
3. collate [log10 BGC (3), SIOP scores (4x5), T, S] into feature vectors,
4. fit a Dirichlet-process Gaussian mixture (truncated variational Bayes) to
   the standardised features,
5. draw K feature vectors by ancestral sampling, invert them back to physical
   space, and run the bio-optical forward model on every draw.

Sampling uses one spawned random stream per record, so chunked or parallel
generation reproduces the serial output bit for bit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.mixture import BayesianGaussianMixture

from .bio_optics import (BgcState, DEFAULT_CONSTANTS, RrsConstants, SiopSet,
                         WaterIopTables, bundled_water_iops, forward_batch)
from .grid import STANDARD_GRID, Spectrum
from .library import SpectralLibrary

__all__ = [
    "PcaBasis",
    "fit_pca",
    "project",
    "reconstruct",
    "GmmConfig",
    "GmmModel",
    "fit_dpgmm",
    "sample_features",
    "assemble_features",
    "invert_features",
    "SyntheticDataset",
    "generate_dataset",
    "FEATURE_NAMES",
    "SIOP_FAMILIES",
    "N_FEATURES",
]

SIOP_FAMILIES = ("a_d_star", "a_y_star", "a_ph_star", "b_bp_star")
N_SCORES = 5
N_FEATURES = 5 + 4 * N_SCORES

FEATURE_NAMES = (
    ("log10_tss", "log10_doc", "log10_tchla")
    + tuple(f"score_d_{i + 1}" for i in range(N_SCORES))
    + tuple(f"score_y_{i + 1}" for i in range(N_SCORES))
    + tuple(f"score_ph_{i + 1}" for i in range(N_SCORES))
    + tuple(f"score_bbp_{i + 1}" for i in range(N_SCORES))
    + ("temp", "sal")
)

# slices of the feature vector occupied by each SIOP family's scores
_SCORE_SLICES = {
    "a_d_star": slice(3, 8),
    "a_y_star": slice(8, 13),
    "a_ph_star": slice(13, 18),
    "b_bp_star": slice(18, 23),
}

# floor applied to SIOP spectra before log10 so measured zeros stay finite
_LOG_FLOOR = 1e-8

# clamps applied when inverting sampled features back to physical space
_SAL_RANGE = (0.0, 42.0)
_TEMP_RANGE = (-2.0, 40.0)


# ---------------------------------------------------------------------------
# PCA via mean-centred SVD
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PcaBasis:
    """Truncated PCA basis for one log10 SIOP family.

    components has shape (n_bands, P) with orthonormal columns ordered by
    descending singular value; the sign convention makes the largest-magnitude
    element of each component positive.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    def __post_init__(self):
        gram = self.components.T @ self.components
        if not np.allclose(gram, np.eye(self.components.shape[1]), atol=1e-10):
            raise ValueError("PCA components must be column-orthonormal")

    @property
    def n_components(self) -> int:
        return self.components.shape[1]


def fit_pca(values: np.ndarray, n_components: int = N_SCORES) -> PcaBasis:
    """Fit a PCA basis to rows of `values` (shape (N, n_bands), already log10)."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("fit_pca expects a 2-D (records x bands) array")
    if not np.all(np.isfinite(x)):
        raise ValueError("fit_pca input must be finite")
    n = x.shape[0]
    if n < n_components:
        raise ValueError(f"need at least {n_components} records, got {n}")
    mean = x.mean(axis=0)
    _, s, vt = np.linalg.svd(x - mean, full_matrices=False)
    comps = vt[:n_components].T.copy()
    flip = comps[np.abs(comps).argmax(axis=0), np.arange(n_components)] < 0
    comps[:, flip] *= -1.0
    explained = (s[:n_components] ** 2) / n
    return PcaBasis(mean=mean, components=comps, explained_variance=explained)


def project(basis: PcaBasis, values: np.ndarray) -> np.ndarray:
    """Scores of one spectrum (n_bands,) or a batch (N, n_bands) against the basis."""
    return (np.asarray(values, dtype=np.float64) - basis.mean) @ basis.components


def reconstruct(basis: PcaBasis, scores: np.ndarray) -> np.ndarray:
    """Inverse of :func:`project`: mean + components @ scores.

    Accumulated component by component with elementwise operations so the
    result is bit-identical whether scores arrive singly or batched (BLAS
    matmul kernels vary with operand shape).
    """
    s = np.asarray(scores, dtype=np.float64)
    out = np.broadcast_to(basis.mean, s.shape[:-1] + basis.mean.shape).copy()
    for p in range(basis.n_components):
        out += s[..., p, None] * basis.components[:, p]
    return out


# ---------------------------------------------------------------------------
# Dirichlet-process Gaussian mixture (truncated variational Bayes)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GmmConfig:
    max_components: int = 30
    reg_covar: float = 1e-6
    max_iter: int = 500
    tol: float = 1e-5
    prune_weight: float = 1e-3
    # kmeans responsibilities preserve the joint structure best here; random
    # responsibilities settle at a weakly differentiated optimum that
    # over-smooths the mixture
    init: str = "kmeans"

    @property
    def weight_concentration_prior(self) -> float:
        return 1.0 / self.max_components


@dataclass(eq=False)
class GmmModel:
    """Pruned mixture in standardised feature space plus the standardisation.

    Weights sum to one; every covariance admits a Cholesky factorisation.
    Means/covariances live in z-scored feature coordinates and are mapped back
    through feature_mean/feature_std when sampling.
    """

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    feature_mean: np.ndarray
    feature_std: np.ndarray
    elbo_trace: np.ndarray = field(default_factory=lambda: np.empty(0))
    converged: bool = True

    def __post_init__(self):
        if abs(float(self.weights.sum()) - 1.0) > 1e-9:
            raise ValueError("mixture weights must sum to 1")
        if np.any(self.weights < 0):
            raise ValueError("mixture weights must be nonnegative")
        # fails loudly here rather than at sampling time
        self._cholesky = np.stack([np.linalg.cholesky(c) for c in self.covariances])

    @property
    def n_components(self) -> int:
        return len(self.weights)

    def mean_in_feature_space(self, i: int) -> np.ndarray:
        return self.means[i] * self.feature_std + self.feature_mean


def fit_dpgmm(features: np.ndarray, config: GmmConfig | None = None,
              seed: int = 0) -> GmmModel:
    """Fit the Dirichlet-process mixture to feature vectors (shape (N, 25)).

    Features are z-scored per dimension before fitting (temperature and
    salinity dwarf the PC scores otherwise); the standardisation is stored on
    the model and undone at sampling time. Components whose weight falls
    below ``config.prune_weight`` are dropped and the weights renormalised.
    The fit is stepped one variational iteration at a time so the evidence
    lower bound trajectory is available on the returned model.
    """
    config = config or GmmConfig()
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("fit_dpgmm expects a 2-D feature matrix")
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    if x.shape[0] < x.shape[1]:
        raise ValueError("need at least as many records as feature dimensions")
    feature_mean = x.mean(axis=0)
    feature_std = x.std(axis=0)
    feature_std[feature_std == 0.0] = 1.0
    z = (x - feature_mean) / feature_std

    gmm = BayesianGaussianMixture(
        n_components=config.max_components,
        covariance_type="full",
        weight_concentration_prior_type="dirichlet_process",
        weight_concentration_prior=config.weight_concentration_prior,
        reg_covar=config.reg_covar,
        max_iter=1,
        tol=config.tol,
        warm_start=True,
        init_params=config.init,
        random_state=seed,
    )
    trace = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        for _ in range(config.max_iter):
            gmm.fit(z)
            trace.append(gmm.lower_bound_)
            if gmm.converged_:
                break

    keep = gmm.weights_ >= config.prune_weight
    if not np.any(keep):
        keep = gmm.weights_ == gmm.weights_.max()
    weights = gmm.weights_[keep]
    weights = weights / weights.sum()
    return GmmModel(
        weights=weights,
        means=gmm.means_[keep],
        covariances=gmm.covariances_[keep],
        feature_mean=feature_mean,
        feature_std=feature_std,
        elbo_trace=np.array(trace),
        converged=bool(gmm.converged_),
    )


def sample_features(model: GmmModel, k: int, seed: int = 0) -> np.ndarray:
    """Draw `k` feature vectors by ancestral sampling, shape (k, 25).

    Each record consumes its own stream spawned from ``SeedSequence(seed)``,
    so any partition of the index range reproduces the same draws.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    cum = np.cumsum(model.weights)
    dim = model.means.shape[1]
    out = np.empty((k, dim))
    streams = np.random.SeedSequence(seed).spawn(k)
    for i, ss in enumerate(streams):
        rng = np.random.default_rng(ss)
        comp = int(np.searchsorted(cum, rng.random()))
        comp = min(comp, model.n_components - 1)
        z = model.means[comp] + model._cholesky[comp] @ rng.standard_normal(dim)
        out[i] = z * model.feature_std + model.feature_mean
    return out


# ---------------------------------------------------------------------------
# feature assembly and inversion
# ---------------------------------------------------------------------------

def log_siop_matrices(library: SpectralLibrary) -> dict:
    """log10 SIOP spectra per family, each of shape (N, 301)."""
    mats = {name: [] for name in SIOP_FAMILIES}
    for i in range(len(library)):
        siops = library.siops(i)
        for name in SIOP_FAMILIES:
            vals = getattr(siops, name).values
            mats[name].append(np.log10(np.maximum(vals, _LOG_FLOOR)))
    return {name: np.array(rows) for name, rows in mats.items()}


def fit_siop_bases(library: SpectralLibrary) -> dict:
    """Independent PCA basis per SIOP family, fitted on the library."""
    return {name: fit_pca(mat) for name, mat in log_siop_matrices(library).items()}


def assemble_features(library: SpectralLibrary, bases: dict) -> np.ndarray:
    """Feature matrix (N, 25): log10 BGC, four blocks of SIOP scores, T, S."""
    logs = log_siop_matrices(library)
    n = len(library)
    out = np.empty((n, N_FEATURES))
    for j, name in enumerate(("tss", "doc", "tchla")):
        col = library.scalar(name)
        if np.any(col <= 0):
            raise ValueError(f"{name} must be positive to take log10")
        out[:, j] = np.log10(col)
    for name in SIOP_FAMILIES:
        out[:, _SCORE_SLICES[name]] = project(bases[name], logs[name])
    out[:, 23] = library.scalar("temp")
    out[:, 24] = library.scalar("sal")
    if not np.all(np.isfinite(out)):
        raise ValueError("assembled feature matrix contains non-finite entries")
    return out


def invert_features(features: np.ndarray, bases: dict) -> dict:
    """Map feature vectors back to physical space.

    Returns a dict of arrays: tss/doc/tchla/temp/sal of shape (K,), one
    (K, 301) SIOP value matrix per family, and the score block (K, 20).
    Salinity and temperature are clamped to physical ranges; concentrations
    and SIOP spectra are positive by construction (powers of ten).
    """
    f = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if not np.all(np.isfinite(f)):
        raise ValueError("features must be finite")
    out = {
        "tss": 10.0 ** f[:, 0],
        "doc": 10.0 ** f[:, 1],
        "tchla": 10.0 ** f[:, 2],
        "temp": np.clip(f[:, 23], *_TEMP_RANGE),
        "sal": np.clip(f[:, 24], *_SAL_RANGE),
        "scores": f[:, 3:23].copy(),
    }
    for name in SIOP_FAMILIES:
        out[name] = 10.0 ** reconstruct(bases[name], f[:, _SCORE_SLICES[name]])
    return out


# ---------------------------------------------------------------------------
# dataset container and end-to-end generation
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class SyntheticDataset:
    """K simulated records of (biogeochemical state, SIOP scores, R_rs)."""

    tss: np.ndarray
    doc: np.ndarray
    tchla: np.ndarray
    temp: np.ndarray
    sal: np.ndarray
    scores: np.ndarray
    rrs: np.ndarray
    bases: dict | None = None
    gmm: GmmModel | None = None
    seed: int | None = None
    noise_sigma: float = 0.0

    def __len__(self) -> int:
        return len(self.tss)

    @property
    def bgc_matrix(self) -> np.ndarray:
        """(K, 3) linear-space TSS, DOC, TChl-a."""
        return np.column_stack([self.tss, self.doc, self.tchla])

    @property
    def log_bgc_matrix(self) -> np.ndarray:
        return np.log10(self.bgc_matrix)

    def bgc_state(self, i: int) -> BgcState:
        return BgcState(tss=float(self.tss[i]), doc=float(self.doc[i]),
                        tchla=float(self.tchla[i]), temp=float(self.temp[i]),
                        sal=float(self.sal[i]))

    def siops(self, i: int) -> SiopSet:
        if self.bases is None:
            raise ValueError("dataset carries no PCA bases; SIOPs unavailable")
        vals = {}
        for name in SIOP_FAMILIES:
            sl = _SCORE_SLICES[name]
            scores = self.scores[i, sl.start - 3:sl.stop - 3]
            vals[name] = Spectrum(10.0 ** reconstruct(self.bases[name], scores))
        return SiopSet(**vals)

    def record(self, i: int):
        return self.bgc_state(i), self.siops(i), Spectrum(self.rrs[i])


def generate_dataset(library: SpectralLibrary, k: int = 10000, seed: int = 0,
                     noise_sigma: float = 0.0, gmm_config: GmmConfig | None = None,
                     tables: WaterIopTables | None = None,
                     constants: RrsConstants | None = None,
                     chunk: int = 2048) -> SyntheticDataset:
    """Full pipeline: fit bases and mixture on the library, sample `k` records,
    invert to physical space and simulate R_rs for every record.

    With ``noise_sigma > 0`` multiplicative Gaussian noise of that fractional
    magnitude is applied to the simulated spectra (off by default).
    """
    tables = tables or bundled_water_iops()
    constants = constants or DEFAULT_CONSTANTS
    bases = fit_siop_bases(library)
    features = assemble_features(library, bases)
    gmm = fit_dpgmm(features, gmm_config, seed=seed)
    sampled = sample_features(gmm, k, seed=seed)
    phys = invert_features(sampled, bases)

    rrs = np.empty((k, STANDARD_GRID.n_bands))
    for lo in range(0, k, chunk):
        hi = min(lo + chunk, k)
        rrs[lo:hi] = forward_batch(
            phys["tss"][lo:hi], phys["doc"][lo:hi], phys["tchla"][lo:hi],
            phys["temp"][lo:hi], phys["sal"][lo:hi],
            phys["a_d_star"][lo:hi], phys["a_y_star"][lo:hi],
            phys["a_ph_star"][lo:hi], phys["b_bp_star"][lo:hi],
            tables, constants)
    if noise_sigma > 0.0:
        noise_rng = np.random.default_rng(np.random.SeedSequence((seed, 0xC0FFEE)))
        rrs = np.maximum(rrs * (1.0 + noise_sigma * noise_rng.standard_normal(rrs.shape)),
                         0.0)
    return SyntheticDataset(
        tss=phys["tss"], doc=phys["doc"], tchla=phys["tchla"],
        temp=phys["temp"], sal=phys["sal"], scores=phys["scores"], rrs=rrs,
        bases=bases, gmm=gmm, seed=seed, noise_sigma=noise_sigma,
    )
