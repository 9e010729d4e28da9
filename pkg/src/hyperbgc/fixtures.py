"""Deterministic synthetic spectral libraries and regions for tests and demos.

`make_fixture_library` draws records from a known three-component mixture of
water types (turbid estuarine, moderate coastal, clear marine) with realistic
ranges, spectral shapes and inter-parameter correlations: NAP and CDOM
absorption decay exponentially, particulate backscattering follows a power
law, and phytoplankton absorption carries the 438 nm and 676 nm pigment
peaks. Because the generator is itself a Gaussian mixture over the quantities
the synthesis pipeline models, it provides a ground truth against which
distribution recovery can be judged.

`make_region` builds a closed-loop retrieval problem: biogeochemical states
drawn around a chosen water type, pushed through the forward model under one
fixed regional SIOP set.
"""

from __future__ import annotations

import numpy as np

from .bio_optics import SiopSet, WaterIopTables, forward_batch
from .grid import STANDARD_GRID, Spectrum
from .library import LibraryRecord, SpectralLibrary

__all__ = ["make_fixture_library", "make_region", "scaled_siops"]

# Component weights and per-component parameters of the generating mixture:
# log10 BGC means/sigmas, ancillary physics, and a CDOM-richness shift.
# Sigmas are narrow enough that the physical-range clips below almost never
# bind, keeping the library an honest Gaussian mixture.
_WEIGHTS = np.array([0.45, 0.35, 0.20])
_COMPONENTS = (
    # estuarine / turbid
    dict(ltss=0.95, ldoc=0.55, ltchla=0.35, sal=12.0, sal_sd=4.5,
         temp=26.0, temp_sd=2.0, ay_shift=0.12),
    # moderate coastal
    dict(ltss=0.35, ldoc=0.10, ltchla=-0.05, sal=32.0, sal_sd=2.0,
         temp=23.0, temp_sd=2.5, ay_shift=0.0),
    # clear marine
    dict(ltss=-0.40, ldoc=-0.40, ltchla=-0.60, sal=36.0, sal_sd=1.2,
         temp=21.0, temp_sd=2.5, ay_shift=-0.25),
)
_BGC_SIGMA = np.array([0.30, 0.22, 0.26])
_BGC_CORR = np.array([
    [1.00, 0.50, 0.45],
    [0.50, 1.00, 0.35],
    [0.45, 0.35, 1.00],
])


def _phyto_shape(lam: np.ndarray, red_peak: float, shoulder: float) -> np.ndarray:
    """Phytoplankton absorption shape, normalised to 1 at 440 nm."""
    shape = (np.exp(-0.5 * ((lam - 438.0) / 23.0) ** 2)
             + red_peak * np.exp(-0.5 * ((lam - 676.0) / 10.5) ** 2)
             + shoulder * np.exp(-0.5 * ((lam - 500.0) / 55.0) ** 2))
    at440 = (np.exp(-0.5 * (2.0 / 23.0) ** 2)
             + red_peak * np.exp(-0.5 * (236.0 / 10.5) ** 2)
             + shoulder * np.exp(-0.5 * (60.0 / 55.0) ** 2))
    return shape / at440


def make_fixture_library(n: int = 247, seed: int = 7) -> SpectralLibrary:
    """Synthetic spectral library of `n` records from the known 3-component mixture."""
    rng = np.random.default_rng(seed)
    grid = STANDARD_GRID
    lam = grid.wavelengths
    chol = np.linalg.cholesky(_BGC_CORR * np.outer(_BGC_SIGMA, _BGC_SIGMA))
    records = []
    for _ in range(n):
        comp = _COMPONENTS[rng.choice(len(_WEIGHTS), p=_WEIGHTS)]
        lbgc = (np.array([comp["ltss"], comp["ldoc"], comp["ltchla"]])
                + chol @ rng.standard_normal(3))
        lbgc = np.clip(lbgc, [-0.90, -0.62, -1.23], [1.85, 1.15, 1.35])
        tss, doc, tchla = 10.0 ** lbgc
        temp = float(np.clip(rng.normal(comp["temp"], comp["temp_sd"]), 12.1, 31.4))
        sal = float(np.clip(rng.normal(comp["sal"], comp["sal_sd"]), 0.08, 39.4))

        s_y = float(np.clip(rng.normal(0.0165, 0.0018), 0.010, 0.024))
        a_y_star_440 = 10.0 ** rng.normal(-0.62 + comp["ay_shift"], 0.22)
        a_y_440 = a_y_star_440 * doc

        s_bbp = float(np.clip(rng.normal(0.9, 0.25), 0.1, 1.8))
        b_bp_star_550 = 10.0 ** rng.normal(-2.11, 0.18)
        b_bp_550 = b_bp_star_550 * tss

        s_d = float(np.clip(rng.normal(0.0105, 0.0012), 0.007, 0.014))
        a_d_star_440 = 10.0 ** rng.normal(-1.52, 0.20)
        a_d = Spectrum(a_d_star_440 * tss * np.exp(-s_d * (lam - 440.0)), grid)

        a_ph_star_440 = 10.0 ** rng.normal(-1.21, 0.22)
        red_peak = float(np.clip(rng.normal(0.42, 0.06), 0.20, 0.65))
        shoulder = float(np.clip(rng.normal(0.30, 0.07), 0.10, 0.50))
        a_ph = Spectrum(a_ph_star_440 * tchla * _phyto_shape(lam, red_peak, shoulder),
                        grid)

        records.append(LibraryRecord(
            temp=temp, sal=sal, tss=float(tss), doc=float(doc), tchla=float(tchla),
            a_y_440=float(a_y_440), s_y=s_y, b_bp_550=float(b_bp_550), s_bbp=s_bbp,
            a_d=a_d, a_ph=a_ph,
        ))
    return SpectralLibrary(records)


def scaled_siops(siops: SiopSet, a_d: float = 1.0, a_y: float = 1.0,
                 a_ph: float = 1.0, b_bp: float = 1.0) -> SiopSet:
    """Scale each mass-specific spectrum by a factor; handy for building
    regional SIOP sets that sit outside a training cloud."""
    return SiopSet(
        a_d_star=Spectrum(siops.a_d_star.values * a_d, siops.grid),
        a_y_star=Spectrum(siops.a_y_star.values * a_y, siops.grid),
        a_ph_star=Spectrum(siops.a_ph_star.values * a_ph, siops.grid),
        b_bp_star=Spectrum(siops.b_bp_star.values * b_bp, siops.grid),
    )


def make_region(siops: SiopSet, tables: WaterIopTables, n: int = 300, seed: int = 11,
                ltss_mean: float = 0.4, ldoc_mean: float = 0.15,
                ltchla_mean: float = 0.0):
    """Closed-loop regional dataset under one fixed SIOP set.

    Returns ``(rrs, bgc, temp, sal)`` with rrs of shape (n, 301) and bgc of
    shape (n, 3) in linear units ordered (TSS, DOC, TChl-a).
    """
    rng = np.random.default_rng(seed)
    chol = np.linalg.cholesky(_BGC_CORR * np.outer(_BGC_SIGMA * 1.4, _BGC_SIGMA * 1.4))
    lbgc = (np.array([ltss_mean, ldoc_mean, ltchla_mean])
            + rng.standard_normal((n, 3)) @ chol.T)
    lbgc = np.clip(lbgc, [-0.90, -0.62, -1.23], [1.85, 1.15, 1.35])
    bgc = 10.0 ** lbgc
    temp = np.clip(rng.normal(24.0, 2.0, size=n), 12.1, 31.4)
    sal = np.clip(rng.normal(30.0, 3.0, size=n), 0.08, 39.4)
    rrs = forward_batch(bgc[:, 0], bgc[:, 1], bgc[:, 2], temp, sal,
                        siops.a_d_star.values, siops.a_y_star.values,
                        siops.a_ph_star.values, siops.b_bp_star.values, tables)
    return rrs, bgc, temp, sal
