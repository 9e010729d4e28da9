"""Bio-optical spectral library: ingestion, SIOP derivation, descriptive statistics.

A library record couples in situ biogeochemical measurements with the IOPs
measured on the same water sample. Mass-specific IOPs (SIOPs) are derived by
normalising each IOP by the concentration of its driving constituent:

    a*_y(lambda)  = a_y(440) * exp(-S_y * (lambda - 440)) / DOC
    b*_bp(lambda) = b_bp(550) * (lambda / 550)^-S_bbp / TSS
    a*_d(lambda)  = a_d(lambda) / TSS
    a*_ph(lambda) = a_ph(lambda) / TChl-a
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .bio_optics import SiopSet
from .grid import STANDARD_GRID, Spectrum, WavelengthGrid

__all__ = [
    "LibraryRecord",
    "SpectralLibrary",
    "derive_cdom_siop",
    "derive_bbp_siop",
    "derive_nap_siop",
    "derive_ph_siop",
    "derive_siops",
    "median_siops",
    "summary_stats",
    "correlation_matrix",
    "CORRELATION_VARIABLES",
]

log = logging.getLogger(__name__)

# Variables of the library-wide Pearson correlation matrix. IOPs are raw
# (not mass-specific), evaluated at their conventional reference bands.
CORRELATION_VARIABLES = (
    "temp", "sal", "tss", "doc", "tchla",
    "a_y_440", "b_bp_550", "a_d_440", "a_ph_440",
)


@dataclass(frozen=True, eq=False)
class LibraryRecord:
    """One spectral-library sample: BGC scalars, IOP scalars/spectra, T and S."""

    temp: float
    sal: float
    tss: float
    doc: float
    tchla: float
    a_y_440: float
    s_y: float
    b_bp_550: float
    s_bbp: float
    a_d: Spectrum
    a_ph: Spectrum

    def __post_init__(self):
        if not (self.tss > 0 and self.doc > 0 and self.tchla > 0):
            raise ValueError("concentrations must be strictly positive")
        if self.s_y <= 0:
            raise ValueError("CDOM slope s_y must be positive")
        if self.a_y_440 < 0 or self.b_bp_550 < 0:
            raise ValueError("IOP magnitudes must be nonnegative")
        if np.any(self.a_d.values < 0) or np.any(self.a_ph.values < 0):
            raise ValueError("absorption spectra must be nonnegative")
        if self.a_d.grid != self.a_ph.grid:
            raise ValueError("record spectra must share one grid")


class SpectralLibrary:
    """Immutable collection of :class:`LibraryRecord`."""

    def __init__(self, records):
        records = tuple(records)
        if not records:
            raise ValueError("spectral library must contain at least one record")
        self.records = records
        self.grid = records[0].a_d.grid

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i) -> LibraryRecord:
        return self.records[i]

    def scalar(self, name: str) -> np.ndarray:
        """Column of one scalar variable across records; `a_d_440`/`a_ph_440`
        are read off the stored spectra."""
        if name == "a_d_440":
            return np.array([r.a_d.at(440.0) for r in self.records])
        if name == "a_ph_440":
            return np.array([r.a_ph.at(440.0) for r in self.records])
        return np.array([getattr(r, name) for r in self.records])

    def siops(self, i: int) -> SiopSet:
        return derive_siops(self.records[i])


def derive_cdom_siop(a_y_440: float, s_y: float, doc: float,
                     grid: WavelengthGrid = STANDARD_GRID) -> Spectrum:
    """Mass-specific CDOM absorption a*_y(lambda), m^2/g."""
    if doc <= 0:
        raise ValueError("DOC must be positive")
    if s_y < 0:
        raise ValueError("CDOM slope must be nonnegative")
    lam = grid.wavelengths
    return Spectrum(a_y_440 * np.exp(-s_y * (lam - 440.0)) / doc, grid)


def derive_bbp_siop(b_bp_550: float, s_bbp: float, tss: float,
                    grid: WavelengthGrid = STANDARD_GRID) -> Spectrum:
    """Mass-specific particulate backscattering b*_bp(lambda), m^2/g."""
    if tss <= 0:
        raise ValueError("TSS must be positive")
    lam = grid.wavelengths
    return Spectrum(b_bp_550 * (lam / 550.0) ** (-s_bbp) / tss, grid)


def derive_nap_siop(a_d: Spectrum, tss: float) -> Spectrum:
    """Mass-specific NAP absorption a*_d(lambda) = a_d(lambda)/TSS, m^2/g."""
    if tss <= 0:
        raise ValueError("TSS must be positive")
    return Spectrum(a_d.values / tss, a_d.grid)


def derive_ph_siop(a_ph: Spectrum, tchla: float) -> Spectrum:
    """Mass-specific phytoplankton absorption a*_ph(lambda) = a_ph(lambda)/TChl-a, m^2/mg."""
    if tchla <= 0:
        raise ValueError("TChl-a must be positive")
    return Spectrum(a_ph.values / tchla, a_ph.grid)


def derive_siops(record: LibraryRecord) -> SiopSet:
    """All four mass-specific spectra for one record."""
    return SiopSet(
        a_d_star=derive_nap_siop(record.a_d, record.tss),
        a_y_star=derive_cdom_siop(record.a_y_440, record.s_y, record.doc,
                                  record.a_d.grid),
        a_ph_star=derive_ph_siop(record.a_ph, record.tchla),
        b_bp_star=derive_bbp_siop(record.b_bp_550, record.s_bbp, record.tss,
                                  record.a_d.grid),
    )


def median_siops(library: SpectralLibrary) -> SiopSet:
    """Per-band median of the library's derived mass-specific spectra."""
    stacks = {name: [] for name in ("a_d_star", "a_y_star", "a_ph_star", "b_bp_star")}
    for i in range(len(library)):
        siops = library.siops(i)
        for name in stacks:
            stacks[name].append(getattr(siops, name).values)
    return SiopSet(**{name: Spectrum(np.median(np.array(rows), axis=0))
                      for name, rows in stacks.items()})


# Variables summarised the way the library is normally reported: BGC and
# physics as measured, optical properties in mass-specific form at their
# reference bands.
_SUMMARY_VARIABLES = (
    "temp", "sal", "tss", "doc", "tchla",
    "a_y_star_440", "b_bp_star_550", "a_d_star_440", "a_ph_star_440",
)


def _summary_column(library: SpectralLibrary, name: str) -> np.ndarray:
    if name == "a_y_star_440":
        return np.array([r.a_y_440 / r.doc for r in library])
    if name == "b_bp_star_550":
        return np.array([r.b_bp_550 / r.tss for r in library])
    if name == "a_d_star_440":
        return np.array([r.a_d.at(440.0) / r.tss for r in library])
    if name == "a_ph_star_440":
        return np.array([r.a_ph.at(440.0) / r.tchla for r in library])
    return library.scalar(name)


def summary_stats(library: SpectralLibrary) -> dict:
    """Per-variable min/median/max/mean/std over the library.

    Standard deviation uses the population denominator N so that results are
    well-defined for single-record libraries.
    """
    out = {}
    for name in _SUMMARY_VARIABLES:
        col = _summary_column(library, name)
        out[name] = {
            "min": float(np.min(col)),
            "median": float(np.median(col)),
            "max": float(np.max(col)),
            "mean": float(np.mean(col)),
            "std": float(np.std(col)),
        }
    return out


def correlation_matrix(library: SpectralLibrary):
    """Pearson correlations among T, S, BGC parameters and reference-band IOPs.

    Returns ``(matrix, names)`` where matrix is 9x9, symmetric with unit
    diagonal. Pairs involving a zero-variance column are undefined and
    reported as NaN.
    """
    if len(library) < 3:
        raise ValueError("correlation matrix needs at least 3 records")
    cols = np.stack([library.scalar(n) for n in CORRELATION_VARIABLES])
    centred = cols - cols.mean(axis=1, keepdims=True)
    std = centred.std(axis=1)
    degenerate = std == 0.0
    if np.any(degenerate):
        log.warning("zero-variance columns in correlation matrix: %s",
                    [n for n, d in zip(CORRELATION_VARIABLES, degenerate) if d])
    n = len(CORRELATION_VARIABLES)
    mat = np.full((n, n), np.nan)
    for i in range(n):
        for j in range(i, n):
            if i == j:
                mat[i, j] = 1.0 if not degenerate[i] else np.nan
                continue
            if degenerate[i] or degenerate[j]:
                continue
            r = float(np.mean(centred[i] * centred[j]) / (std[i] * std[j]))
            mat[i, j] = mat[j, i] = min(1.0, max(-1.0, r))
    return mat, CORRELATION_VARIABLES
