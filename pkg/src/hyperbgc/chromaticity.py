"""CIE 1931 chromaticity of reflectance spectra.

Tristimulus values are the illuminant-weighted integrals of a reflectance
spectrum against the 2-degree standard-observer colour matching functions,
restricted to the 400-700 nm grid:

    X = integral R_rs(l) * E(l) * xbar(l) dl   (same for Y, Z)
    (x, y) = (X, Y) / (X + Y + Z)

The bundled colour matching functions and D65 spectral power distribution are
the CIE 15:2004 5 nm tables interpolated to the 1 nm grid; truncation to
400-700 nm shifts white points by well under 1e-3 in x and y.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .grid import STANDARD_GRID, Spectrum, integrate

__all__ = ["Chromaticity", "CieTables", "bundled_cie_tables", "chromaticity"]


@dataclass(frozen=True)
class Chromaticity:
    """CIE 1931 (x, y) coordinates; nonnegative with x + y <= 1."""

    x: float
    y: float


@dataclass(frozen=True)
class CieTables:
    """Colour matching functions and the D65 illuminant on the standard grid."""

    xbar: Spectrum
    ybar: Spectrum
    zbar: Spectrum
    d65: Spectrum

    @property
    def equal_energy(self) -> Spectrum:
        return Spectrum.constant(1.0, self.xbar.grid)


@functools.lru_cache(maxsize=1)
def bundled_cie_tables() -> CieTables:
    """Load the packaged CIE tables (cie_tables.csv)."""
    path = resources.files("hyperbgc.data").joinpath("cie_tables.csv")
    with path.open("rb") as fh:
        rows = np.genfromtxt(fh, delimiter=",", names=True)
    grid = STANDARD_GRID
    if not np.array_equal(rows["wavelength_nm"], grid.wavelengths):
        raise ValueError("bundled cie_tables.csv does not match the standard grid")
    return CieTables(
        xbar=Spectrum(rows["xbar"], grid),
        ybar=Spectrum(rows["ybar"], grid),
        zbar=Spectrum(rows["zbar"], grid),
        d65=Spectrum(rows["d65"], grid),
    )


def chromaticity(rrs: Spectrum, tables: CieTables | None = None,
                 illuminant: Spectrum | None = None) -> Chromaticity:
    """CIE 1931 (x, y) of a reflectance spectrum under an illuminant (D65 default).

    Scaling the spectrum by any positive constant leaves the result unchanged.
    Raises for the all-black spectrum (X + Y + Z = 0).
    """
    tables = tables or bundled_cie_tables()
    illuminant = illuminant or tables.d65
    if np.any(rrs.values < 0):
        raise ValueError("reflectance must be nonnegative")
    weighted = Spectrum(rrs.values * illuminant.values, rrs.grid)
    x_val = integrate(weighted, tables.xbar)
    y_val = integrate(weighted, tables.ybar)
    z_val = integrate(weighted, tables.zbar)
    total = x_val + y_val + z_val
    if total <= 0:
        raise ValueError("zero tristimulus sum: spectrum has no visible energy")
    return Chromaticity(x=x_val / total, y=y_val / total)
