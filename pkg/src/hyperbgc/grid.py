"""Fixed 400-700 nm wavelength grid, spectrum container, resampling and quadrature.

Every spectral quantity in this package (reflectances, absorption and
backscattering coefficients, mass-specific coefficients, colour-matching
functions) lives on the same 301-band grid covering 400-700 nm at 1 nm
spacing. Keeping a single global grid means downstream array shapes never
have to be negotiated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "WavelengthGrid",
    "Spectrum",
    "STANDARD_GRID",
    "resample",
    "integrate",
]

# Maximum gap tolerated between the requested grid edge and the raw data
# coverage before resampling is refused (nm).
_MAX_EDGE_GAP_NM = 20.0


@dataclass(frozen=True)
class WavelengthGrid:
    """Uniform wavelength grid, fixed at 400-700 nm with 1 nm spacing."""

    start_nm: float = 400.0
    end_nm: float = 700.0
    step_nm: float = 1.0

    def __post_init__(self):
        if not (self.start_nm < self.end_nm and self.step_nm > 0):
            raise ValueError("grid bounds must satisfy start < end with positive step")
        if self.n_bands != 301:
            raise ValueError(
                f"grid must have exactly 301 bands, got {self.n_bands} "
                f"({self.start_nm}-{self.end_nm} nm at {self.step_nm} nm)"
            )

    @property
    def n_bands(self) -> int:
        return int(round((self.end_nm - self.start_nm) / self.step_nm)) + 1

    @property
    def wavelengths(self) -> np.ndarray:
        """Band-centre wavelengths in nm, shape (301,)."""
        wl = self.start_nm + self.step_nm * np.arange(self.n_bands)
        wl.setflags(write=False)
        return wl

    def index_of(self, wavelength_nm: float) -> int:
        """Index of the band at `wavelength_nm`; raises if off-grid."""
        pos = (wavelength_nm - self.start_nm) / self.step_nm
        idx = int(round(pos))
        if not (0 <= idx < self.n_bands) or abs(pos - idx) > 1e-9:
            raise ValueError(f"{wavelength_nm} nm is not on the {self.start_nm}-{self.end_nm} grid")
        return idx


STANDARD_GRID = WavelengthGrid()


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Real-valued function of wavelength sampled on a :class:`WavelengthGrid`.

    Units are carried by context (sr^-1 for reflectances, m^-1 for IOPs, ...).
    Values are validated to be finite and the array is frozen, so instances
    are safe to share across parallel workers.
    """

    values: np.ndarray
    grid: WavelengthGrid = field(default=STANDARD_GRID)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (self.grid.n_bands,):
            raise ValueError(
                f"spectrum has {values.shape} values for a {self.grid.n_bands}-band grid"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("spectrum values must all be finite")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, value: float, grid: WavelengthGrid = STANDARD_GRID) -> "Spectrum":
        return cls(np.full(grid.n_bands, float(value)), grid)

    @property
    def wavelengths(self) -> np.ndarray:
        return self.grid.wavelengths

    def at(self, wavelength_nm: float) -> float:
        """Value at an on-grid wavelength."""
        return float(self.values[self.grid.index_of(wavelength_nm)])


def resample(raw_wavelengths, raw_values, grid: WavelengthGrid = STANDARD_GRID) -> Spectrum:
    """Linearly interpolate irregular (wavelength, value) pairs onto the grid.

    Endpoints outside the raw coverage are filled by nearest-value extension,
    which cannot overshoot (no extrapolated negative reflectances at the grid
    edges). Raw data must be sorted by wavelength and may not leave a gap of
    more than 20 nm at either end of the grid.

    Parameters
    ----------
    raw_wavelengths, raw_values : array_like
        Paired samples, sorted by strictly increasing wavelength, >= 2 pairs.
    grid : WavelengthGrid
        Target grid (the standard 301-band grid by default).
    """
    wl = np.asarray(raw_wavelengths, dtype=np.float64)
    vals = np.asarray(raw_values, dtype=np.float64)
    if wl.ndim != 1 or wl.shape != vals.shape:
        raise ValueError("raw wavelengths and values must be 1-D arrays of equal length")
    if wl.size < 2:
        raise ValueError("resampling needs at least 2 raw pairs")
    if np.any(np.diff(wl) <= 0):
        raise ValueError("raw wavelengths must be strictly increasing")
    if not (np.all(np.isfinite(wl)) and np.all(np.isfinite(vals))):
        raise ValueError("raw pairs must be finite")
    if wl[0] > grid.start_nm + _MAX_EDGE_GAP_NM:
        raise ValueError(
            f"raw data starts at {wl[0]} nm, more than {_MAX_EDGE_GAP_NM} nm above "
            f"the grid start ({grid.start_nm} nm)"
        )
    if wl[-1] < grid.end_nm - _MAX_EDGE_GAP_NM:
        raise ValueError(
            f"raw data ends at {wl[-1]} nm, more than {_MAX_EDGE_GAP_NM} nm below "
            f"the grid end ({grid.end_nm} nm)"
        )
    # np.interp clamps to the end values, i.e. nearest-value extension.
    return Spectrum(np.interp(grid.wavelengths, wl, vals), grid)


def integrate(s: Spectrum, w: Spectrum) -> float:
    """Trapezoidal quadrature of ``s(lambda) * w(lambda) dlambda`` over the grid."""
    if s.grid != w.grid:
        raise ValueError("integrate requires both spectra on the same grid")
    return float(np.trapezoid(s.values * w.values, s.grid.wavelengths))
