"""Bio-optical forward model: biogeochemistry + specific IOPs -> above-water R_rs.

The model composes, band by band on the standard grid:

1. pure-water absorption corrected for temperature and salinity,
2. total absorption from mass-specific absorption of non-algal particles
   (NAP), CDOM and phytoplankton scaled by TSS, DOC and TChl-a,
3. pure-water plus particulate backscattering,
4. the backscattering albedo u = b_b / (a + b_b),
5. the quadratic subsurface-reflectance approximation
   r_rs = g0*u + g1*u^2 with g0 = 0.082 sr^-1, g1 = 0.17 sr^-1,
6. the air-water interface transfer R_rs = 0.52*r_rs / (1 - 1.7*r_rs).

All functions are pure; identical inputs give bit-identical outputs, and the
batched path used for bulk simulation performs exactly the same elementwise
operations as the single-sample path.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .grid import STANDARD_GRID, Spectrum, WavelengthGrid

__all__ = [
    "RrsConstants",
    "WaterIopTables",
    "BgcState",
    "SiopSet",
    "water_absorption",
    "total_absorption",
    "water_backscatter",
    "total_backscatter",
    "backscatter_albedo",
    "subsurface_rrs",
    "above_water_rrs",
    "forward",
    "forward_batch",
]


@dataclass(frozen=True)
class RrsConstants:
    """Empirical radiative-transfer coefficients.

    g0/g1 are the quadratic subsurface-reflectance coefficients; k_up and k_q
    are the upward transmittance and internal-reflection coefficients of the
    standard air-water interface correction.
    """

    g0: float = 0.082
    g1: float = 0.17
    k_up: float = 0.52
    k_q: float = 1.7


DEFAULT_CONSTANTS = RrsConstants()


@dataclass(frozen=True, eq=False)
class WaterIopTables:
    """Pure-water absorption reference and its temperature/salinity corrections.

    a_w(lambda, T, S) = a_w_ref(lambda) + (T - t_ref)*psi_T(lambda) + S*psi_S(lambda)

    The bundled table combines the Mason et al. (2016) and Pope & Fry (1997)
    pure-water absorption measurements with smooth temperature/salinity
    coefficients of Sullivan et al. (2006) magnitudes. The model never
    hard-codes table values; synthetic tables can be substituted freely.
    """

    a_w_ref: Spectrum
    psi_T: Spectrum
    psi_S: Spectrum
    t_ref: float = 22.0

    def __post_init__(self):
        if not (self.a_w_ref.grid == self.psi_T.grid == self.psi_S.grid):
            raise ValueError("water IOP tables must share one grid")
        if np.any(self.a_w_ref.values < 0):
            raise ValueError("reference water absorption must be nonnegative")

    @property
    def grid(self) -> WavelengthGrid:
        return self.a_w_ref.grid

    @classmethod
    def flat(cls, a_w: float = 0.0, psi_t: float = 0.0, psi_s: float = 0.0,
             grid: WavelengthGrid = STANDARD_GRID) -> "WaterIopTables":
        """Synthetic constant tables, mainly for tests."""
        return cls(Spectrum.constant(a_w, grid), Spectrum.constant(psi_t, grid),
                   Spectrum.constant(psi_s, grid))


@functools.lru_cache(maxsize=1)
def bundled_water_iops() -> WaterIopTables:
    """Load the packaged water-IOP reference table (water_iops.csv)."""
    path = resources.files("hyperbgc.data").joinpath("water_iops.csv")
    with path.open("rb") as fh:
        rows = np.genfromtxt(fh, delimiter=",", names=True)
    grid = STANDARD_GRID
    if not np.array_equal(rows["wavelength_nm"], grid.wavelengths):
        raise ValueError("bundled water_iops.csv does not match the standard grid")
    return WaterIopTables(
        Spectrum(rows["a_w_ref"], grid),
        Spectrum(rows["psi_T"], grid),
        Spectrum(rows["psi_S"], grid),
    )


@dataclass(frozen=True)
class BgcState:
    """Biogeochemical state: concentrations plus ancillary physics.

    tss in mg/L, doc in mg/L, tchla in ug/L, temp in degrees C, sal unitless.
    """

    tss: float
    doc: float
    tchla: float
    temp: float
    sal: float

    def __post_init__(self):
        if not (self.tss > 0 and self.doc > 0 and self.tchla > 0):
            raise ValueError("TSS, DOC and TChl-a must be strictly positive")
        if self.sal < 0:
            raise ValueError("salinity must be nonnegative")
        if not (-2.0 <= self.temp <= 40.0):
            raise ValueError("temperature must be within [-2, 40] degrees C")


@dataclass(frozen=True, eq=False)
class SiopSet:
    """Mass-specific IOP spectra for one water type.

    a_d_star (m^2/g, NAP absorption per unit TSS), a_y_star (m^2/g, CDOM
    absorption per unit DOC), a_ph_star (m^2/mg, phytoplankton absorption per
    unit TChl-a), b_bp_star (m^2/g, particulate backscattering per unit TSS).
    """

    a_d_star: Spectrum
    a_y_star: Spectrum
    a_ph_star: Spectrum
    b_bp_star: Spectrum

    def __post_init__(self):
        grids = {self.a_d_star.grid, self.a_y_star.grid, self.a_ph_star.grid,
                 self.b_bp_star.grid}
        if len(grids) != 1:
            raise ValueError("SIOP spectra must share one grid")
        for name in ("a_d_star", "a_y_star", "a_ph_star", "b_bp_star"):
            if np.any(getattr(self, name).values < 0):
                raise ValueError(f"{name} must be nonnegative")

    @property
    def grid(self) -> WavelengthGrid:
        return self.a_d_star.grid

    @classmethod
    def zeros(cls, grid: WavelengthGrid = STANDARD_GRID) -> "SiopSet":
        z = Spectrum.constant(0.0, grid)
        return cls(z, z, z, z)


# ---------------------------------------------------------------------------
# elementwise core, shared by scalar and batched entry points
# ---------------------------------------------------------------------------

def _water_absorption_values(temp, sal, tables: WaterIopTables):
    a_w = (tables.a_w_ref.values
           + (np.asarray(temp) - tables.t_ref)[..., None] * tables.psi_T.values
           + np.asarray(sal)[..., None] * tables.psi_S.values)
    # corrections at edge wavelengths must never drive absorption negative
    return np.maximum(a_w, 0.0)


def _water_backscatter_values(sal, wavelengths):
    lam = np.asarray(wavelengths, dtype=np.float64)
    return (1.38e-4 * (lam / 500.0) ** (-4.32)
            * (1.0 + 0.3 * np.asarray(sal)[..., None] / 37.0))


def _rrs_from_iops(a, b_b, constants: RrsConstants):
    # expressions match the step functions term for term so the one-call
    # composition is bit-identical to applying the steps separately
    u = b_b / (a + b_b)
    r_rs = constants.g0 * u + constants.g1 * u ** 2
    return constants.k_up * r_rs / (1.0 - constants.k_q * r_rs)


# ---------------------------------------------------------------------------
# public single-sample operations
# ---------------------------------------------------------------------------

def water_absorption(temp: float, sal: float, tables: WaterIopTables) -> Spectrum:
    """Pure-water absorption at the given temperature and salinity, m^-1.

    Clamped at zero from below after the corrections are applied.
    """
    if sal < 0:
        raise ValueError("salinity must be nonnegative")
    if not (-2.0 <= temp <= 40.0):
        raise ValueError("temperature must be within [-2, 40] degrees C")
    return Spectrum(_water_absorption_values(float(temp), float(sal), tables)[()],
                    tables.grid)


def total_absorption(bgc: BgcState, siops: SiopSet, tables: WaterIopTables) -> Spectrum:
    """Total absorption a = a_w + TSS*a*_d + DOC*a*_y + TChl-a*a*_ph, m^-1."""
    a_w = _water_absorption_values(bgc.temp, bgc.sal, tables)
    a = (a_w + bgc.tss * siops.a_d_star.values + bgc.doc * siops.a_y_star.values
         + bgc.tchla * siops.a_ph_star.values)
    return Spectrum(a, tables.grid)


def water_backscatter(sal: float, grid: WavelengthGrid = STANDARD_GRID) -> Spectrum:
    """Pure (sea)water backscattering b_bw(lambda, S), m^-1.

    b_bw = 1.38e-4 * (lambda/500)^-4.32 * (1 + 0.3*S/37), lambda in nm.
    """
    if sal < 0:
        raise ValueError("salinity must be nonnegative")
    return Spectrum(_water_backscatter_values(float(sal), grid.wavelengths)[()], grid)


def total_backscatter(bgc: BgcState, siops: SiopSet) -> Spectrum:
    """Total backscattering b_b = b_bw + TSS*b*_bp, m^-1."""
    b_bw = _water_backscatter_values(bgc.sal, siops.grid.wavelengths)
    return Spectrum(b_bw + bgc.tss * siops.b_bp_star.values, siops.grid)


def backscatter_albedo(a: Spectrum, b_b: Spectrum) -> Spectrum:
    """Backscattering albedo u = b_b / (a + b_b), in [0, 1)."""
    if a.grid != b_b.grid:
        raise ValueError("absorption and backscattering must share one grid")
    if np.any(a.values + b_b.values <= 0):
        raise ValueError("a + b_b must be strictly positive at every band")
    if np.any(a.values <= 0) or np.any(b_b.values < 0):
        raise ValueError("albedo requires a > 0 and b_b >= 0")
    return Spectrum(b_b.values / (a.values + b_b.values), a.grid)


def subsurface_rrs(u: Spectrum, constants: RrsConstants = DEFAULT_CONSTANTS) -> Spectrum:
    """Subsurface remote-sensing reflectance r_rs = g0*u + g1*u^2, sr^-1."""
    if np.any(u.values < 0) or np.any(u.values > 1):
        raise ValueError("albedo u must lie in [0, 1]")
    return Spectrum(constants.g0 * u.values + constants.g1 * u.values ** 2, u.grid)


def above_water_rrs(r_rs: Spectrum, constants: RrsConstants = DEFAULT_CONSTANTS) -> Spectrum:
    """Above-water reflectance R_rs = 0.52*r_rs / (1 - 1.7*r_rs), sr^-1.

    The denominator cannot reach zero for r_rs produced by
    :func:`subsurface_rrs` (max 0.252), but user-supplied values are guarded.
    """
    if np.any(r_rs.values < 0):
        raise ValueError("subsurface reflectance must be nonnegative")
    if np.any(constants.k_q * r_rs.values >= 1.0):
        raise ValueError("subsurface reflectance out of range: 1 - 1.7*r_rs must stay positive")
    return Spectrum(constants.k_up * r_rs.values / (1.0 - constants.k_q * r_rs.values),
                    r_rs.grid)


def forward(bgc: BgcState, siops: SiopSet, tables: WaterIopTables,
            constants: RrsConstants = DEFAULT_CONSTANTS) -> Spectrum:
    """Full forward model: biogeochemical state + SIOPs -> above-water R_rs."""
    if tables.grid != siops.grid:
        raise ValueError("SIOPs and water tables must share one grid")
    a = total_absorption(bgc, siops, tables)
    b_b = total_backscatter(bgc, siops)
    return Spectrum(_rrs_from_iops(a.values, b_b.values, constants), tables.grid)


def forward_batch(tss, doc, tchla, temp, sal, a_d_star, a_y_star, a_ph_star,
                  b_bp_star, tables: WaterIopTables,
                  constants: RrsConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    """Vectorised forward model over K samples.

    Scalar inputs have shape (K,); SIOP inputs are (K, 301) or (301,) when one
    SIOP set is shared by all samples. Returns R_rs with shape (K, 301).
    The arithmetic matches :func:`forward` operation for operation, so batched
    and per-sample results are bit-identical.
    """
    tss = np.atleast_1d(np.asarray(tss, dtype=np.float64))
    doc = np.atleast_1d(np.asarray(doc, dtype=np.float64))
    tchla = np.atleast_1d(np.asarray(tchla, dtype=np.float64))
    temp = np.atleast_1d(np.asarray(temp, dtype=np.float64))
    sal = np.atleast_1d(np.asarray(sal, dtype=np.float64))
    if np.any(tss <= 0) or np.any(doc <= 0) or np.any(tchla <= 0):
        raise ValueError("TSS, DOC and TChl-a must be strictly positive")
    if np.any(sal < 0):
        raise ValueError("salinity must be nonnegative")
    a_w = _water_absorption_values(temp, sal, tables)
    a = (a_w + tss[:, None] * np.asarray(a_d_star)
         + doc[:, None] * np.asarray(a_y_star)
         + tchla[:, None] * np.asarray(a_ph_star))
    b_bw = _water_backscatter_values(sal, tables.grid.wavelengths)
    b_b = b_bw + tss[:, None] * np.asarray(b_bp_star)
    return _rrs_from_iops(a, b_b, constants)
