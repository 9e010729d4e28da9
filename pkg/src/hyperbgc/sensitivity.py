"""Extended Fourier Amplitude Sensitivity Test (EFAST) for the forward model.

Each input variable in turn drives a periodic search curve through the input
space at a high frequency while the remaining variables oscillate at low
complementary frequencies. Fourier analysis of the model output along the
curve attributes output variance to frequencies: power at the driver
frequency and its harmonics gives the first-order index of the driven
variable, and one minus the low-frequency (complementary) share gives its
total-effect index, interactions included.

The analysis runs independently at every wavelength of the spectral output,
with the non-varying inputs (SIOP spectra, temperature, salinity) held fixed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bio_optics import RrsConstants, SiopSet, WaterIopTables, forward_batch
from .grid import STANDARD_GRID

__all__ = [
    "EfastConfig",
    "SensitivityResult",
    "efast_indices",
    "bgc_forward_closure",
]


@dataclass(frozen=True)
class EfastConfig:
    """n_samples per search curve (odd), interference factor, optional phase seed."""

    n_samples: int = 1025
    interference: int = 4
    seed: int | None = None

    def __post_init__(self):
        if self.n_samples < 65 or self.n_samples % 2 == 0:
            raise ValueError("n_samples must be odd and at least 65")
        if self.interference < 1:
            raise ValueError("interference factor must be >= 1")


@dataclass(eq=False)
class SensitivityResult:
    """First-order and total indices per parameter and wavelength."""

    parameters: tuple
    wavelengths: np.ndarray
    first_order: np.ndarray   # (n_params, n_bands)
    total: np.ndarray         # (n_params, n_bands)

    def band_mean(self, parameter: str, lo_nm: float, hi_nm: float,
                  which: str = "total") -> float:
        """Mean index of one parameter over a wavelength window (inclusive)."""
        i = self.parameters.index(parameter)
        sel = (self.wavelengths >= lo_nm) & (self.wavelengths <= hi_nm)
        table = self.total if which == "total" else self.first_order
        return float(table[i, sel].mean())


def _frequencies(n_samples: int, interference: int, n_params: int):
    """Driver frequency and complementary frequencies, standard construction."""
    omega_max = (n_samples - 1) // (2 * interference)
    m = max(omega_max // (2 * interference), 1)
    if m >= n_params - 1:
        complementary = np.floor(np.linspace(1, m, n_params - 1)).astype(int)
    else:
        complementary = (np.arange(n_params - 1) % m) + 1
    return omega_max, complementary


def efast_indices(model, ranges: dict, config: EfastConfig | None = None) -> SensitivityResult:
    """EFAST first-order and total sensitivity indices.

    Parameters
    ----------
    model : callable
        Maps a dict of 1-D parameter arrays (one entry per key of `ranges`)
        to model output of shape (n, n_bands).
    ranges : dict
        Ordered {name: (low, high)} bounds, sampled log-uniformly. A
        zero-width range marks the parameter inactive (indices are zero).
    config : EfastConfig
        Sample count per curve and interference factor. With no seed all
        phases are zero and the estimate is deterministic.
    """
    config = config or EfastConfig()
    names = tuple(ranges)
    n_params = len(names)
    if n_params < 2:
        raise ValueError("EFAST needs at least two parameters")
    bounds = {}
    for name, (lo, hi) in ranges.items():
        if lo <= 0 or hi <= 0 or hi < lo:
            raise ValueError(f"range for {name} must be positive and ordered")
        bounds[name] = (np.log10(lo), np.log10(hi))
    active = [name for name in names if bounds[name][0] < bounds[name][1]]
    if not active:
        raise ValueError("all parameter ranges are degenerate")

    n = config.n_samples
    m_fac = config.interference
    omega_max, comp_freqs = _frequencies(n, m_fac, n_params)
    if m_fac * omega_max > (n - 1) // 2:
        raise ValueError("sample count too small for the interference factor")
    s = (2.0 * np.pi / n) * np.arange(n)
    rng = np.random.default_rng(config.seed) if config.seed is not None else None

    first = None
    total = None
    for i, driven in enumerate(names):
        if driven not in active:
            continue
        freqs = np.empty(n_params, dtype=int)
        freqs[i] = omega_max
        others = [j for j in range(n_params) if j != i]
        for slot, j in enumerate(others):
            freqs[j] = comp_freqs[slot]
        inputs = {}
        for j, name in enumerate(names):
            phase = rng.uniform(0.0, 2.0 * np.pi) if rng is not None else 0.0
            x = 0.5 + np.arcsin(np.sin(freqs[j] * s + phase)) / np.pi
            lo, hi = bounds[name]
            inputs[name] = 10.0 ** (lo + x * (hi - lo))
        output = np.asarray(model(inputs), dtype=np.float64)
        if output.shape[0] != n:
            raise ValueError("model must return one output row per sample")
        if first is None:
            n_bands = output.shape[1]
            first = np.zeros((n_params, n_bands))
            total = np.zeros((n_params, n_bands))

        spectrum = np.abs(np.fft.rfft(output, axis=0)[1:(n - 1) // 2 + 1]) ** 2 / n ** 2
        variance = 2.0 * spectrum.sum(axis=0)
        harmonics = omega_max * np.arange(1, m_fac + 1) - 1
        var_driver = 2.0 * spectrum[harmonics].sum(axis=0)
        var_complement = 2.0 * spectrum[:omega_max // 2].sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            s1 = np.where(variance > 0, var_driver / variance, 0.0)
            st = np.where(variance > 0, 1.0 - var_complement / variance, 0.0)
        first[i] = s1
        total[i] = st

    wavelengths = STANDARD_GRID.wavelengths if first.shape[1] == 301 else np.arange(first.shape[1])
    return SensitivityResult(parameters=names, wavelengths=np.asarray(wavelengths, float),
                             first_order=first, total=total)


def bgc_forward_closure(siops: SiopSet, tables: WaterIopTables, temp: float = 22.0,
                        sal: float = 35.0, constants: RrsConstants | None = None):
    """Forward-model closure over (tss, doc, tchla) with SIOPs, T, S fixed.

    Suitable as the `model` argument of :func:`efast_indices`.
    """
    from .bio_optics import DEFAULT_CONSTANTS
    constants = constants or DEFAULT_CONSTANTS

    def model(inputs: dict) -> np.ndarray:
        tss = np.asarray(inputs["tss"], dtype=np.float64)
        k = tss.shape[0]
        return forward_batch(
            tss, inputs["doc"], inputs["tchla"],
            np.full(k, temp), np.full(k, sal),
            siops.a_d_star.values, siops.a_y_star.values,
            siops.a_ph_star.values, siops.b_bp_star.values,
            tables, constants)

    return model
