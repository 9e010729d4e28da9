"""
Global sensitivity analysis and apparent water colour
=====================================================

Runs the extended FAST variance decomposition on the forward model to map
which wavelengths respond to which constituent, then places a few water
types on the CIE 1931 chromaticity plane.
"""

from hyperbgc import (BgcState, EfastConfig, bgc_forward_closure,
                      bundled_cie_tables, bundled_water_iops, chromaticity,
                      efast_indices, forward)
from hyperbgc.library import median_siops
from hyperbgc.fixtures import make_fixture_library

library = make_fixture_library(n=247, seed=7)
tables = bundled_water_iops()
siops = median_siops(library)

# Sensitivity of R_rs to each constituent over the library's concentration
# ranges, sampled log-uniformly, with optics fixed at the library medians.
ranges = {name: (float(library.scalar(name).min()),
                 float(library.scalar(name).max()))
          for name in ("tss", "doc", "tchla")}
result = efast_indices(bgc_forward_closure(siops, tables, temp=22.0, sal=35.0),
                       ranges, EfastConfig(n_samples=1025, interference=4))

print("total-effect sensitivity, band means:")
print(f"{'parameter':10s} {'400-500nm':>10s} {'500-600nm':>10s} {'600-700nm':>10s}")
for name in ("tss", "doc", "tchla"):
    cells = [result.band_mean(name, lo, hi) for lo, hi in
             ((400, 500), (500, 600), (600, 700))]
    print(f"{name:10s} {cells[0]:10.3f} {cells[1]:10.3f} {cells[2]:10.3f}")

i = result.parameters.index("tchla")
window = (result.wavelengths >= 660) & (result.wavelengths <= 695)
peak_wl = result.wavelengths[window][result.total[i, window].argmax()]
print(f"\nchlorophyll shows a localised red response near {peak_wl:.0f} nm,")
print("suspended solids dominate the red, dissolved carbon the blue\n")

# Apparent colour: simulate three water types and project onto (x, y).
cie = bundled_cie_tables()
cases = [
    ("clear marine", BgcState(tss=0.3, doc=0.4, tchla=0.15, temp=21.0, sal=36.0)),
    ("coastal", BgcState(tss=3.0, doc=1.2, tchla=1.0, temp=23.0, sal=33.0)),
    ("turbid estuary", BgcState(tss=30.0, doc=5.0, tchla=4.0, temp=26.0, sal=10.0)),
]
print("apparent colour under D65 illumination:")
for label, state in cases:
    rrs = forward(state, siops, tables)
    c = chromaticity(rrs, cie)
    print(f"  {label:15s} (x, y) = ({c.x:.4f}, {c.y:.4f})")
print("\nchromaticity marches from blue-green toward yellow-brown as")
print("sediment and dissolved matter increase")
