"""
Spectral library: SIOP derivation and descriptive statistics
============================================================

Builds the bundled 247-record fixture library (a known three-component
mixture of water types), derives mass-specific optical properties for each
record, and reproduces the kind of summary table and correlation analysis
used to characterise such libraries.
"""

import numpy as np

from hyperbgc import correlation_matrix, derive_siops, summary_stats
from hyperbgc.fixtures import make_fixture_library

library = make_fixture_library(n=247, seed=7)
print(f"library: {len(library)} records\n")

# Summary statistics: concentrations, physics and the reference-band SIOPs.
stats = summary_stats(library)
print(f"{'variable':18s} {'min':>9s} {'median':>9s} {'max':>9s} "
      f"{'mean':>9s} {'std':>9s}")
for name, row in stats.items():
    print(f"{name:18s} {row['min']:9.4f} {row['median']:9.4f} {row['max']:9.4f} "
          f"{row['mean']:9.4f} {row['std']:9.4f}")

# Pairwise Pearson correlations among temperature, salinity, concentrations
# and the raw IOPs at their reference bands.
mat, names = correlation_matrix(library)
print("\ncorrelation matrix (raw values):")
print("          " + " ".join(f"{n[:7]:>8s}" for n in names))
for i, row_name in enumerate(names):
    cells = " ".join(f"{mat[i, j]:8.2f}" for j in range(len(names)))
    print(f"{row_name[:9]:9s} {cells}")

# The physically meaningful couplings: suspended solids drive particulate
# absorption and backscattering, dissolved carbon drives CDOM absorption.
i, j = names.index("tss"), names.index("a_d_440")
print(f"\nr(TSS, a_d(440))    = {mat[i, j]:.2f}")
i, j = names.index("doc"), names.index("a_y_440")
print(f"r(DOC, a_y(440))    = {mat[i, j]:.2f}")
i, j = names.index("tchla"), names.index("a_ph_440")
print(f"r(TChl-a, a_ph(440)) = {mat[i, j]:.2f}")

# One record's mass-specific spectra, normalised per unit concentration.
siops = derive_siops(library[0])
print(f"\nrecord 0: TSS={library[0].tss:.2f} mg/L, DOC={library[0].doc:.2f} mg/L,"
      f" TChl-a={library[0].tchla:.2f} ug/L")
print(f"  a*_d(440)  = {siops.a_d_star.at(440.0):.4f} m^2/g")
print(f"  a*_y(440)  = {siops.a_y_star.at(440.0):.4f} m^2/g")
print(f"  a*_ph(440) = {siops.a_ph_star.at(440.0):.4f} m^2/mg")
print(f"  b*_bp(550) = {siops.b_bp_star.at(550.0):.5f} m^2/g")

# Multiplying back by the concentrations recovers the measured IOPs exactly.
assert np.allclose(siops.a_d_star.values * library[0].tss,
                   library[0].a_d.values, rtol=1e-12)
print("\nSIOP derivation round-trips the stored IOP spectra exactly")
