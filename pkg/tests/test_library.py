import numpy as np
import pytest

from hyperbgc.grid import STANDARD_GRID, Spectrum
from hyperbgc.library import (LibraryRecord, SpectralLibrary, correlation_matrix,
                              derive_bbp_siop, derive_cdom_siop, derive_nap_siop,
                              derive_ph_siop, derive_siops, summary_stats)

WL = STANDARD_GRID.wavelengths


def make_record(**overrides):
    fields = dict(temp=24.0, sal=30.0, tss=5.0, doc=2.0, tchla=1.5,
                  a_y_440=0.5, s_y=0.018, b_bp_550=0.05, s_bbp=1.0,
                  a_d=Spectrum(0.2 * np.exp(-0.011 * (WL - 440.0))),
                  a_ph=Spectrum(0.1 * np.exp(-0.5 * ((WL - 440.0) / 30.0) ** 2)))
    fields.update(overrides)
    return LibraryRecord(**fields)


class TestCdomSiop:
    def test_reference_wavelength(self):
        s = derive_cdom_siop(0.5, 0.018, 2.0)
        assert s.at(440.0) == pytest.approx(0.25, abs=1e-15)

    def test_exponential_decay_point(self):
        s = derive_cdom_siop(0.5, 0.018, 2.0)
        assert s.at(500.0) == pytest.approx(0.25 * np.exp(-1.08), rel=1e-12)
        assert s.at(500.0) == pytest.approx(0.084899, abs=5e-6)

    def test_zero_slope_flat(self):
        s = derive_cdom_siop(0.5, 0.0, 2.0)
        assert np.allclose(s.values, 0.25)

    def test_rejects_nonpositive_doc(self):
        with pytest.raises(ValueError):
            derive_cdom_siop(0.5, 0.018, 0.0)


class TestBbpSiop:
    def test_reference_wavelength(self):
        s = derive_bbp_siop(0.05, 1.0, 5.0)
        assert s.at(550.0) == pytest.approx(0.01, abs=1e-15)

    def test_zero_slope_flat(self):
        s = derive_bbp_siop(0.05, 0.0, 5.0)
        assert np.allclose(s.values, 0.01)

    def test_power_law_point(self):
        s = derive_bbp_siop(0.05, 1.0, 5.0)
        assert s.at(440.0) == pytest.approx(0.01 * (440.0 / 550.0) ** -1.0, rel=1e-12)
        assert s.at(440.0) == pytest.approx(0.0125, abs=1e-6)

    def test_rejects_nonpositive_tss(self):
        with pytest.raises(ValueError):
            derive_bbp_siop(0.05, 1.0, -1.0)


class TestSpectrumNormalisations:
    def test_nap_identity(self):
        a_d = Spectrum.constant(0.3)
        assert np.array_equal(derive_nap_siop(a_d, 1.0).values, a_d.values)

    def test_nap_scalar_division(self):
        s = derive_nap_siop(Spectrum.constant(0.3), 10.0)
        assert np.allclose(s.values, 0.03)

    def test_ph_identity_and_division(self):
        a_ph = Spectrum.constant(0.14)
        assert np.array_equal(derive_ph_siop(a_ph, 1.0).values, a_ph.values)
        assert np.allclose(derive_ph_siop(a_ph, 2.0).values, 0.07)

    def test_library_range_consistent_with_reported_extremes(self, library247):
        # fixture stays within the reported real-library envelope at 440 nm
        stats = summary_stats(library247)
        assert stats["a_d_star_440"]["max"] <= 0.2573 * 1.5
        assert 0.0099 / 1.5 <= stats["a_ph_star_440"]["min"]
        assert stats["a_ph_star_440"]["max"] <= 0.4004 * 1.5

    def test_roundtrip_recovers_iops(self, library247):
        for i in (0, 100, 246):
            r = library247[i]
            siops = derive_siops(r)
            assert np.allclose(siops.a_d_star.values * r.tss, r.a_d.values,
                               rtol=1e-12, atol=0.0)
            assert np.allclose(siops.a_ph_star.values * r.tchla, r.a_ph.values,
                               rtol=1e-12, atol=0.0)
            assert siops.a_y_star.at(440.0) * r.doc == pytest.approx(r.a_y_440,
                                                                     rel=1e-12)
            assert siops.b_bp_star.at(550.0) * r.tss == pytest.approx(r.b_bp_550,
                                                                      rel=1e-12)


class TestSummaryStats:
    def test_single_record(self):
        lib = SpectralLibrary([make_record()])
        stats = summary_stats(lib)
        for entry in stats.values():
            assert entry["min"] == entry["median"] == entry["max"] == entry["mean"]
            assert entry["std"] == 0.0

    def test_population_std_convention(self):
        recs = [make_record(tss=v) for v in (1.0, 2.0, 3.0)]
        stats = summary_stats(SpectralLibrary(recs))["tss"]
        assert stats["median"] == 2.0
        assert stats["mean"] == 2.0
        assert stats["std"] == pytest.approx(np.sqrt(2.0 / 3.0))

    def test_permutation_invariant(self, library_small):
        forward_stats = summary_stats(library_small)
        reversed_stats = summary_stats(SpectralLibrary(library_small.records[::-1]))
        for name in forward_stats:
            for key in forward_stats[name]:
                assert forward_stats[name][key] == pytest.approx(
                    reversed_stats[name][key], rel=1e-12, abs=1e-12)


class TestCorrelationMatrix:
    def test_needs_three_records(self):
        with pytest.raises(ValueError):
            correlation_matrix(SpectralLibrary([make_record(), make_record()]))

    def test_symmetric_unit_diagonal(self, library_small):
        mat, names = correlation_matrix(library_small)
        assert mat.shape == (9, 9)
        assert np.allclose(mat, mat.T, equal_nan=True)
        assert np.allclose(np.diag(mat), 1.0)
        valid = ~np.isnan(mat)
        assert np.all(mat[valid] >= -1.0) and np.all(mat[valid] <= 1.0)

    def test_collinear_pair(self):
        recs = [make_record(tss=v, b_bp_550=0.01 * v) for v in (1.0, 2.0, 4.0)]
        mat, names = correlation_matrix(SpectralLibrary(recs))
        i, j = names.index("tss"), names.index("b_bp_550")
        assert mat[i, j] == pytest.approx(1.0, abs=1e-12)

    def test_independent_columns_decorrelated(self):
        # sampling property of Pearson r for independent noise, n=1000
        gen = np.random.default_rng(42)
        recs = []
        for _ in range(1000):
            recs.append(make_record(tss=float(gen.lognormal(0, 0.4)),
                                    temp=float(gen.uniform(15, 30))))
        mat, names = correlation_matrix(SpectralLibrary(recs))
        assert abs(mat[names.index("temp"), names.index("tss")]) < 0.1

    def test_zero_variance_reported_missing(self):
        recs = [make_record(tss=v) for v in (1.0, 2.0, 3.0)]  # temp constant
        mat, names = correlation_matrix(SpectralLibrary(recs))
        i = names.index("temp")
        assert np.isnan(mat[i, names.index("tss")])

    def test_fixture_library_physical_structure(self, library247):
        # TSS couples to particulate IOPs, DOC to CDOM absorption
        mat, names = correlation_matrix(library247)
        assert mat[names.index("tss"), names.index("a_d_440")] > 0.7
        assert mat[names.index("doc"), names.index("a_y_440")] > 0.6
        assert mat[names.index("tchla"), names.index("a_ph_440")] > 0.6
        assert mat[names.index("sal"), names.index("doc")] < -0.3


class TestRecordValidation:
    def test_rejects_nonpositive_concentration(self):
        with pytest.raises(ValueError):
            make_record(doc=0.0)

    def test_rejects_negative_spectra(self):
        with pytest.raises(ValueError):
            make_record(a_d=Spectrum.constant(-0.1))

    def test_rejects_nonpositive_slope(self):
        with pytest.raises(ValueError):
            make_record(s_y=0.0)

    def test_empty_library_rejected(self):
        with pytest.raises(ValueError):
            SpectralLibrary([])
