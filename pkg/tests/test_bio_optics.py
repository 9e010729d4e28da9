import numpy as np
import pytest

from hyperbgc.bio_optics import (BgcState, RrsConstants, SiopSet, WaterIopTables,
                                 above_water_rrs, backscatter_albedo,
                                 bundled_water_iops, forward, forward_batch,
                                 subsurface_rrs, total_absorption,
                                 total_backscatter, water_absorption,
                                 water_backscatter)
from hyperbgc.grid import STANDARD_GRID, Spectrum

WL = STANDARD_GRID.wavelengths


def flat_siops(a_d=0.0, a_y=0.0, a_ph=0.0, b_bp=0.0):
    return SiopSet(
        a_d_star=Spectrum.constant(a_d), a_y_star=Spectrum.constant(a_y),
        a_ph_star=Spectrum.constant(a_ph), b_bp_star=Spectrum.constant(b_bp))


class TestWaterAbsorption:
    def test_reference_conditions(self, tables):
        a_w = water_absorption(22.0, 0.0, tables)
        assert np.array_equal(a_w.values, tables.a_w_ref.values)

    def test_unit_temperature_perturbation(self):
        tables = WaterIopTables(Spectrum.constant(0.1), Spectrum.constant(0.001),
                                Spectrum.constant(0.0))
        a_w = water_absorption(23.0, 0.0, tables)
        assert np.allclose(a_w.values, 0.101)

    def test_hand_evaluated_correction(self, tables):
        # oracle: direct evaluation of the correction from the table rows
        a_w = water_absorption(25.0, 35.0, tables)
        for wl in (450.0, 550.0, 650.0):
            expected = (tables.a_w_ref.at(wl) + 3.0 * tables.psi_T.at(wl)
                        + 35.0 * tables.psi_S.at(wl))
            assert a_w.at(wl) == pytest.approx(max(expected, 0.0), abs=1e-15)

    def test_clamped_at_zero(self):
        tables = WaterIopTables(Spectrum.constant(0.001), Spectrum.constant(-0.01),
                                Spectrum.constant(0.0))
        a_w = water_absorption(40.0, 0.0, tables)
        assert np.all(a_w.values == 0.0)

    def test_bad_temperature_rejected(self, tables):
        with pytest.raises(ValueError):
            water_absorption(50.0, 0.0, tables)


class TestTotalAbsorption:
    def test_water_only_limit(self, tables):
        bgc = BgcState(tss=1.0, doc=1.0, tchla=1.0, temp=22.0, sal=0.0)
        a = total_absorption(bgc, flat_siops(), tables)
        assert np.array_equal(a.values, tables.a_w_ref.values)

    def test_linearity_in_tss(self):
        # zero water term and zero other SIOPs: doubling TSS doubles a
        tables = WaterIopTables.flat(0.0)
        siops = flat_siops(a_d=0.05)
        a1 = total_absorption(BgcState(2.0, 1.0, 1.0, 22.0, 0.0), siops, tables)
        a2 = total_absorption(BgcState(4.0, 1.0, 1.0, 22.0, 0.0), siops, tables)
        assert np.allclose(a2.values, 2.0 * a1.values)

    def test_hand_summed_terms(self):
        # a(550) = 0.0565 + 5*0.03 + 2*0.3 + 1*0.07 = 0.8765
        tables = WaterIopTables.flat(0.0565)
        siops = flat_siops(a_d=0.03, a_y=0.3, a_ph=0.07)
        bgc = BgcState(tss=5.0, doc=2.0, tchla=1.0, temp=22.0, sal=0.0)
        a = total_absorption(bgc, siops, tables)
        assert a.at(550.0) == pytest.approx(0.8765, abs=1e-12)


class TestWaterBackscatter:
    def test_reference_wavelength_fresh(self):
        assert water_backscatter(0.0).at(500.0) == pytest.approx(1.38e-4, abs=0.0)

    def test_full_salinity_factor(self):
        # 1.38e-4 * (1 + 0.3) at S=37
        assert water_backscatter(37.0).at(500.0) == pytest.approx(1.794e-4, rel=1e-12)

    def test_spectral_slope_point(self):
        expected = 1.38e-4 * (600.0 / 500.0) ** (-4.32) * (1.0 + 0.3 * 35.0 / 37.0)
        got = water_backscatter(35.0).at(600.0)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(8.06e-5, rel=1e-3)


class TestTotalBackscatter:
    def test_water_only(self):
        bgc = BgcState(1.0, 1.0, 1.0, 22.0, 5.0)
        b = total_backscatter(bgc, flat_siops())
        assert np.allclose(b.values, water_backscatter(5.0).values)

    def test_particulate_term(self):
        bgc = BgcState(10.0, 1.0, 1.0, 22.0, 0.0)
        b = total_backscatter(bgc, flat_siops(b_bp=0.008))
        expected = 1.38e-4 * (550.0 / 500.0) ** (-4.32) + 0.08
        assert b.at(550.0) == pytest.approx(expected, rel=1e-12)

    def test_monotone_in_tss(self):
        siops = flat_siops(b_bp=0.008)
        b1 = total_backscatter(BgcState(1.0, 1.0, 1.0, 22.0, 0.0), siops)
        b2 = total_backscatter(BgcState(2.0, 1.0, 1.0, 22.0, 0.0), siops)
        assert np.all(b2.values > b1.values)


class TestReflectanceSteps:
    def test_albedo_symmetric_case(self):
        a = Spectrum.constant(0.3)
        u = backscatter_albedo(a, a)
        assert np.allclose(u.values, 0.5)

    def test_albedo_zero_backscatter(self):
        u = backscatter_albedo(Spectrum.constant(0.3), Spectrum.constant(0.0))
        assert np.all(u.values == 0.0)

    def test_albedo_point(self):
        u = backscatter_albedo(Spectrum.constant(0.9), Spectrum.constant(0.1))
        assert np.allclose(u.values, 0.1)

    def test_subsurface_zero(self):
        assert np.all(subsurface_rrs(Spectrum.constant(0.0)).values == 0.0)

    def test_subsurface_half(self):
        r = subsurface_rrs(Spectrum.constant(0.5))
        assert np.allclose(r.values, 0.0835, atol=1e-12)

    def test_subsurface_boundary(self):
        r = subsurface_rrs(Spectrum.constant(1.0))
        assert np.allclose(r.values, 0.252, atol=1e-12)

    def test_subsurface_range_guard(self):
        with pytest.raises(ValueError):
            subsurface_rrs(Spectrum.constant(1.5))

    def test_above_water_zero(self):
        assert np.all(above_water_rrs(Spectrum.constant(0.0)).values == 0.0)

    def test_above_water_point(self):
        out = above_water_rrs(Spectrum.constant(0.0835))
        assert np.allclose(out.values, 0.52 * 0.0835 / (1.0 - 1.7 * 0.0835))
        assert out.at(550.0) == pytest.approx(0.050603, abs=1e-6)

    def test_above_water_strictly_increasing(self):
        grid_vals = np.linspace(0.0, 0.25, 301)
        out = above_water_rrs(Spectrum(grid_vals))
        assert np.all(np.diff(out.values) > 0)

    def test_above_water_denominator_guard(self):
        with pytest.raises(ValueError):
            above_water_rrs(Spectrum.constant(0.6))


class TestForward:
    def test_pure_water_composes_by_hand(self, tables):
        # oracle: compose the closed-form steps independently at 3 bands
        bgc = BgcState(tss=1.0, doc=1.0, tchla=1.0, temp=22.0, sal=0.0)
        out = forward(bgc, flat_siops(), tables)
        for wl in (450.0, 550.0, 650.0):
            a = tables.a_w_ref.at(wl)
            b_b = 1.38e-4 * (wl / 500.0) ** (-4.32)
            u = b_b / (a + b_b)
            r = 0.082 * u + 0.17 * u * u
            expected = 0.52 * r / (1.0 - 1.7 * r)
            assert out.at(wl) == pytest.approx(expected, rel=1e-12)

    def test_tss_raises_red_reflectance(self, tables):
        siops = flat_siops(a_d=0.03, a_y=0.1, a_ph=0.02, b_bp=0.008)
        low = forward(BgcState(1.0, 1.0, 1.0, 22.0, 35.0), siops, tables)
        high = forward(BgcState(10.0, 1.0, 1.0, 22.0, 35.0), siops, tables)
        assert high.at(650.0) > low.at(650.0)

    def test_output_bounds(self, tables, library247):
        from hyperbgc.library import derive_siops
        for i in range(0, len(library247), 37):
            r = library247[i]
            bgc = BgcState(r.tss, r.doc, r.tchla, r.temp, r.sal)
            out = forward(bgc, derive_siops(r), tables)
            assert np.all(out.values >= 0.0)
            assert np.all(np.isfinite(out.values))
            assert out.values.max() < 0.2

    def test_deterministic(self, tables):
        siops = flat_siops(a_d=0.03, a_y=0.1, a_ph=0.02, b_bp=0.008)
        bgc = BgcState(3.0, 2.0, 1.0, 25.0, 30.0)
        r1 = forward(bgc, siops, tables)
        r2 = forward(bgc, siops, tables)
        assert np.array_equal(r1.values, r2.values)

    def test_monotone_in_iops(self, tables):
        # raising b_b raises R_rs; raising a lowers R_rs, band by band
        siops = flat_siops(a_d=0.03, a_y=0.1, a_ph=0.02, b_bp=0.008)
        base = forward(BgcState(3.0, 2.0, 1.0, 22.0, 35.0), siops, tables)
        more_bb = flat_siops(a_d=0.03, a_y=0.1, a_ph=0.02, b_bp=0.010)
        more_a = flat_siops(a_d=0.04, a_y=0.1, a_ph=0.02, b_bp=0.008)
        up = forward(BgcState(3.0, 2.0, 1.0, 22.0, 35.0), more_bb, tables)
        down = forward(BgcState(3.0, 2.0, 1.0, 22.0, 35.0), more_a, tables)
        assert np.all(up.values > base.values)
        assert np.all(down.values < base.values)

    def test_batch_matches_single_bitwise(self, tables, library247):
        from hyperbgc.library import derive_siops
        rows = [library247[i] for i in (0, 11, 99)]
        siops = [derive_siops(r) for r in rows]
        batch = forward_batch(
            np.array([r.tss for r in rows]), np.array([r.doc for r in rows]),
            np.array([r.tchla for r in rows]), np.array([r.temp for r in rows]),
            np.array([r.sal for r in rows]),
            np.stack([s.a_d_star.values for s in siops]),
            np.stack([s.a_y_star.values for s in siops]),
            np.stack([s.a_ph_star.values for s in siops]),
            np.stack([s.b_bp_star.values for s in siops]), tables)
        for i, (r, s) in enumerate(zip(rows, siops)):
            single = forward(BgcState(r.tss, r.doc, r.tchla, r.temp, r.sal), s, tables)
            assert np.array_equal(batch[i], single.values)


class TestValidation:
    def test_bgc_state_invariants(self):
        with pytest.raises(ValueError):
            BgcState(tss=0.0, doc=1.0, tchla=1.0, temp=22.0, sal=0.0)
        with pytest.raises(ValueError):
            BgcState(tss=1.0, doc=1.0, tchla=1.0, temp=22.0, sal=-1.0)
        with pytest.raises(ValueError):
            BgcState(tss=1.0, doc=1.0, tchla=1.0, temp=45.0, sal=0.0)

    def test_siops_nonnegative(self):
        with pytest.raises(ValueError):
            flat_siops(a_d=-0.1)

    def test_constants_defaults(self):
        c = RrsConstants()
        assert (c.g0, c.g1, c.k_up, c.k_q) == (0.082, 0.17, 0.52, 1.7)

    def test_bundled_tables_shape(self):
        t = bundled_water_iops()
        assert np.all(t.a_w_ref.values >= 0)
        assert t.a_w_ref.at(550.0) == pytest.approx(0.0565, abs=2e-3)
        # red absorption far exceeds blue for pure water
        assert t.a_w_ref.at(700.0) > 50 * t.a_w_ref.at(440.0)
