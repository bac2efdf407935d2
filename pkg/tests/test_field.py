import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vsl.field import (
    GridSpec,
    RadialProfile,
    ScalarField,
    SupportOverflowWarning,
    angular_impulse,
    boundary_mass_fraction,
    field_to_csv,
    higher_moment,
    indicator_tolerance,
    jp_norm,
    lp_norm,
    patch_conserved_quantity,
    quadrature,
    read_vsf,
    sample_profile,
    write_vsf,
    zeros,
)
from conftest import disk_field


class TestGridSpec:
    def test_rejects_bad_n(self):
        with pytest.raises(ValueError):
            GridSpec(100, 4.0)
        with pytest.raises(ValueError):
            GridSpec(8, 4.0)

    def test_rejects_bad_L(self):
        with pytest.raises(ValueError):
            GridSpec(64, 0.0)

    def test_cell_centers(self):
        spec = GridSpec(16, 4.0)
        c = spec.centers()
        assert c[0] == -4.0 + 0.25
        assert c[-1] == 4.0 - 0.25
        assert spec.h == 0.5


class TestScalarField:
    def test_shape_checked(self, spec64):
        with pytest.raises(ValueError):
            ScalarField(spec64, np.zeros((3, 3)))

    def test_nonfinite_rejected(self, spec64):
        v = np.zeros((64, 64))
        v[0, 0] = np.nan
        with pytest.raises(ValueError):
            ScalarField(spec64, v)

    def test_denormals_clamped(self, spec64):
        v = np.full((64, 64), 1e-31)
        f = ScalarField(spec64, v)
        assert f.max_abs() == 0.0

    def test_values_read_only(self, spec64):
        f = zeros(spec64)
        with pytest.raises(ValueError):
            f.values[0, 0] = 1.0


class TestQuadrature:
    def test_zero_field(self, spec64):
        assert quadrature(zeros(spec64)) == 0.0

    def test_unit_disk_area(self):
        spec = GridSpec(512, 4.0)
        f = sample_profile(RadialProfile.sharp_patch(radius=1.0), spec)
        assert abs(quadrature(f) - math.pi) <= 4 * spec.h

    def test_gaussian_mass(self):
        spec = GridSpec(256, 6.0)
        f = sample_profile(RadialProfile.gaussian(), spec)
        assert abs(quadrature(f) - math.pi) <= 1e-6 * math.pi

    def test_linearity(self, spec128, rng):
        a = ScalarField(spec128, rng.uniform(0, 1, (128, 128)))
        b = ScalarField(spec128, rng.uniform(0, 1, (128, 128)))
        combo = ScalarField(spec128, 2.0 * a.values + 0.5 * b.values)
        lhs = quadrature(combo)
        rhs = 2.0 * quadrature(a) + 0.5 * quadrature(b)
        assert abs(lhs - rhs) <= 1e-12 * abs(rhs)


class TestNorms:
    def test_disk_l1(self):
        spec = GridSpec(512, 4.0)
        f = sample_profile(RadialProfile.sharp_patch(), spec)
        assert abs(lp_norm(f, 1) - math.pi) <= 4 * spec.h

    def test_disk_l2(self):
        spec = GridSpec(512, 4.0)
        f = sample_profile(RadialProfile.sharp_patch(), spec)
        assert abs(lp_norm(f, 2) - math.sqrt(math.pi)) <= indicator_tolerance(spec, 2 * math.pi)

    def test_gaussian_l2(self):
        spec = GridSpec(256, 6.0)
        f = sample_profile(RadialProfile.gaussian(), spec)
        assert abs(lp_norm(f, 2) - math.sqrt(math.pi / 2)) <= 1e-6

    def test_sup_norm(self, spec64):
        f = ScalarField(spec64, np.full((64, 64), 0.25))
        assert lp_norm(f, math.inf) == 0.25

    def test_p_below_one_rejected(self, spec64):
        with pytest.raises(ValueError):
            lp_norm(zeros(spec64), 0.5)

    def test_l1_equals_quadrature_of_abs(self, spec128, rng):
        f = ScalarField(spec128, rng.normal(size=(128, 128)))
        g = ScalarField(spec128, np.abs(f.values))
        assert lp_norm(f, 1) == quadrature(g)


class TestAngularImpulse:
    def test_unit_disk(self):
        spec = GridSpec(512, 4.0)
        f = sample_profile(RadialProfile.sharp_patch(), spec)
        tol = indicator_tolerance(spec, 2 * math.pi, amplitude=1.0)
        assert abs(angular_impulse(f) - math.pi / 2) <= tol

    def test_disk_radius_two(self):
        spec = GridSpec(512, 4.0)
        f = sample_profile(RadialProfile.sharp_patch(radius=2.0), spec)
        tol = indicator_tolerance(spec, 4 * math.pi, amplitude=4.0)
        assert abs(angular_impulse(f) - 8 * math.pi) <= tol

    def test_gaussian(self):
        spec = GridSpec(256, 6.0)
        f = sample_profile(RadialProfile.gaussian(), spec)
        assert abs(angular_impulse(f) - math.pi) <= 1e-6 * math.pi

    def test_refinement_convergence(self):
        # successive refinement differences shrink by >= 4x for smooth data
        vals = []
        for n in (64, 128, 256):
            f = sample_profile(RadialProfile.gaussian(), GridSpec(n, 6.0))
            vals.append(angular_impulse(f))
        d1 = abs(vals[1] - vals[0])
        d2 = abs(vals[2] - vals[1])
        assert d2 <= d1 / 4 or d2 < 1e-14


class TestJpNorm:
    def test_zero(self, spec64):
        assert jp_norm(zeros(spec64), 2) == 0.0

    def test_disk_p2(self):
        spec = GridSpec(512, 4.0)
        f = sample_profile(RadialProfile.sharp_patch(), spec)
        want = math.sqrt(math.pi) + math.pi / 2
        assert abs(jp_norm(f, 2) - want) <= indicator_tolerance(spec, 2 * math.pi, 1.0)

    def test_signed_annulus_difference(self):
        spec = GridSpec(512, 4.0)
        big = sample_profile(RadialProfile.sharp_patch(radius=2.0), spec)
        small = sample_profile(RadialProfile.sharp_patch(radius=1.0), spec)
        g = ScalarField(spec, big.values - small.values)
        want = 3 * math.pi + math.pi * (2**4 - 1) / 2
        assert abs(jp_norm(g, 1) - want) <= indicator_tolerance(spec, 6 * math.pi, 4.0)

    def test_p_range(self, spec64):
        with pytest.raises(ValueError):
            jp_norm(zeros(spec64), math.inf)

    def test_dominates_parts(self, spec128, rng):
        f = ScalarField(spec128, rng.normal(size=(128, 128)))
        a = ScalarField(spec128, np.abs(f.values))
        for p in (1, 2, 3):
            assert jp_norm(f, p) >= lp_norm(f, p)
            assert jp_norm(f, p) >= angular_impulse(a)

    def test_l1_bounded_by_pi_j2(self, spec128, rng):
        # discrete version of ||g||_1 <= pi ||g||_{J_2}
        for _ in range(50):
            f = ScalarField(spec128, rng.normal(size=(128, 128)))
            assert lp_norm(f, 1) <= math.pi * jp_norm(f, 2) * (1 + 1e-12)

    def test_l1_bounded_by_pi_lp_plus_j(self, spec128, rng):
        for p in (1.0, 2.0, 3.5):
            for _ in range(20):
                f = ScalarField(spec128, rng.normal(size=(128, 128)))
                a = ScalarField(spec128, np.abs(f.values))
                bound = math.pi * lp_norm(f, p) + angular_impulse(a)
                assert lp_norm(f, 1) <= bound * (1 + 1e-12)


class TestHigherMoment:
    def test_gaussian_sixth(self):
        spec = GridSpec(256, 8.0)
        f = sample_profile(RadialProfile.gaussian(), spec)
        assert abs(higher_moment(f, 6) - 6 * math.pi) <= 1e-5

    def test_disk_sixth(self):
        spec = GridSpec(512, 4.0)
        f = sample_profile(RadialProfile.sharp_patch(), spec)
        assert abs(higher_moment(f, 6) - math.pi / 4) <= indicator_tolerance(spec, 2 * math.pi)

    def test_zero_field(self, spec64):
        assert higher_moment(zeros(spec64), 6) == 0.0

    def test_odd_rejected(self, spec64):
        with pytest.raises(ValueError):
            higher_moment(zeros(spec64), 3)


class TestPatchConservedQuantity:
    def test_unit_disk_itself(self):
        spec = GridSpec(256, 4.0)
        f = sample_profile(RadialProfile.sharp_patch(), spec)
        assert patch_conserved_quantity(f) == 0.0

    def test_slightly_larger_disk(self):
        spec = GridSpec(512, 4.0)
        f = sample_profile(RadialProfile.sharp_patch(radius=1.1), spec)
        want = (math.pi / 2) * (1.1**2 - 1) ** 2
        tol = 2 * math.pi * 1.1 * spec.h * (1.1**2 - 1)
        assert abs(patch_conserved_quantity(f) - want) <= tol

    def test_translated_disk(self):
        # disjoint translate: integral over B_1((3,0)) of (|x|^2-1) plus the
        # disk's own deficit integral; parallel-axis arithmetic gives 9 pi
        spec = GridSpec(512, 6.0)
        f = disk_field(spec, center=(3.0, 0.0))
        want = 9 * math.pi
        tol = indicator_tolerance(spec, 4 * math.pi, amplitude=15.0)
        assert abs(patch_conserved_quantity(f) - want) <= tol


class TestSampleProfile:
    def test_gaussian_peak(self):
        # nearest cell center sits h/sqrt(2) from the origin
        spec = GridSpec(128, 6.0)
        f = sample_profile(RadialProfile.gaussian(), spec)
        assert abs(f.max_abs() - 1.0) <= spec.h**2

    def test_sharp_patch_is_indicator(self, spec128):
        f = sample_profile(RadialProfile.sharp_patch(), spec128)
        assert set(np.unique(f.values)) == {0.0, 1.0}
        assert np.array_equal(f.values, disk_field(spec128).values)

    def test_cone(self, spec128):
        f = sample_profile(RadialProfile.cone(), spec128)
        r = np.sqrt(spec128.radius_sq())
        assert np.allclose(f.values, np.maximum(0.0, 1.0 - r))

    def test_support_overflow_warns(self, spec64):
        with pytest.warns(SupportOverflowWarning):
            sample_profile(RadialProfile.gaussian(width=4.0), spec64)

    def test_monotonicity_audit(self):
        assert RadialProfile.gaussian().is_monotone(8.0)
        assert RadialProfile.cone().is_monotone(8.0)
        with pytest.raises(ValueError):
            RadialProfile.piecewise_linear([(0.0, 0.5), (1.0, 1.0)])


class TestBoundaryMass:
    def test_centered_bump_clean(self):
        f = sample_profile(RadialProfile.gaussian(), GridSpec(128, 6.0))
        assert boundary_mass_fraction(f) < 1e-10

    def test_edge_bump_detected(self, spec128):
        X, Y = spec128.meshgrid()
        f = ScalarField(spec128, np.exp(-((X - 3.8) ** 2 + Y**2)))
        assert boundary_mass_fraction(f) > 0.1


class TestVsfFormat:
    def test_roundtrip(self, tmp_path, spec64, rng):
        f = ScalarField(spec64, rng.uniform(0, 1, (64, 64)))
        path = tmp_path / "f.vsf"
        write_vsf(f, path)
        g = read_vsf(path)
        assert g.spec == f.spec
        assert np.array_equal(g.values, f.values)

    def test_header_is_24_bytes(self, tmp_path, spec64):
        path = tmp_path / "z.vsf"
        write_vsf(zeros(spec64), path)
        assert path.stat().st_size == 24 + 64 * 64 * 8
        with open(path, "rb") as fh:
            assert fh.read(4) == b"VSF1"

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.vsf"
        path.write_bytes(b"NOPE" + bytes(20))
        with pytest.raises(ValueError, match="magic"):
            read_vsf(path)

    def test_truncated_rejected(self, tmp_path, spec64):
        path = tmp_path / "t.vsf"
        write_vsf(zeros(spec64), path)
        data = path.read_bytes()
        path.write_bytes(data[:-16])
        with pytest.raises(ValueError):
            read_vsf(path)

    def test_csv_export(self, tmp_path, spec64):
        f = sample_profile(RadialProfile.sharp_patch(), spec64)
        path = tmp_path / "f.csv"
        field_to_csv(f, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "x,y,value"
        assert len(lines) == 1 + 64 * 64


@given(
    a=st.floats(0.1, 5.0),
    b=st.floats(0.1, 5.0),
)
@settings(max_examples=25, deadline=None)
def test_quadrature_linearity_property(a, b):
    spec = GridSpec(32, 2.0)
    rng = np.random.default_rng(7)
    f = ScalarField(spec, rng.uniform(0, 1, (32, 32)))
    g = ScalarField(spec, rng.uniform(0, 1, (32, 32)))
    combo = ScalarField(spec, a * f.values + b * g.values)
    assert abs(quadrature(combo) - (a * quadrature(f) + b * quadrature(g))) <= 1e-11 * (
        1 + abs(a) + abs(b)
    )
