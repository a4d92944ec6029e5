"""Spectral core: transforms, multipliers, products, norms, snapshots."""

import math

import numpy as np
import pytest

from fracflow import (
    GridSpec,
    SpectralField,
    calderon_power,
    derivative,
    embed,
    extrema,
    field_from_coeffs,
    from_physical,
    harmonic_field,
    hilbert,
    l2_inner,
    l2_norm,
    load_snapshot,
    norms,
    phys_grid,
    pointwise_product,
    random_field,
    restrict_band,
    save_snapshot,
    scale_symbol_check,
    sobolev_norm,
    to_physical,
    wiener_distance,
    wiener_norm,
    zero_field,
)

from oracles import SQRT_2PI, brute_product_halfspectrum, naive_halfspectrum

HALF = math.sqrt(math.pi / 2.0)  # fhat(m) of cos(mx)


def coeffs_close(f, g, tol=1e-12):
    return wiener_distance(f, g, 0.0) <= tol


class TestGridSpec:
    def test_for_band_respects_padding_rule(self):
        for k in (1, 5, 16, 32, 64, 100):
            g = GridSpec.for_band(k)
            assert g.phys_points >= 3 * k + 1

    def test_underresolved_grid_rejected(self):
        with pytest.raises(ValueError):
            GridSpec(8, 24)

    def test_nonpositive_band_rejected(self):
        with pytest.raises(ValueError):
            GridSpec(0, 10)


class TestTransforms:
    def test_cosine_samples_match_numpy(self, grid16):
        f = harmonic_field(grid16, {3: 0.7})
        x = phys_grid(grid16.phys_points)
        assert np.allclose(to_physical(f), 0.7 * np.cos(3 * x), atol=1e-14)

    def test_sine_samples_match_numpy(self, grid16):
        f = harmonic_field(grid16, sin_amps={2: -1.3})
        x = phys_grid(grid16.phys_points)
        assert np.allclose(to_physical(f), -1.3 * np.sin(2 * x), atol=1e-14)

    def test_round_trip(self):
        for seed in range(5):
            f = random_field(seed, 16, decay_exponent=1.0)
            g = from_physical(to_physical(f), f.grid)
            assert np.allclose(f.coeffs, g.coeffs, atol=1e-14)

    def test_coefficients_against_direct_quadrature(self):
        # validates the normalization and the [-pi, pi) phase convention
        f = random_field(7, 8, decay_exponent=0.5)
        samples = to_physical(f, 64)
        oracle = naive_halfspectrum(samples, 8)
        assert np.allclose(oracle, f.coeffs, atol=1e-12)

    def test_mean_rejected_without_flag(self, grid16):
        x = phys_grid(grid16.phys_points)
        with pytest.raises(ValueError):
            from_physical(np.cos(x) + 0.5, grid16)
        f = from_physical(np.cos(x) + 0.5, grid16, allow_mean=True)
        assert abs(f.coeffs[0] - math.sqrt(math.pi / 2.0)) < 1e-12

    def test_field_immutable(self, grid16):
        f = harmonic_field(grid16, {1: 1.0})
        with pytest.raises((ValueError, RuntimeError)):
            f.coeffs[1] = 0.0


class TestMultipliers:
    def test_hilbert_cos_to_sin(self, grid16):
        f = harmonic_field(grid16, {3: 1.0})
        expected = harmonic_field(grid16, sin_amps={3: 1.0})
        assert coeffs_close(hilbert(f), expected)

    def test_hilbert_sin_to_minus_cos(self, grid16):
        f = harmonic_field(grid16, sin_amps={1: 1.0})
        expected = harmonic_field(grid16, {1: -1.0})
        assert coeffs_close(hilbert(f), expected)

    def test_hilbert_zero(self, grid16):
        assert coeffs_close(hilbert(zero_field(grid16)), zero_field(grid16))

    def test_calderon_examples(self, grid16):
        assert coeffs_close(
            calderon_power(harmonic_field(grid16, {2: 1.0}), 1.0),
            harmonic_field(grid16, {2: 2.0}),
        )
        assert coeffs_close(
            calderon_power(harmonic_field(grid16, sin_amps={1: 1.0}), 3.0),
            harmonic_field(grid16, sin_amps={1: 1.0}),
        )
        assert coeffs_close(
            calderon_power(harmonic_field(grid16, {4: 1.0}), 0.5),
            harmonic_field(grid16, {4: 2.0}),
        )

    def test_calderon_zero_power_is_identity(self, grid16):
        f = random_field(3, 16)
        assert calderon_power(f, 0.0) is f

    def test_derivative_examples(self, grid16):
        assert coeffs_close(
            derivative(harmonic_field(grid16, {1: 1.0}), 1),
            harmonic_field(grid16, sin_amps={1: -1.0}),
        )
        assert coeffs_close(
            derivative(harmonic_field(grid16, {1: 1.0}), 2),
            harmonic_field(grid16, {1: -1.0}),
        )
        # third derivative of sin(2x) is -8 cos(2x)
        assert coeffs_close(
            derivative(harmonic_field(grid16, sin_amps={2: 1.0}), 3),
            harmonic_field(grid16, {2: -8.0}),
        )

    def test_hilbert_squared_is_minus_identity(self):
        f = random_field(11, 16)
        assert coeffs_close(hilbert(hilbert(f)), field_from_coeffs(f.grid, -f.coeffs))

    def test_multipliers_commute(self):
        f = random_field(12, 16)
        a = hilbert(calderon_power(f, 1.5))
        b = calderon_power(hilbert(f), 1.5)
        assert np.array_equal(a.coeffs, b.coeffs)

    def test_halflaplacian_factorizations(self):
        # Lambda = H dx, equivalently dx = -H Lambda, on mean-zero fields
        f = random_field(13, 16)
        assert coeffs_close(hilbert(derivative(f, 1)), calderon_power(f, 1.0), 1e-13)
        assert coeffs_close(
            derivative(f, 1),
            field_from_coeffs(f.grid, -hilbert(calderon_power(f, 1.0)).coeffs),
            1e-13,
        )


class TestProducts:
    def test_cos_squared(self, grid16):
        f = harmonic_field(grid16, {1: 1.0})
        p = pointwise_product(f, f)
        # (1 + cos 2x)/2: mean pi/sqrt(2pi), mode 2 amplitude 1/2
        assert p.band == 32
        assert abs(p.coeffs[0] - math.pi / SQRT_2PI) < 1e-13
        assert abs(p.coeffs[2] - 0.5 * HALF) < 1e-13
        mask = np.ones(p.band + 1, bool)
        mask[[0, 2]] = False
        assert np.all(np.abs(p.coeffs[mask]) < 1e-13)

    def test_cos_times_cos2(self, grid16):
        p = pointwise_product(
            harmonic_field(grid16, {1: 1.0}), harmonic_field(grid16, {2: 1.0})
        )
        expected = harmonic_field(GridSpec.for_band(32), {1: 0.5, 3: 0.5})
        assert coeffs_close(p, expected, 1e-13)

    def test_product_with_zero(self, grid16):
        f = random_field(1, 16)
        p = pointwise_product(f, zero_field(grid16))
        assert np.all(p.coeffs == 0)

    def test_product_against_convolution_oracle(self):
        f = random_field(21, 6, decay_exponent=0.7)
        g = random_field(22, 6, decay_exponent=0.7)
        p = pointwise_product(f, g)
        oracle = brute_product_halfspectrum(f.coeffs, g.coeffs)
        assert np.allclose(p.coeffs, oracle, atol=1e-13)

    def test_grid_mismatch_rejected(self):
        with pytest.raises(ValueError):
            pointwise_product(random_field(0, 8), random_field(0, 16))


class TestNorms:
    def test_cos_wiener_norm(self, grid16):
        f = harmonic_field(grid16, {1: 1.0})
        assert abs(wiener_norm(f, 1.0) - SQRT_2PI) < 1e-13

    def test_cos_strip_norm(self, grid16):
        f = harmonic_field(grid16, {1: 1.0})
        assert abs(wiener_norm(f, 1.0, strip=1.0) - math.e * SQRT_2PI) < 1e-12

    def test_single_mode_sobolev(self, grid16):
        f = harmonic_field(grid16, {3: 2.0})
        # ||2 cos 3x||_{Hdot^s} = 2 * 3^s * sqrt(pi)
        for s in (0.0, 0.5, 1.5, 2.0):
            assert abs(sobolev_norm(f, s) - 2.0 * 3.0**s * math.sqrt(math.pi)) < 1e-12

    def test_l2_inner_products(self, grid16):
        c = harmonic_field(grid16, {1: 1.0})
        s = harmonic_field(grid16, sin_amps={1: 1.0})
        assert abs(l2_inner(c, c) - math.pi) < 1e-13
        assert abs(l2_inner(c, s)) < 1e-15

    def test_wiener_chain_monotone(self):
        for seed in range(8):
            f = random_field(seed, 24)
            r = norms(f)
            assert r.a0 <= r.a1 + 1e-15
            assert r.a1 <= r.a2 + 1e-15

    def test_general_exponent_monotonicity(self):
        f = random_field(31, 16)
        values = [wiener_norm(f, a) for a in (0.0, 0.5, 1.0, 1.7, 2.0)]
        assert all(x <= y + 1e-14 for x, y in zip(values, values[1:]))

    def test_linf_scaling_bound(self):
        for seed in range(8):
            f = random_field(seed + 40, 24)
            r = norms(f)
            assert r.linf <= r.a0 / SQRT_2PI * (1 + 1e-10)

    def test_report_accessor(self, grid16):
        r = norms(harmonic_field(grid16, {1: 1.0}), sobolev_orders=(0.0, 2.0))
        assert r.h(2.0) == pytest.approx(math.sqrt(math.pi))
        with pytest.raises(KeyError):
            r.h(1.5)


class TestExtrema:
    def test_max_of_cos(self, grid16):
        max_f, x_max, min_f, x_min, steep = extrema(harmonic_field(grid16, {1: 1.0}))
        assert abs(max_f - 1.0) < 1e-12
        assert abs(x_max) < 1e-9
        assert abs(min_f + 1.0) < 1e-12
        assert abs(abs(x_min) - math.pi) < 1e-9
        assert abs(steep - 1.0) < 1e-12

    def test_shifted_cosine_location(self, grid16):
        # cos(x - 0.7) = cos(0.7) cos x + sin(0.7) sin x
        f = harmonic_field(grid16, {1: math.cos(0.7)}, {1: math.sin(0.7)})
        max_f, x_max, _, _, _ = extrema(f)
        assert abs(max_f - 1.0) < 1e-12
        assert abs(x_max - 0.7) < 1e-9

    def test_refinement_beats_dense_sampling(self):
        for seed in (3, 9, 27):
            f = random_field(seed, 16, decay_exponent=1.5)
            max_f, _, min_f, _, steep = extrema(f)
            dense = to_physical(f, 1 << 15)
            d_dense = to_physical(derivative(f, 1), 1 << 15)
            assert max_f >= dense.max() - 1e-12
            assert min_f <= dense.min() + 1e-12
            assert steep >= np.abs(d_dense).max() - 1e-12
            # and the refined values are genuine function values, not overshoot
            assert max_f <= dense.max() + 1e-4
            assert steep <= np.abs(d_dense).max() + 1e-3

    def test_zero_field(self, grid16):
        max_f, _, min_f, _, steep = extrema(zero_field(grid16))
        assert max_f == 0 and min_f == 0 and steep == 0


class TestBandChanges:
    def test_restrict_then_embed(self):
        f = random_field(5, 16)
        small = restrict_band(f, GridSpec.for_band(8))
        assert np.array_equal(small.coeffs, f.coeffs[:9])
        back = embed(small, f.grid)
        assert np.all(back.coeffs[9:] == 0)

    def test_illegal_directions(self):
        f = random_field(5, 8)
        with pytest.raises(ValueError):
            restrict_band(f, GridSpec.for_band(16))
        with pytest.raises(ValueError):
            embed(f, GridSpec.for_band(4))


class TestScaleSymbolCheck:
    def test_identity_scaling(self):
        assert scale_symbol_check(1, 32)

    def test_exhaustive_small_scalings(self):
        assert scale_symbol_check(2, 64)
        assert scale_symbol_check(3, 32)


class TestSnapshots:
    def test_round_trip_bit_exact(self, tmp_path):
        f = random_field(17, 12, decay_exponent=2.0)
        p = tmp_path / "state.json"
        save_snapshot(f, p, nu=0.37, t=1.0 / 3.0)
        g, nu, t = load_snapshot(p)
        assert np.array_equal(g.coeffs, f.coeffs)
        assert nu == 0.37 and t == 1.0 / 3.0
        assert g.grid == f.grid

    def test_rewrite_is_byte_identical(self, tmp_path):
        f = random_field(23, 8)
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_snapshot(f, p1, nu=0.1, t=0.25)
        save_snapshot(f, p2, nu=0.1, t=0.25)
        assert p1.read_bytes() == p2.read_bytes()

    def test_malformed_file_rejected(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"grid": {"K": 2, "N": 8}, "nu": 0, "t": 0, "modes": [[1, 0.1, 0]]}')
        with pytest.raises(ValueError):
            load_snapshot(p)

    def test_mean_carrying_field_rejected(self, grid16):
        f = pointwise_product(
            harmonic_field(grid16, {1: 1.0}), harmonic_field(grid16, {1: 1.0})
        )
        with pytest.raises(ValueError):
            save_snapshot(f, "/tmp/should_not_exist.json", nu=0.0, t=0.0)
