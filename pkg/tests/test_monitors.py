"""Tests for the trajectory monitors and measured-constant probes."""

import math

import numpy as np
import pytest

from fracflow import (
    GridSpec,
    MonitorVerdict,
    SolverConfig,
    check_a0_decay,
    check_a1_monotone,
    check_energy_H2,
    check_energy_H32,
    check_energy_L2,
    check_max_principle,
    check_time_derivative,
    evolve,
    format_monitor_report,
    harmonic_field,
    measure_trilinear_constants,
    monitor_failures,
    sobolev_norm,
    time_derivative_field,
    trilinear_gravity,
    turning_monitor,
    zero_field,
)


def single_mode_run(grid, amp=0.1, nu=0.0, t_end=0.5, **kw):
    f0 = harmonic_field(grid, {1: amp})
    cfg = SolverConfig(nu=nu, dt=1e-3, t_end=t_end, grid=grid, **kw)
    return evolve(f0, cfg)


def small_two_mode_run(grid, nu=0.0, t_end=0.5, **kw):
    f0 = harmonic_field(grid, {1: 0.01, 2: 0.005})
    cfg = SolverConfig(nu=nu, dt=1e-3, t_end=t_end, grid=grid, **kw)
    return evolve(f0, cfg)


def zero_run(grid):
    return evolve(zero_field(grid), SolverConfig(nu=0.0, dt=1e-2, t_end=0.1, grid=grid))


class TestMaxPrinciple:
    def test_single_mode_passes(self, grid32):
        v = check_max_principle(single_mode_run(grid32))
        assert v.applicable
        assert not v.failed
        assert v.worst_margin >= -v.tolerance
        assert v.first_violation_t is None

    def test_zero_trajectory_margin_zero(self, grid32):
        v = check_max_principle(zero_run(grid32))
        assert v.applicable
        assert v.worst_margin == 0.0

    def test_gate_on_large_a1(self, grid32):
        # A^1 of 0.6 cos x is 0.6 sqrt(2 pi) > 1: hypothesis not met
        f0 = harmonic_field(grid32, {1: 0.6})
        traj = evolve(f0, SolverConfig(nu=0.0, dt=1e-3, t_end=0.02, grid=grid32))
        v = check_max_principle(traj)
        assert not v.applicable
        assert not v.failed


class TestA1Monotone:
    def test_multi_mode_small_data(self, grid32):
        a3 = (0.4 / math.sqrt(2.0 * math.pi) - 0.1) / 3.0
        f0 = harmonic_field(grid32, {1: 0.1, 3: a3})
        traj = evolve(f0, SolverConfig(nu=0.0, dt=1e-3, t_end=1.0, grid=grid32))
        assert traj.reports[0].a1 == pytest.approx(0.4, rel=1e-12)
        v = check_a1_monotone(traj)
        assert v.applicable
        assert not v.failed

    def test_single_mode_with_surface_tension(self, grid32):
        v = check_a1_monotone(single_mode_run(grid32, nu=0.5))
        assert v.applicable
        assert not v.failed

    def test_gate_on_half_ball(self, grid32):
        f0 = harmonic_field(grid32, {1: 0.3})  # A1 = 0.3 sqrt(2 pi) > 1/2
        traj = evolve(f0, SolverConfig(nu=0.0, dt=1e-3, t_end=0.02, grid=grid32))
        v = check_a1_monotone(traj)
        assert not v.applicable


class TestA0Decay:
    def test_single_mode_beats_guaranteed_rate(self, grid32):
        traj = single_mode_run(grid32)
        v = check_a0_decay(traj, 0.0)
        assert v.applicable and not v.failed
        assert "fitted rate" in v.detail

    def test_rate_scales_with_surface_tension(self, grid32):
        traj = single_mode_run(grid32, nu=1.0)
        v = check_a0_decay(traj, 1.0)
        assert v.applicable and not v.failed
        # single mode decays like e^{-2t}, well inside the guaranteed envelope
        a0 = [r.a0 for r in traj.reports]
        assert a0[-1] < a0[0] * math.exp(-1.5 * traj.final_time)

    def test_zero_data_vacuous_pass(self, grid32):
        v = check_a0_decay(zero_run(grid32), 0.0)
        assert v.applicable
        assert v.worst_margin == 0.0

    def test_gate(self, grid32):
        f0 = harmonic_field(grid32, {1: 0.3})
        traj = evolve(f0, SolverConfig(nu=0.0, dt=1e-3, t_end=0.02, grid=grid32))
        assert not check_a0_decay(traj, 0.0).applicable


class TestEnergyL2:
    def test_small_data_positive_margin(self, grid32):
        v = check_energy_L2(small_two_mode_run(grid32))
        assert v.applicable
        assert v.worst_margin >= 0.0

    def test_gate_on_h32_size(self, grid32):
        # 0.1 cos x has Hdot^{3/2} norm 0.1 sqrt(pi) > 0.1
        v = check_energy_L2(single_mode_run(grid32))
        assert not v.applicable

    def test_zero_trajectory(self, grid32):
        v = check_energy_L2(zero_run(grid32))
        assert v.applicable
        assert v.worst_margin == 0.0


class TestEnergyH2:
    def test_small_data_both_regimes(self, grid32):
        for nu in (0.0, 1.0):
            v = check_energy_H2(small_two_mode_run(grid32, nu=nu), nu)
            assert v.applicable, nu
            assert v.worst_margin >= 0.0

    def test_gate_tightens_with_nu(self, grid32):
        # same data passes the nu = 0 gate but fails it at large nu
        traj = small_two_mode_run(grid32, nu=16.0, t_end=0.05)
        h2_0 = traj.reports[0].h(2.0)
        assert 0.05 * 16.0**-0.25 < h2_0 <= 0.05
        assert check_energy_H2(traj, 0.0).applicable
        assert not check_energy_H2(traj, 16.0).applicable


class TestEnergyH32:
    def test_eps_half_uses_base_orders(self, grid32):
        v = check_energy_H32(small_two_mode_run(grid32), 0.5)
        assert v.applicable
        assert v.worst_margin >= 0.0

    def test_other_eps_needs_extra_dissipation_order(self, grid32):
        traj = small_two_mode_run(grid32)
        v = check_energy_H32(traj, 0.25)
        assert not v.applicable
        assert "not recorded" in v.detail
        traj2 = small_two_mode_run(grid32, extra_diss_orders=(1.75,))
        v2 = check_energy_H32(traj2, 0.25)
        assert v2.applicable
        assert v2.worst_margin >= 0.0

    def test_rejects_nonpositive_eps(self, grid32):
        traj = zero_run(grid32)
        with pytest.raises(ValueError):
            check_energy_H32(traj, 0.0)


class TestTimeDerivative:
    def test_single_mode_closed_form(self, grid32):
        for nu in (0.0, 0.5):
            f = harmonic_field(grid32, {1: 0.1})
            df = time_derivative_field(f, nu)
            assert np.abs(df.coeffs + (1.0 + nu) * f.coeffs).max() < 1e-15

    def test_integral_finite_and_reported(self, grid32):
        v = check_time_derivative(single_mode_run(grid32))
        assert v.applicable and not v.failed
        assert "measured constant" in v.detail

    def test_zero_trajectory(self, grid32):
        v = check_time_derivative(zero_run(grid32))
        assert not v.failed
        assert v.worst_margin == 0.0


class TestTrilinearConstants:
    def test_single_mode_reference_ratio(self, grid32):
        # |N(cos 2x, cos x, cos x)| = pi against Hdot^{3/2} x (Hdot^{1/2})^2
        g = harmonic_field(grid32, {2: 1.0})
        h = harmonic_field(grid32, {1: 1.0})
        ratio = abs(trilinear_gravity(g, h, h)) / (
            sobolev_norm(g, 1.5) * sobolev_norm(h, 0.5) ** 2
        )
        assert ratio == pytest.approx(1.0 / (2.0**1.5 * math.sqrt(math.pi)), rel=1e-12)

    def test_ensemble_finite_and_counted(self):
        rep = measure_trilinear_constants(100, GridSpec.for_band(32), seed=0)
        assert rep.n_gravity == 100
        assert rep.n_capillary == 100
        assert 0.0 < rep.gravity_constant < 10.0
        assert 0.0 < rep.capillary_constant < 10.0

    def test_stable_under_band_doubling(self):
        r32 = measure_trilinear_constants(100, GridSpec.for_band(32), seed=0)
        r64 = measure_trilinear_constants(100, GridSpec.for_band(64), seed=0)
        assert abs(r64.gravity_constant - r32.gravity_constant) <= 0.2 * r32.gravity_constant
        assert abs(r64.capillary_constant - r32.capillary_constant) <= 0.2 * r32.capillary_constant

    def test_requires_samples(self):
        with pytest.raises(ValueError):
            measure_trilinear_constants(0, GridSpec.for_band(16))


class TestTurningMonitor:
    def test_decaying_run_not_flagged(self, grid32):
        traj = single_mode_run(grid32)
        rep = turning_monitor(traj)
        assert rep.linf_dx.shape == traj.times.shape
        assert not rep.monotone_growth
        # single mode: |f'|_inf = 0.1 e^{-t}
        assert rep.linf_dx[0] == pytest.approx(0.1, abs=1e-9)
        assert rep.linf_dx[-1] == pytest.approx(0.1 * math.exp(-traj.final_time), rel=1e-6)

    def test_zero_run_flat(self, grid32):
        rep = turning_monitor(zero_run(grid32))
        assert np.all(rep.linf_dx == 0.0)
        assert not rep.monotone_growth


class TestReportPlumbing:
    def test_gate_skips_record_no_claim(self, grid32):
        f0 = harmonic_field(grid32, {1: 0.6})
        traj = evolve(f0, SolverConfig(nu=0.0, dt=1e-3, t_end=0.02, grid=grid32))
        verdicts = [check_max_principle(traj), check_a1_monotone(traj)]
        assert all(not v.applicable and not v.failed for v in verdicts)
        text = format_monitor_report(verdicts)
        assert text.count("SKIP") == 2
        assert "PASS" not in text and "FAIL" not in text

    def test_failure_detection(self):
        bad = MonitorVerdict("synthetic", True, -1.0, 0.5, 1e-6)
        good = MonitorVerdict("fine", True, 0.3, None, 1e-6)
        skipped = MonitorVerdict("gated", False, -99.0, None, 1e-6)
        assert monitor_failures([bad, good, skipped]) == ("synthetic",)
        text = format_monitor_report([bad, good, skipped])
        assert "[synthetic] FAIL" in text
        assert "first violation at t = 0.5" in text
        assert "[fine] PASS" in text
        assert "[gated] SKIP" in text

    def test_deterministic_given_config(self, grid32):
        t1 = small_two_mode_run(grid32)
        t2 = small_two_mode_run(grid32)
        v1 = check_energy_L2(t1)
        v2 = check_energy_L2(t2)
        assert v1 == v2
