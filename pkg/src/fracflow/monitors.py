"""Trajectory monitors: decay and energy statements checked along runs.

Each monitor converts one inequality satisfied by solutions of the interface
equation into a post-processing check over a completed trajectory, guarded by
the hypothesis gate of the statement it mirrors.  A monitor whose gate fails
reports ``applicable = False`` and makes no pass/fail claim.  Unnamed
constants in smallness hypotheses are configurable gate proxies, and measured
constants are reported rather than asserted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .evolve import Trajectory, linear_symbol
from .nonlinear import RhsEvaluator, trilinear_capillary, trilinear_gravity
from .spectral import (
    GridSpec,
    SpectralField,
    field_from_coeffs,
    random_field,
    sobolev_norm,
)

__all__ = [
    "MonitorVerdict",
    "TrilinearConstantReport",
    "TurningReport",
    "check_a0_decay",
    "check_a1_monotone",
    "check_energy_H2",
    "check_energy_H32",
    "check_energy_L2",
    "check_max_principle",
    "check_time_derivative",
    "format_monitor_report",
    "measure_trilinear_constants",
    "monitor_failures",
    "time_derivative_field",
    "turning_monitor",
]


@dataclass(frozen=True)
class MonitorVerdict:
    """Outcome of one monitor over one trajectory.

    ``worst_margin`` is the minimum over time of (right side - left side) of
    the monitored inequality, normalized where the monitor's tolerance is
    relative; the check passes when it stays >= -tolerance.  When
    ``applicable`` is false the hypothesis gate failed and no pass/fail claim
    is made.
    """

    monitor: str
    applicable: bool
    worst_margin: float
    first_violation_t: float | None
    tolerance: float
    detail: str = ""

    @property
    def failed(self) -> bool:
        return self.applicable and not (self.worst_margin >= -self.tolerance)


def _verdict(monitor, margins, times, tol, detail=""):
    """Assemble a verdict from per-time margins (empty series passes at 0)."""
    if len(margins) == 0:
        return MonitorVerdict(monitor, True, 0.0, None, tol, detail)
    worst = float(np.min(margins))
    first_t = None
    for t, m in zip(times, margins):
        if m < -tol:
            first_t = float(t)
            break
    return MonitorVerdict(monitor, True, worst, first_t, tol, detail)


def _skip(monitor, tol, detail):
    return MonitorVerdict(monitor, False, 0.0, None, tol, detail)


def _relative_margins(e0: float, lhs: np.ndarray) -> np.ndarray:
    if e0 > 0.0:
        return (e0 - lhs) / e0
    return np.where(lhs <= 0.0, 0.0, -np.inf)


def check_max_principle(traj: Trajectory, tol: float = 1e-6) -> MonitorVerdict:
    """Pointwise bounds max f(t) <= max f0 and min f(t) >= min f0.

    Applicable while the solution stays in the unit A^1 ball (a condition on
    the computed trajectory, not just the data).  The tolerance absorbs
    extremum-search and time-discretization error.
    """
    sup_a1 = max(r.a1 for r in traj.reports)
    if sup_a1 > 1.0:
        return _skip("max_principle", tol, f"sup_t A1 = {sup_a1:.6g} exceeds 1")
    max0 = traj.reports[0].max_f
    min0 = traj.reports[0].min_f
    margins = [min(max0 - r.max_f, r.min_f - min0) for r in traj.reports]
    return _verdict(
        "max_principle", margins, traj.times, tol, f"sup_t A1 = {sup_a1:.6g}"
    )


def check_a1_monotone(traj: Trajectory, tol: float = 1e-8) -> MonitorVerdict:
    """Monotone A^1 decay and the differential inequality behind it.

    Applicable for A^1(0) < 1/2.  Checks per step that A^1 does not increase
    and, at interior times via central differences, that
    d/dt A^1 + (1 - 2 A^1) A^2 <= 0.  Margins are normalized by (1 + A^2) so
    one relative tolerance covers both large and small states.
    """
    a1_0 = traj.reports[0].a1
    if not a1_0 < 0.5:
        return _skip("a1_monotone", tol, f"A1(0) = {a1_0:.6g} is not below 1/2")
    t = traj.times
    a1 = np.array([r.a1 for r in traj.reports])
    a2 = np.array([r.a2 for r in traj.reports])
    margins = []
    times = []
    for j in range(len(t) - 1):
        margins.append((a1[j] - a1[j + 1]) / (1.0 + a2[j]))
        times.append(t[j + 1])
    for j in range(1, len(t) - 1):
        slope = (a1[j + 1] - a1[j - 1]) / (t[j + 1] - t[j - 1])
        margins.append(-(slope + (1.0 - 2.0 * a1[j]) * a2[j]) / (1.0 + a2[j]))
        times.append(t[j])
    order = np.argsort(np.asarray(times), kind="stable")
    margins = np.asarray(margins)[order]
    times = np.asarray(times)[order]
    return _verdict("a1_monotone", margins, times, tol, f"A1(0) = {a1_0:.6g}")


def check_a0_decay(traj: Trajectory, nu: float, tol: float = 1e-6) -> MonitorVerdict:
    """Exponential A^0 decay at the guaranteed rate (1 - 2 A^1(0))(1 + nu).

    Applicable for A^1(0) < 1/2; the check is relative to the decaying
    envelope, and the empirically fitted rate is reported alongside.
    """
    a1_0 = traj.reports[0].a1
    if not a1_0 < 0.5:
        return _skip("a0_decay", tol, f"A1(0) = {a1_0:.6g} is not below 1/2")
    rate = (1.0 - 2.0 * a1_0) * (1.0 + nu)
    a0 = np.array([r.a0 for r in traj.reports])
    if a0[0] == 0.0:
        margins = np.where(a0 <= 0.0, 0.0, -np.inf)
        return _verdict("a0_decay", margins, traj.times, tol, "zero data")
    envelope = a0[0] * np.exp(-rate * traj.times)
    margins = (envelope - a0) / envelope
    detail = f"guaranteed rate {rate:.6g}"
    positive = a0 > 0.0
    if np.count_nonzero(positive) >= 2:
        slope = np.polyfit(traj.times[positive], np.log(a0[positive]), 1)[0]
        detail += f"; fitted rate {-slope:.6g}"
    return _verdict("a0_decay", margins, traj.times, tol, detail)


def check_energy_L2(
    traj: Trajectory, tol: float = 1e-6, h32_threshold: float = 0.1
) -> MonitorVerdict:
    """L^2 energy inequality ||f(t)||^2 + dissipation <= ||f0||^2.

    The dissipation is the stored cumulative integral at Sobolev order 0
    (gravity plus capillary part, the latter vanishing at nu = 0).  The
    inequality carries coefficient one on the integral — the absorbed form —
    so decaying solutions pass with genuinely positive margin.  Gated on the
    solution staying small in H^{3/2} (threshold configurable).
    """
    sup_h32 = max(r.h(1.5) for r in traj.reports)
    if sup_h32 > h32_threshold:
        return _skip(
            "energy_L2", tol, f"sup_t H3/2 = {sup_h32:.6g} exceeds {h32_threshold:g}"
        )
    e0 = traj.reports[0].l2 ** 2
    lhs = np.array([r.l2**2 for r in traj.reports]) + traj.combined_dissipation(0.0)
    margins = _relative_margins(e0, lhs)
    return _verdict(
        "energy_L2", margins, traj.times, tol, f"sup_t H3/2 = {sup_h32:.6g}"
    )


def check_energy_H2(
    traj: Trajectory, nu: float, tol: float = 1e-6, gate_constant: float = 0.05
) -> MonitorVerdict:
    """H^2 energy inequality with combined gravity/capillary dissipation.

    Applicable when ||f0||_H2 <= gate_constant * min(1, nu^{-1/4}), the
    smallness shape of the global H^2 statement with its unnamed constant
    replaced by a conservative configurable proxy.
    """
    h2_0 = traj.reports[0].h(2.0)
    bound = gate_constant * min(1.0, nu**-0.25) if nu > 0.0 else gate_constant
    if h2_0 > bound:
        return _skip(
            "energy_H2", tol, f"H2(0) = {h2_0:.6g} exceeds gate {bound:.6g}"
        )
    e0 = h2_0**2
    lhs = np.array([r.h(2.0) ** 2 for r in traj.reports]) + traj.combined_dissipation(2.0)
    margins = _relative_margins(e0, lhs)
    return _verdict(
        "energy_H2", margins, traj.times, tol, f"gate {h2_0:.6g} <= {bound:.6g}"
    )


def check_energy_H32(
    traj: Trajectory, eps: float, tol: float = 1e-6, gate_constant: float = 1.0
) -> MonitorVerdict:
    """H^{3/2} ∩ H^{3/2+eps} energy inequality with cumulative dissipation.

    Requires the trajectory to carry the extra dissipation order 3/2 + eps
    (configure ``extra_diss_orders`` on the solver); otherwise the monitor is
    not applicable.  The smallness gate follows the logarithmic shape
    ||f0||_{H^{3/2}} < min(1, eps^2 / (C (X log X + 1)^2)) with
    X = ||f0||_{H^{3/2+eps}} and C the configurable proxy constant.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    order = 1.5 + eps
    if order not in traj.gravity_dissipation:
        return _skip(
            "energy_H32", tol, f"dissipation order {order:g} not recorded on this run"
        )
    h32_0 = traj.reports[0].h(1.5)
    x = traj.reports[0].h(order)
    xlogx = x * math.log(x) if x > 0.0 else 0.0
    gate = min(1.0, eps**2 / (gate_constant * (xlogx + 1.0) ** 2))
    if not h32_0 < gate:
        return _skip(
            "energy_H32", tol, f"H3/2(0) = {h32_0:.6g} not below gate {gate:.6g}"
        )
    e0 = h32_0**2 + x**2
    lhs = (
        np.array([r.h(1.5) ** 2 + r.h(order) ** 2 for r in traj.reports])
        + traj.combined_dissipation(1.5)
        + traj.combined_dissipation(order)
    )
    margins = _relative_margins(e0, lhs)
    return _verdict(
        "energy_H32", margins, traj.times, tol, f"eps = {eps:g}; gate {gate:.6g}"
    )


def time_derivative_field(f: SpectralField, nu: float) -> SpectralField:
    """Semi-discrete time derivative: nonlinear terms minus linear dissipation."""
    ev = RhsEvaluator(f.grid, nu)
    n = np.arange(f.band + 1)
    return field_from_coeffs(f.grid, ev(f.coeffs) - linear_symbol(n, nu) * f.coeffs)


def check_time_derivative(traj: Trajectory) -> MonitorVerdict:
    """Finiteness of the time-derivative energy integral over the run.

    The derivative is evaluated at snapshots from the semi-discrete right-hand
    side (no finite differences), and int ||d_t f||_{H^1}^2 ds is integrated
    by trapezoid over the snapshot times.  Only finiteness is asserted; the
    measured constant against the data-dependent bound shape (evaluated at
    eps = 1/2, where the extra norm is H^2) is reported in the detail.
    """
    nu = traj.config.nu
    ev = RhsEvaluator(traj.config.grid, nu)
    n = np.arange(traj.config.grid.band_limit + 1)
    lam = linear_symbol(n, nu)
    times = []
    rates = []
    for t, f in traj.snapshots:
        df = field_from_coeffs(f.grid, ev(f.coeffs) - lam * f.coeffs)
        times.append(t)
        rates.append(sobolev_norm(df, 1.0) ** 2)
    integral = float(np.trapezoid(rates, times)) if len(times) > 1 else 0.0
    finite = bool(np.isfinite(integral))
    e0 = traj.reports[0].h(1.5) ** 2 + traj.reports[0].h(2.0) ** 2
    shape = (
        e0 * (1.0 + e0 * (1.0 + 1.0 / math.sqrt(0.5)))
        + traj.reports[0].h(1.5) ** 3
        + traj.reports[0].h(2.0) ** 3
    )
    measured = integral / shape if shape > 0.0 else 0.0
    detail = f"integral {integral:.6g}; measured constant {measured:.6g} (eps = 1/2)"
    margin = 0.0 if finite else -math.inf
    first_t = None if finite else float(traj.times[-1])
    return MonitorVerdict("time_derivative", True, margin, first_t, 0.0, detail)


@dataclass(frozen=True)
class TrilinearConstantReport:
    """Measured constants of the two trilinear-form estimates.

    ``gravity_constant`` is the largest observed
    |N(g,h,h)| / (||g||_{H^{3/2}} ||h||_{H^{1/2}}^2) over the ensemble, and
    ``capillary_constant`` the analogous ratio for the capillary form against
    ||g||_{H^2} ||h||_{H^{1/2}}^{1/2} ||h||_{H^{3/2}}^{3/2}; the surface part
    of the full form scales these linearly in nu.  Measured, never asserted
    against any closed-form value.
    """

    ensemble_size: int
    band: int
    gravity_constant: float
    capillary_constant: float
    n_gravity: int
    n_capillary: int


def measure_trilinear_constants(
    ensemble_size: int, grid: GridSpec, seed: int = 0
) -> TrilinearConstantReport:
    """Max trilinear-form ratios over a seeded random ensemble."""
    if ensemble_size < 1:
        raise ValueError("ensemble must contain at least one pair")
    worst_g = 0.0
    worst_c = 0.0
    n_g = 0
    n_c = 0
    band = grid.band_limit
    for i in range(ensemble_size):
        g = random_field(seed + 2 * i, band=band, grid=grid)
        h = random_field(seed + 2 * i + 1, band=band, grid=grid)
        den_g = sobolev_norm(g, 1.5) * sobolev_norm(h, 0.5) ** 2
        if den_g > 0.0:
            worst_g = max(worst_g, abs(trilinear_gravity(g, h, h)) / den_g)
            n_g += 1
        den_c = (
            sobolev_norm(g, 2.0)
            * sobolev_norm(h, 0.5) ** 0.5
            * sobolev_norm(h, 1.5) ** 1.5
        )
        if den_c > 0.0:
            worst_c = max(worst_c, abs(trilinear_capillary(g, h, h, 1.0)) / den_c)
            n_c += 1
    return TrilinearConstantReport(
        ensemble_size=ensemble_size,
        band=band,
        gravity_constant=worst_g,
        capillary_constant=worst_c,
        n_gravity=n_g,
        n_capillary=n_c,
    )


@dataclass(frozen=True)
class TurningReport:
    """Observed ||d_x f(t)||_{L^inf} series; purely observational, no verdict."""

    times: np.ndarray
    linf_dx: np.ndarray
    monotone_growth: bool


def turning_monitor(traj: Trajectory) -> TurningReport:
    """Record the slope-supremum series and flag monotone growth."""
    values = np.array([r.linf_dxf for r in traj.reports])
    values.setflags(write=False)
    growing = bool(values.size >= 2 and np.all(np.diff(values) > 0.0))
    return TurningReport(times=traj.times, linf_dx=values, monotone_growth=growing)


def monitor_failures(verdicts) -> tuple[str, ...]:
    """Ids of the applicable monitors that failed (empty tuple = all clear)."""
    return tuple(v.monitor for v in verdicts if v.failed)


def format_monitor_report(verdicts) -> str:
    """One bracketed status line per monitor; SKIP lines carry the gate value."""
    lines = []
    for v in verdicts:
        if not v.applicable:
            lines.append(f"[{v.monitor}] SKIP hypothesis gate not met; {v.detail}")
            continue
        status = "FAIL" if v.failed else "PASS"
        line = f"[{v.monitor}] {status} worst margin {v.worst_margin:.6g}; tol {v.tolerance:g}"
        if v.first_violation_t is not None:
            line += f"; first violation at t = {v.first_violation_t:.6g}"
        if v.detail:
            line += f"; {v.detail}"
        lines.append(line)
    return "\n".join(lines)
