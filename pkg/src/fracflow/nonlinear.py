"""Quadratic commutator nonlinearity in three equivalent routes, plus the
integer symbol calculus and the trilinear cancellation forms.

The evolution equation's nonlinear right-hand side is, in expanded form,

    N(f) = nu * [Lambda(f Lambda^3 f) - dx(f dx^3 f)] + Lambda(f Lambda f) + dx(f dx f),

with Lambda = |D| the half-Laplacian.  On the Fourier side this collapses to a
convolution against the integer symbols

    sigma1(k, n) = |k||k-n| - k(k-n)        (gravity part),
    sigma3(k, n) = |k||k-n|^3 - k(k-n)^3    (capillary part),

so Nhat(k) = (2pi)^{-1/2} sum_n fhat(n) fhat(k-n) [sigma1 + nu * sigma3].
A third, independent route evaluates the gravity part through its
principal-value integral representation.  Route agreement is a tested
property, not an assumption; the (2pi)^{-1/2} convolution constant is fixed by
demanding equality with the physical-space definition.

Index convention throughout: output mode k, convolution index n, partner k-n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import next_fast_len

from .spectral import (
    GridSpec,
    SpectralField,
    derivative,
    field_from_coeffs,
    from_physical,
    hilbert,
    calderon_power,
    pointwise_product,
    restrict_band,
    to_physical,
    wiener_distance,
)

__all__ = [
    "SymbolPair",
    "symbol_pair",
    "sigma1_values",
    "sigma3_values",
    "RhsEvaluator",
    "rhs_pseudospectral",
    "rhs_convolution",
    "rhs_pv_quadrature",
    "trilinear_gravity",
    "trilinear_gravity_modesum",
    "trilinear_capillary",
    "trilinear_capillary_modesum",
    "BoundCheck",
    "SymbolBoundsReport",
    "verify_symbol_bounds",
    "format_symbol_report",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# integer symbols


def sigma1_values(k, n):
    """Gravity symbol |k||k-n| - k(k-n), exact in int64 (vectorized)."""
    k = np.asarray(k, dtype=np.int64)
    m = k - np.asarray(n, dtype=np.int64)
    return np.abs(k) * np.abs(m) - k * m


def sigma3_values(k, n):
    """Capillary symbol |k||k-n|^3 - k(k-n)^3, exact in int64 (vectorized)."""
    k = np.asarray(k, dtype=np.int64)
    m = k - np.asarray(n, dtype=np.int64)
    return np.abs(k) * np.abs(m) ** 3 - k * m**3


@dataclass(frozen=True)
class SymbolPair:
    """Both quadratic symbols at one (output mode, convolution index) pair.

    sigma1 equals 2|k||k-n| exactly when k and k-n have opposite signs and
    vanishes otherwise; a nonzero value forces |k| < |n|.
    """

    k: int
    n: int
    sigma1: int
    sigma3: int


def symbol_pair(k: int, n: int) -> SymbolPair:
    """Exact SymbolPair at integer (k, n); uses Python ints, so no overflow."""
    m = k - n
    return SymbolPair(k, n, abs(k) * abs(m) - k * m, abs(k) * abs(m) ** 3 - k * m**3)


# ---------------------------------------------------------------------------
# route 1: pseudo-spectral via exact padded products


class RhsEvaluator:
    """Reusable pseudo-spectral evaluator of the nonlinear right-hand side.

    Precomputes multiplier and phase tables for one (grid, nu) pair so hot
    loops (time steppers) avoid per-call setup.  Calling it with a half
    spectrum (length K+1) returns the half spectrum of N(f), band-limited to
    K and mean-zero.  All products are computed on the band-2K grid, which is
    aliasing-free for a quadratic nonlinearity.
    """

    def __init__(self, grid: GridSpec, nu: float):
        if nu < 0:
            raise ValueError("nu must be nonnegative")
        self.grid = grid
        self.nu = float(nu)
        k = grid.band_limit
        self.k = k
        wide = GridSpec.for_band(2 * k)
        self.n_phys = wide.phys_points

        n = np.arange(k + 1, dtype=np.float64)
        phase = np.ones(k + 1)
        phase[1::2] = -1.0
        self._fwd_scale = phase * (self.n_phys / _SQRT_2PI)

        # multiplier rows applied before the inverse transform: f, Lambda f,
        # dx f and (nu > 0) Lambda^3 f, dx^3 f
        rows = [np.ones(k + 1), n, 1j * n]
        if self.nu > 0:
            rows += [n**3, (1j * n) ** 3]
        self._pre = np.asarray(rows)

        w = 2 * k
        nw = np.arange(self.n_phys // 2 + 1, dtype=np.float64)
        phase_w = np.ones(self.n_phys // 2 + 1)
        phase_w[1::2] = -1.0
        self._lam_w = nw
        self._i_nw = 1j * nw
        self._back_scale = phase_w * (_SQRT_2PI / self.n_phys)
        self._wide_band = w

    def __call__(self, coeffs: np.ndarray) -> np.ndarray:
        k = self.k
        spec = np.zeros((self._pre.shape[0], self.n_phys // 2 + 1), dtype=np.complex128)
        spec[:, : k + 1] = self._pre * (coeffs * self._fwd_scale)[None, :]
        phys = np.fft.irfft(spec, n=self.n_phys, axis=1)

        if self.nu > 0:
            prods = np.stack(
                [
                    phys[0] * phys[1],  # f * Lambda f
                    phys[0] * phys[2],  # f * dx f
                    phys[0] * phys[3],  # f * Lambda^3 f
                    phys[0] * phys[4],  # f * dx^3 f
                ]
            )
        else:
            prods = np.stack([phys[0] * phys[1], phys[0] * phys[2]])
        pspec = np.fft.rfft(prods, axis=1) * self._back_scale[None, :]

        out_wide = self._lam_w * pspec[0] + self._i_nw * pspec[1]
        if self.nu > 0:
            out_wide = out_wide + self.nu * (self._lam_w * pspec[2] - self._i_nw * pspec[3])
        out = out_wide[: k + 1].copy()
        out[0] = 0.0
        return out


def rhs_pseudospectral(f: SpectralField, nu: float) -> SpectralField:
    """Nonlinear right-hand side via exact zero-padded physical products.

    Evaluates nu*[Lambda(f Lambda^3 f) - dx(f dx^3 f)] + Lambda(f Lambda f)
    + dx(f dx f), truncated back to the evolution band and projected to
    mean zero.  Linear dissipation terms are excluded.
    """
    return field_from_coeffs(f.grid, RhsEvaluator(f.grid, nu)(f.coeffs))


# ---------------------------------------------------------------------------
# route 2: direct symbol convolution


def _full_spectrum(f: SpectralField) -> np.ndarray:
    # index order n = -K..K
    neg = np.conj(f.coeffs[1:][::-1])
    return np.concatenate([neg, f.coeffs])


def rhs_convolution(f: SpectralField, nu: float) -> SpectralField:
    """Nonlinear right-hand side as the direct O(K^2) symbol convolution.

    Nhat(k) = (2pi)^{-1/2} sum_n fhat(n) fhat(k-n) [sigma1(k,n) + nu*sigma3(k,n)].
    Agreement with rhs_pseudospectral is a tested property of the package.
    """
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    kb = f.band
    full = _full_spectrum(f)
    n_idx = np.arange(-kb, kb + 1, dtype=np.int64)
    k_idx = np.arange(1, kb + 1, dtype=np.int64)[:, None]
    partner = k_idx - n_idx[None, :]
    valid = np.abs(partner) <= kb
    part_amp = np.where(valid, full[np.clip(partner + kb, 0, 2 * kb)], 0.0)
    sig = sigma1_values(k_idx, n_idx[None, :]).astype(np.float64)
    if nu > 0:
        sig = sig + nu * sigma3_values(k_idx, n_idx[None, :]).astype(np.float64)
    out = np.zeros(kb + 1, dtype=np.complex128)
    out[1:] = (full[None, :] * part_amp * sig).sum(axis=1) / _SQRT_2PI
    return field_from_coeffs(f.grid, out)


# ---------------------------------------------------------------------------
# route 3: principal-value quadrature (gravity part, nu = 0)


def _staggered_samples(f: SpectralField, m: int) -> np.ndarray:
    # values at s_j = -pi + (j + 1/2) * 2pi/m
    if m < 2 * f.band + 1:
        raise ValueError("staggered sampling grid too coarse for the band")
    h = 2.0 * math.pi / m
    k = f.band + 1
    n = np.arange(k)
    phase = np.ones(k)
    phase[1::2] = -1.0
    spec = np.zeros(m // 2 + 1, dtype=np.complex128)
    spec[:k] = f.coeffs * phase * np.exp(1j * n * (h / 2.0)) * (m / _SQRT_2PI)
    return np.fft.irfft(spec, n=m)


def _pv_eval(f: SpectralField, m: int) -> SpectralField:
    h = 2.0 * math.pi / m
    u = to_physical(f, m)
    du = to_physical(derivative(f, 1), m)
    lam_u = calderon_power(f, 1)
    g1 = _staggered_samples(lam_u, m)
    g2 = _staggered_samples(pointwise_product(f, lam_u), m)

    y = -math.pi + (np.arange(m) + 0.5) * h
    kern = 1.0 / np.sin(y / 2.0) ** 2

    # A_i = sum_j kern_j * g(s_{(i - j - 1 + m/2) mod m}) is a circular
    # convolution evaluated at shifted index i + m/2 - 1
    shift = m // 2 - 1
    kern_hat = np.fft.rfft(kern)
    conv1 = np.fft.irfft(kern_hat * np.fft.rfft(g1), n=m)
    conv2 = np.fft.irfft(kern_hat * np.fft.rfft(g2), n=m)
    a = np.roll(conv1, -shift)
    b = np.roll(conv2, -shift)

    vals = (h / (4.0 * math.pi)) * (u * a - b) + du**2
    out = from_physical(vals, f.grid, allow_mean=True)
    c = out.coeffs.copy()
    c[0] = 0.0
    return SpectralField(f.grid, c)


def rhs_pv_quadrature(f: SpectralField, quad_points: int) -> tuple[SpectralField, float]:
    """Gravity right-hand side through the principal-value representation.

    Evaluates (4pi)^{-1} p.v. int [u(x) - u(x-y)] / sin^2(y/2) * Lambda u(x-y) dy
    + (dx u(x))^2 with a symmetric midpoint rule in y (nodes never hit y = 0;
    their symmetry about 0 realizes the principal value), then projects onto
    the band.  Returns (field, quadrature error estimate), the estimate being
    a Richardson comparison against half resolution.

    Parameters
    ----------
    f : SpectralField
        Mean-zero field (the nu = 0 equation's state).
    quad_points : int
        Even number of y-nodes, at least 512 (and at least 8K + 8 so the
        half-resolution pass still resolves the band-2K integrand).
    """
    m = int(quad_points)
    if m % 2 != 0 or m < 512:
        raise ValueError("quad_points must be even and >= 512")
    if m < 8 * f.band + 8:
        raise ValueError("quad_points too small for this band limit")
    fine = _pv_eval(f, m)
    coarse = _pv_eval(f, m // 2)
    return fine, wiener_distance(fine, coarse, 0.0)


# ---------------------------------------------------------------------------
# trilinear forms


def _exact_triple_quadrature(fields: list[SpectralField]) -> float:
    deg = sum(g.band for g in fields)
    n_q = int(next_fast_len(max(deg + 1, 2 * max(g.band for g in fields) + 2)))
    vals = np.ones(n_q)
    for g in fields:
        vals = vals * to_physical(g, n_q)
    return float(vals.sum() * (2.0 * math.pi / n_q))


def trilinear_gravity(g1: SpectralField, g2: SpectralField, g3: SpectralField) -> float:
    """Gravity trilinear form integral g1 * (H-1)dx g2 * (H+1)dx g3 dx.

    Physical-space evaluation with exact trigonometric quadrature (the grid
    resolves the full degree of the triple product).
    """
    u2 = _combine_transport(g2, -1.0)
    u3 = _combine_transport(g3, +1.0)
    return _exact_triple_quadrature([g1, u2, u3])


def _combine_transport(g: SpectralField, sign: float) -> SpectralField:
    dg = derivative(g, 1)
    h = hilbert(dg)
    return field_from_coeffs(g.grid, h.coeffs + sign * dg.coeffs, allow_mean=True)


def trilinear_gravity_modesum(g: SpectralField, h: SpectralField) -> float:
    """Reduced Fourier sum for the symmetric gravity form N(g, h, h).

    N(g,h,h) = 4 (2pi)^{-1/2} sum_{0<k<n} k(n-k) Re[conj(ghat_n) hhat_k hhat_{n-k}];
    equality with trilinear_gravity is a tested property.
    """
    return _symmetric_modesum(g, h, power=1)


def trilinear_capillary(
    g1: SpectralField, g2: SpectralField, g3: SpectralField, nu: float
) -> float:
    """Capillary trilinear form nu * integral g1 (L^3 g2 * L g3 + dx^3 g2 * dx g3) dx."""
    t1 = _exact_triple_quadrature([g1, calderon_power(g2, 3.0), calderon_power(g3, 1.0)])
    t2 = _exact_triple_quadrature([g1, derivative(g2, 3), derivative(g3, 1)])
    return float(nu) * (t1 + t2)


def trilinear_capillary_modesum(g: SpectralField, h: SpectralField, nu: float) -> float:
    """Reduced Fourier sum for the symmetric capillary form M(g, h, h).

    M(g,h,h) = 4 nu (2pi)^{-1/2} sum_{0<k<n} k^3 (n-k) Re[conj(ghat_n) hhat_k hhat_{n-k}].
    """
    return float(nu) * _symmetric_modesum(g, h, power=3)


def _symmetric_modesum(g: SpectralField, h: SpectralField, power: int) -> float:
    n_max = min(g.band, 2 * h.band)
    total = 0.0
    hc = h.coeffs
    gc = g.coeffs
    for n in range(2, n_max + 1):
        k = np.arange(max(1, n - h.band), min(n - 1, h.band) + 1)
        if k.size == 0:
            continue
        w = k.astype(np.float64) ** power * (n - k)
        total += float(np.dot(w, np.real(np.conj(gc[n]) * hc[k] * hc[n - k])))
    return 4.0 / _SQRT_2PI * total


# ---------------------------------------------------------------------------
# exhaustive symbol bound verification


@dataclass(frozen=True)
class BoundCheck:
    check_id: str
    description: str
    passed: bool
    worst_ratio: float
    counterexample: tuple[int, int] | None
    n_checked: int


@dataclass(frozen=True)
class SymbolBoundsReport:
    kmax: int
    direct_product_checked: bool
    checks: tuple[BoundCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def verify_symbol_bounds(kmax: int, chunk: int = 128) -> SymbolBoundsReport:
    """Exhaustively verify the symbol inequalities for all 0 < |k|, |n| <= kmax.

    Checked statements:

    * a: sigma1(k,n) <= 2|n||k-n|
    * b-sign: sigma1 != 0 iff k(k-n) < 0, with sigma1 = 2|k||k-n| there
    * b-support: sigma1 != 0 implies |k| < |n|
    * c: |k sigma1| <= 2 n^2 |k-n|
    * d: |k sigma3| <= 2 n^2 |k-n|^3

    All arithmetic is int64.  For kmax > 2048, |k sigma3| and its bound can
    exceed int64, so check d is established structurally: sigma3 equals
    2|k||k-n|^3 exactly on the sign-condition support, where the inequality
    divides down to k^2 <= n^2 (equivalent to b-support).  The direct product
    comparison is additionally run whenever kmax <= 2048.

    Returns a report with per-inequality pass flags, the worst ratio attained
    and the first counterexample (none expected).
    """
    if not 1 <= kmax <= 4096:
        raise ValueError("kmax must be in [1, 4096]")
    direct = kmax <= 2048
    r = np.concatenate([np.arange(-kmax, 0), np.arange(1, kmax + 1)]).astype(np.int64)

    stats: dict[str, dict] = {
        cid: {"worst": 0.0, "ce": None, "count": 0}
        for cid in ("a", "b_sign", "b_support", "c", "d")
    }

    def _update(cid, ok, ratio, krow, ncol):
        st = stats[cid]
        st["count"] += ok.size
        if ratio is not None and ratio.size:
            w = float(ratio.max())
            if w > st["worst"]:
                st["worst"] = w
        if not ok.all() and st["ce"] is None:
            i, j = np.unravel_index(int(np.argmin(ok)), ok.shape)
            st["ce"] = (int(krow[i, 0]), int(ncol[0, j]))

    n_col = r[None, :]
    for start in range(0, r.size, chunk):
        k_row = r[start : start + chunk, None]
        m = k_row - n_col
        abs_k = np.abs(k_row)
        abs_m = np.abs(m)
        abs_n = np.abs(n_col)
        s1 = abs_k * abs_m - k_row * m
        support = (k_row * m) < 0

        # a: sigma1 <= 2|n||k-n|
        rhs_a = 2 * abs_n * abs_m
        ok = s1 <= rhs_a
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(rhs_a > 0, s1 / rhs_a, 0.0)
        _update("a", ok, ratio, k_row, n_col)

        # b-sign: sigma1 = 2|k||k-n| on the support, 0 off it
        ok = np.where(support, s1 == 2 * abs_k * abs_m, s1 == 0)
        _update("b_sign", ok, None, k_row, n_col)

        # b-support: sigma1 != 0 implies |k| < |n|
        ok = ~((s1 != 0) & (abs_k >= abs_n))
        _update("b_support", ok, None, k_row, n_col)

        # c: |k sigma1| <= 2 n^2 |k-n|
        lhs_c = abs_k * s1
        rhs_c = 2 * abs_n * abs_n * abs_m
        ok = lhs_c <= rhs_c
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(rhs_c > 0, lhs_c / rhs_c, 0.0)
        _update("c", ok, ratio, k_row, n_col)

        # d: structural route, overflow-safe at any allowed kmax
        s3 = abs_k * abs_m**3 - k_row * m**3
        ok = np.where(support, s3 == 2 * abs_k * abs_m**3, s3 == 0)
        ok &= ~(support & (abs_k * abs_k > abs_n * abs_n))
        if direct:
            lhs_d = abs_k * s3
            rhs_d = 2 * abs_n * abs_n * abs_m**3
            ok &= lhs_d <= rhs_d
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(rhs_d > 0, lhs_d / rhs_d, 0.0)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(
                    support & (abs_m > 0),
                    (abs_k * abs_k).astype(np.float64) / (abs_n * abs_n),
                    0.0,
                )
        _update("d", ok, ratio, k_row, n_col)

    descriptions = {
        "a": "sigma1(k,n) <= 2|n||k-n|",
        "b_sign": "sigma1 != 0 iff k(k-n) < 0, equal to 2|k||k-n| there",
        "b_support": "sigma1 != 0 implies |k| < |n|",
        "c": "|k sigma1| <= 2 n^2 |k-n|",
        "d": "|k sigma3| <= 2 n^2 |k-n|^3",
    }
    checks = tuple(
        BoundCheck(
            check_id=cid,
            description=descriptions[cid],
            passed=stats[cid]["ce"] is None,
            worst_ratio=stats[cid]["worst"],
            counterexample=stats[cid]["ce"],
            n_checked=stats[cid]["count"],
        )
        for cid in ("a", "b_sign", "b_support", "c", "d")
    )
    return SymbolBoundsReport(kmax=kmax, direct_product_checked=direct, checks=checks)


def format_symbol_report(report: SymbolBoundsReport) -> str:
    lines = [f"symbol bounds, exhaustive over 0 < |k|,|n| <= {report.kmax}"]
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        line = (
            f"[{c.check_id}] {status} {c.description}; "
            f"worst ratio {c.worst_ratio:.6f}; pairs checked {c.n_checked}"
        )
        if c.counterexample is not None:
            line += f"; first counterexample (k,n)={c.counterexample}"
        lines.append(line)
    lines.append(
        "check d route: "
        + (
            "structural + direct int64 product comparison"
            if report.direct_product_checked
            else "structural (direct product would overflow int64 at this kmax)"
        )
    )
    return "\n".join(lines)
