"""Fourier representation of mean-zero periodic fields with multiplier calculus.

Conventions used across the package:

* fields live on the torus T = [-pi, pi) and are real-valued,
* Fourier coefficients follow the unitary-in-(2pi) convention
  fhat(n) = (2pi)^{-1/2} * integral_T f(x) exp(-i n x) dx, so that
  f(x) = (2pi)^{-1/2} * sum_n fhat(n) exp(i n x),
* only the n >= 0 half-spectrum is stored; negative modes are implied by the
  Hermitian symmetry of real fields,
* dynamical fields are mean-zero (fhat(0) = 0); pointwise products retain
  their mode-0 amplitude so downstream code can decide when to re-project.

Operators are Fourier multipliers: ``hilbert`` (-i sgn n), ``calderon_power``
(|n|^s), ``derivative`` ((i n)^order).  Quadratic products are computed exactly
by zero-padded physical evaluation (the quadrature grid satisfies N >= 3K + 1,
so no aliasing ever enters).  Norms: Wiener A^alpha with an optional analytic
strip weight e^{strip |n|}, homogeneous Sobolev Hdot^s, L2, and physical
extrema located by dense sampling followed by golden-section refinement.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.fft import next_fast_len

__all__ = [
    "GridSpec",
    "SpectralField",
    "NormReport",
    "zero_field",
    "field_from_coeffs",
    "harmonic_field",
    "random_field",
    "to_physical",
    "from_physical",
    "phys_grid",
    "hilbert",
    "calderon_power",
    "derivative",
    "pointwise_product",
    "project_mean_zero",
    "restrict_band",
    "embed",
    "wiener_norm",
    "sobolev_norm",
    "l2_norm",
    "l2_inner",
    "wiener_distance",
    "extrema",
    "norms",
    "scale_symbol_check",
    "save_snapshot",
    "load_snapshot",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class GridSpec:
    """Band limit and physical quadrature resolution.

    ``phys_points`` is the number of uniform samples on [-pi, pi).  The
    invariant N >= 3K + 1 makes quadratic products of band-limited fields
    exact (no aliasing); N is additionally chosen transform-friendly.
    """

    band_limit: int
    phys_points: int

    def __post_init__(self) -> None:
        if self.band_limit < 1:
            raise ValueError("band_limit must be a positive integer")
        if self.phys_points < 3 * self.band_limit + 1:
            raise ValueError(
                f"phys_points={self.phys_points} violates N >= 3K+1 for K={self.band_limit}"
            )

    @classmethod
    def for_band(cls, band_limit: int) -> "GridSpec":
        """Smallest transform-friendly grid with N >= 3K + 1."""
        return cls(band_limit, int(next_fast_len(3 * band_limit + 1)))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Real periodic field stored as its n = 0..K Fourier half-spectrum.

    coeffs[n] is fhat(n); fhat(-n) = conj(fhat(n)) is implied.  Mean-zero
    fields have coeffs[0] == 0 exactly.  Instances are immutable; the
    coefficient array is read-only.
    """

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != (self.grid.band_limit + 1,):
            raise ValueError(
                f"coeffs shape {c.shape} does not match band limit {self.grid.band_limit}"
            )
        if abs(c[0].imag) > 1e-13 * max(1.0, float(np.abs(c).max())):
            raise ValueError("mode-0 amplitude of a real field must be real")
        c = c.copy()
        c[0] = c[0].real
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def band(self) -> int:
        return self.grid.band_limit

    @property
    def mean_zero(self) -> bool:
        return self.coeffs[0] == 0.0


def zero_field(grid: GridSpec) -> SpectralField:
    return SpectralField(grid, np.zeros(grid.band_limit + 1, dtype=np.complex128))


def field_from_coeffs(
    grid: GridSpec, coeffs: np.ndarray, *, allow_mean: bool = False
) -> SpectralField:
    """Build a field from a half-spectrum array (index n = 0..K)."""
    c = np.asarray(coeffs, dtype=np.complex128).copy()
    if not allow_mean:
        scale = max(1.0, float(np.abs(c).max())) if c.size else 1.0
        if abs(c[0]) > 1e-12 * scale:
            raise ValueError("field is not mean-zero (pass allow_mean=True to keep mode 0)")
        c[0] = 0.0
    return SpectralField(grid, c)


def harmonic_field(
    grid: GridSpec,
    cos_amps: Mapping[int, float] | None = None,
    sin_amps: Mapping[int, float] | None = None,
) -> SpectralField:
    """Field sum_m a_m cos(mx) + b_m sin(mx) from amplitude dictionaries."""
    c = np.zeros(grid.band_limit + 1, dtype=np.complex128)
    half = math.sqrt(math.pi / 2.0)  # fhat(m) of cos(mx) is sqrt(pi/2)
    for m, a in (cos_amps or {}).items():
        if not 1 <= m <= grid.band_limit:
            raise ValueError(f"mode {m} outside band [1, {grid.band_limit}]")
        c[m] += a * half
    for m, b in (sin_amps or {}).items():
        if not 1 <= m <= grid.band_limit:
            raise ValueError(f"mode {m} outside band [1, {grid.band_limit}]")
        c[m] += -1j * b * half
    return SpectralField(grid, c)


def random_field(
    seed: int,
    band: int,
    decay_exponent: float = 3.0,
    amplitude: float = 1.0,
    grid: GridSpec | None = None,
) -> SpectralField:
    """Seed-deterministic mean-zero field with |n|^{-decay_exponent} spectrum.

    Coefficients are i.i.d. complex Gaussians damped by the power-law decay;
    the same (seed, band, decay_exponent, amplitude) always reproduces the
    same field.
    """
    if grid is None:
        grid = GridSpec.for_band(band)
    if band > grid.band_limit:
        raise ValueError("requested band exceeds the grid band limit")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(band)
    y = rng.standard_normal(band)
    n = np.arange(1, band + 1, dtype=np.float64)
    c = np.zeros(grid.band_limit + 1, dtype=np.complex128)
    c[1 : band + 1] = amplitude * (x + 1j * y) / math.sqrt(2.0) * n ** (-decay_exponent)
    return SpectralField(grid, c)


def phys_grid(n_points: int) -> np.ndarray:
    """Uniform sample points x_j = -pi + 2 pi j / N on [-pi, pi)."""
    return -math.pi + 2.0 * math.pi * np.arange(n_points) / n_points


def _phase(n_modes: int) -> np.ndarray:
    # exp(-i n pi) = (-1)^n translates between the [0, 2pi) FFT grid and [-pi, pi)
    out = np.ones(n_modes, dtype=np.float64)
    out[1::2] = -1.0
    return out


def to_physical(f: SpectralField, n_points: int | None = None) -> np.ndarray:
    """Sample the field on the uniform [-pi, pi) grid (default: grid.phys_points)."""
    n = f.grid.phys_points if n_points is None else int(n_points)
    if n < 2 * f.band + 1:
        raise ValueError("n_points too small to represent the field without aliasing")
    spec = np.zeros(n // 2 + 1, dtype=np.complex128)
    k = f.band + 1
    spec[:k] = f.coeffs * _phase(k) * (n / _SQRT_2PI)
    return np.fft.irfft(spec, n=n)


def from_physical(
    samples: np.ndarray, grid: GridSpec, *, allow_mean: bool = False
) -> SpectralField:
    """Project uniform [-pi, pi) samples onto the band |n| <= K.

    Exact (up to roundoff) whenever the sampled function is band-limited with
    band <= len(samples) - 1 - K, which all padded-product call sites satisfy.
    """
    s = np.asarray(samples, dtype=np.float64)
    n = s.shape[0]
    spec = np.fft.rfft(s)
    k = grid.band_limit + 1
    if spec.shape[0] < k:
        raise ValueError("too few samples for the requested band limit")
    c = spec[:k] * _phase(k) * (_SQRT_2PI / n)
    return field_from_coeffs(grid, c, allow_mean=allow_mean)


# ---------------------------------------------------------------------------
# multiplier operators


def _with_coeffs(f: SpectralField, coeffs: np.ndarray) -> SpectralField:
    return SpectralField(f.grid, coeffs)


def hilbert(f: SpectralField) -> SpectralField:
    """Hilbert transform: multiplier -i sgn(n)."""
    c = f.coeffs.copy()
    c[1:] *= -1j
    c[0] = 0.0  # sgn(0) = 0
    return _with_coeffs(f, c)


def calderon_power(f: SpectralField, s: float) -> SpectralField:
    """Fractional dissipation power Lambda^s: multiplier |n|^s (s = 0 is identity)."""
    if s == 0:
        return f
    n = np.arange(f.band + 1, dtype=np.float64)
    c = f.coeffs.copy()
    c[1:] *= n[1:] ** s
    c[0] = 0.0
    return _with_coeffs(f, c)


def derivative(f: SpectralField, order: int) -> SpectralField:
    """order-th derivative: multiplier (i n)^order."""
    if order < 1:
        raise ValueError("order must be a positive integer")
    n = np.arange(f.band + 1, dtype=np.float64)
    return _with_coeffs(f, f.coeffs * (1j * n) ** order)


def project_mean_zero(f: SpectralField) -> SpectralField:
    c = f.coeffs.copy()
    c[0] = 0.0
    return _with_coeffs(f, c)


def restrict_band(f: SpectralField, grid: GridSpec) -> SpectralField:
    """Drop coefficients beyond the new (smaller or equal) band limit."""
    if grid.band_limit > f.band:
        raise ValueError("restrict_band cannot grow the band; use embed")
    return SpectralField(grid, f.coeffs[: grid.band_limit + 1])


def embed(f: SpectralField, grid: GridSpec) -> SpectralField:
    """Zero-pad the spectrum into a larger band."""
    if grid.band_limit < f.band:
        raise ValueError("embed cannot shrink the band; use restrict_band")
    c = np.zeros(grid.band_limit + 1, dtype=np.complex128)
    c[: f.band + 1] = f.coeffs
    return SpectralField(grid, c)


def pointwise_product(f: SpectralField, g: SpectralField) -> SpectralField:
    """Exact product of two band-K fields, returned with band 2K.

    Both factors are evaluated on the extended grid for band 2K (which has
    N >= 6K + 1 > 4K points, enough to represent the product exactly), then
    transformed back.  Mode 0 of the product is retained: intermediate
    quantities like f * Lambda f carry a mean even when f does not.
    """
    if f.grid != g.grid:
        raise ValueError("pointwise_product requires both fields on the same grid")
    wide = GridSpec.for_band(2 * f.band)
    n_pts = wide.phys_points
    prod = to_physical(f, n_pts) * to_physical(g, n_pts)
    return from_physical(prod, wide, allow_mean=True)


# ---------------------------------------------------------------------------
# norms


def wiener_norm(f: SpectralField, alpha: float, strip: float = 0.0) -> float:
    """A^alpha norm sum_k |k|^alpha e^{strip |k|} |fhat(k)| over k in Z.

    With strip > 0 this is the analytic-strip (weighted Wiener) norm; mode 0
    contributes only at alpha = 0 (0^0 = 1 convention, relevant for product
    fields that carry a mean).
    """
    mags = np.abs(f.coeffs)
    n = np.arange(1, f.band + 1, dtype=np.float64)
    w = n**alpha if strip == 0.0 else n**alpha * np.exp(strip * n)
    total = 2.0 * float(np.dot(w, mags[1:]))
    if alpha == 0.0:
        total += float(mags[0])
    return total


def sobolev_norm(f: SpectralField, s: float) -> float:
    """Homogeneous Sobolev norm Hdot^s = (sum |k|^{2s} |fhat(k)|^2)^{1/2}."""
    sq = np.abs(f.coeffs) ** 2
    n = np.arange(1, f.band + 1, dtype=np.float64)
    total = 2.0 * float(np.dot(n ** (2.0 * s), sq[1:]))
    if s == 0.0:
        total += float(sq[0])
    return math.sqrt(total)


def l2_norm(f: SpectralField) -> float:
    return sobolev_norm(f, 0.0)


def l2_inner(f: SpectralField, g: SpectralField) -> float:
    """Real inner product integral_T f g dx via Parseval."""
    band = min(f.band, g.band)
    cf = f.coeffs[: band + 1]
    cg = g.coeffs[: band + 1]
    return float(np.real(cf[0] * np.conj(cg[0]) + 2.0 * np.sum(cf[1:] * np.conj(cg[1:]))))


def wiener_distance(
    f: SpectralField, g: SpectralField, alpha: float = 0.0, strip: float = 0.0
) -> float:
    """A^alpha norm of f - g, tolerating different band limits."""
    band = max(f.band, g.band)
    cf = np.zeros(band + 1, dtype=np.complex128)
    cg = np.zeros(band + 1, dtype=np.complex128)
    cf[: f.band + 1] = f.coeffs
    cg[: g.band + 1] = g.coeffs
    diff = SpectralField(GridSpec.for_band(band), cf - cg)
    return wiener_norm(diff, alpha, strip)


# ---------------------------------------------------------------------------
# extrema via dense sampling + golden-section refinement

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _eval_rows(rows: np.ndarray, xs: np.ndarray) -> np.ndarray:
    # value_i = (2pi)^{-1/2} * (rows[i,0].real + 2 Re sum_{n>=1} rows[i,n] e^{i n x_i})
    n = np.arange(rows.shape[1])
    e = np.exp(1j * xs[:, None] * n[None, :])
    full = (rows * e).sum(axis=1)
    return (2.0 * full.real - rows[:, 0].real) / _SQRT_2PI


def _golden_max(
    rows: np.ndarray, centers: np.ndarray, half_width: float, xtol: float
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized golden-section maximization, one bracket per row."""
    a = centers - half_width
    b = centers + half_width
    n_iter = max(1, int(math.ceil(math.log(xtol / (2.0 * half_width)) / math.log(_INVPHI))))
    for _ in range(n_iter):
        h = b - a
        x1 = b - _INVPHI * h
        x2 = a + _INVPHI * h
        vals = _eval_rows(np.vstack([rows, rows]), np.concatenate([x1, x2]))
        f1, f2 = vals[: len(x1)], vals[len(x1) :]
        keep_left = f1 > f2
        b = np.where(keep_left, x2, b)
        a = np.where(keep_left, a, x1)
        if float((b - a).max()) < xtol:
            break
    xm = 0.5 * (a + b)
    return xm, _eval_rows(rows, xm)


def _newton_polish(rows: np.ndarray, xs: np.ndarray, half_width: float) -> np.ndarray:
    """Refine stationary points of each row by Newton on the derivative.

    Value comparisons alone cannot localize a smooth extremum better than
    sqrt(eps); the stationarity equation r'(x) = 0 is well conditioned, so a
    few Newton steps recover the location to machine precision.
    """
    n = np.arange(rows.shape[1], dtype=np.float64)
    d1 = rows * (1j * n)
    d2 = rows * -(n**2)
    x = xs.copy()
    for _ in range(4):
        g = _eval_rows(d1, x)
        h = _eval_rows(d2, x)
        safe = np.abs(h) > 1e-300
        step = np.where(safe, g / np.where(safe, h, 1.0), 0.0)
        x = x - np.clip(step, -half_width, half_width)
    return x


def extrema(f: SpectralField, xtol: float = 1e-10) -> tuple[float, float, float, float, float]:
    """Locate max f, min f and max |f'| on the torus.

    Returns (max_f, argmax_x, min_f, argmin_x, linf_dxf).  The search samples
    at >= 8K uniform points and refines each discrete extremum by
    golden-section to x-tolerance ``xtol``.
    """
    k = f.band
    m = int(next_fast_len(max(8 * k, 64)))
    fx = to_physical(f, m)
    df = derivative(f, 1)
    dfx = to_physical(df, m)
    x = phys_grid(m)

    i_max = int(np.argmax(fx))
    i_min = int(np.argmin(fx))
    i_stp = int(np.argmax(np.abs(dfx)))
    sgn = 1.0 if dfx[i_stp] >= 0 else -1.0

    rows = np.vstack([f.coeffs, -f.coeffs, sgn * df.coeffs])
    centers = x[[i_max, i_min, i_stp]]
    xs, vals = _golden_max(rows, centers, 2.0 * math.pi / m, xtol)
    xp = _newton_polish(rows, xs, 2.0 * math.pi / m)
    xp = np.mod(xp + math.pi, 2.0 * math.pi) - math.pi
    vp = _eval_rows(rows, xp)
    better = vp >= vals
    xs = np.where(better, xp, xs)
    vals = np.maximum(vp, vals)

    max_f = max(float(vals[0]), float(fx[i_max]))
    min_f = min(-float(vals[1]), float(fx[i_min]))
    linf_dxf = max(float(vals[2]), float(abs(dfx[i_stp])))
    x_max = float(xs[0]) if vals[0] >= fx[i_max] else float(x[i_max])
    x_min = float(xs[1]) if -vals[1] <= fx[i_min] else float(x[i_min])
    return max_f, x_max, min_f, x_min, linf_dxf


@dataclass(frozen=True)
class NormReport:
    """All norms the decay/energy statements consume, for one field.

    ``sobolev`` holds (order, Hdot^order) pairs for the requested orders;
    ``a1_strip`` is the analytic-strip Wiener norm A^1 with weight
    e^{strip |n|}.  Extrema are golden-refined physical values.
    """

    a0: float
    a1: float
    a2: float
    strip: float
    a1_strip: float
    l2: float
    sobolev: tuple[tuple[float, float], ...]
    linf: float
    max_f: float
    min_f: float
    linf_dxf: float

    def h(self, s: float) -> float:
        for order, value in self.sobolev:
            if order == s:
                return value
        raise KeyError(f"Sobolev order {s} was not requested in this report")


def norms(
    f: SpectralField,
    strip: float = 0.0,
    sobolev_orders: Sequence[float] = (0.0, 1.5, 2.0),
) -> NormReport:
    """Full norm report; see NormReport for the field meanings."""
    max_f, _, min_f, _, linf_dxf = extrema(f)
    return NormReport(
        a0=wiener_norm(f, 0.0),
        a1=wiener_norm(f, 1.0),
        a2=wiener_norm(f, 2.0),
        strip=strip,
        a1_strip=wiener_norm(f, 1.0, strip),
        l2=l2_norm(f),
        sobolev=tuple((float(s), sobolev_norm(f, float(s))) for s in sobolev_orders),
        linf=max(abs(max_f), abs(min_f)),
        max_f=max_f,
        min_f=min_f,
        linf_dxf=linf_dxf,
    )


# ---------------------------------------------------------------------------
# integer symbol scaling check


def scale_symbol_check(lam: int, kmax: int) -> bool:
    """Exact integer homogeneity of the quadratic symbols under k,n -> lam*k, lam*n.

    Verifies sigma1(lam k, lam n) = lam^2 sigma1(k, n) and
    sigma3(lam k, lam n) = lam^4 sigma3(k, n) for all 0 < |k|, |n| <= kmax.
    """
    from .nonlinear import sigma1_values, sigma3_values

    if lam < 1:
        raise ValueError("lam must be >= 1")
    if lam * kmax > 20000:
        raise ValueError("lam * kmax too large for overflow-safe int64 evaluation")
    r = np.concatenate([np.arange(-kmax, 0), np.arange(1, kmax + 1)]).astype(np.int64)
    k = r[:, None]
    n = r[None, :]
    ok1 = np.array_equal(sigma1_values(lam * k, lam * n), lam**2 * sigma1_values(k, n))
    ok3 = np.array_equal(sigma3_values(lam * k, lam * n), lam**4 * sigma3_values(k, n))
    return bool(ok1 and ok3)


# ---------------------------------------------------------------------------
# snapshot files


def _fmt(x: float) -> str:
    return "%.17g" % float(x)


def save_snapshot(f: SpectralField, path, nu: float, t: float) -> None:
    """Write the documented snapshot file.

    Schema: {"grid": {"K": int, "N": int}, "nu": float, "t": float,
    "modes": [[n, re, im] for n = 1..K]} with 17-significant-digit decimals,
    giving a bit-exact round-trip.  Negative modes are implied by symmetry;
    snapshots are only defined for mean-zero fields.
    """
    if not f.mean_zero:
        raise ValueError("snapshots are defined for mean-zero fields only")
    if not np.all(np.isfinite(f.coeffs)):
        raise ValueError("cannot snapshot a field with non-finite coefficients")
    rows = ", ".join(
        "[%d, %s, %s]" % (n, _fmt(f.coeffs[n].real), _fmt(f.coeffs[n].imag))
        for n in range(1, f.band + 1)
    )
    text = (
        '{"grid": {"K": %d, "N": %d}, "nu": %s, "t": %s, "modes": [%s]}\n'
        % (f.grid.band_limit, f.grid.phys_points, _fmt(nu), _fmt(t), rows)
    )
    with open(path, "w", encoding="ascii") as fh:
        fh.write(text)


def load_snapshot(path) -> tuple[SpectralField, float, float]:
    """Read a snapshot file; returns (field, nu, t)."""
    with open(path, "r", encoding="ascii") as fh:
        data = json.load(fh)
    try:
        k = int(data["grid"]["K"])
        n_pts = int(data["grid"]["N"])
        nu = float(data["nu"])
        t = float(data["t"])
        modes = data["modes"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed snapshot file {path}: {exc}") from None
    grid = GridSpec(k, n_pts)
    c = np.zeros(k + 1, dtype=np.complex128)
    seen = set()
    for row in modes:
        n, re, im = int(row[0]), float(row[1]), float(row[2])
        if not 1 <= n <= k or n in seen:
            raise ValueError(f"malformed snapshot file {path}: bad mode index {n}")
        seen.add(n)
        c[n] = re + 1j * im
    if len(seen) != k:
        raise ValueError(f"malformed snapshot file {path}: expected modes 1..{k}")
    return SpectralField(grid, c), nu, t
