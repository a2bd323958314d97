"""Averaging (refinement) operators, invariant densities and their spectra.

All functions here live on the internal side.  A ``DensityProfile`` is a
function sampled on a uniform grid spanning its window, and evaluated between
grid points by linear interpolation (zero outside the window).

Fourier transforms use ``fhat(k) = int exp(-2 pi i k x) f(x) dx``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .inflation import TranslationSet
from .modelset import Window
from .ring import QuadraticNumber, RingElement, exact

DEFAULT_GRID = 4096
FHAT_TOL = 1e-14
TAIL_TOL = 1e-10
CASCADE_FACTORS = 20
# leading cascade factors are combined in closed form, the rest on a spline grid
_MAX_CLOSED_FORM = 6
_CASCADE_STEP = 2e-4


@dataclass(frozen=True, eq=False)
class DensityProfile:
    window: Window
    values: np.ndarray
    # exact Fourier transform of the sampled function, when known
    transform: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    @property
    def grid_size(self) -> int:
        return len(self.values)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.window.lo_f, self.window.hi_f, self.grid_size)

    @property
    def step(self) -> float:
        return self.window.volume / (self.grid_size - 1)

    def __call__(self, u) -> np.ndarray:
        return np.interp(u, self.x, self.values, left=0.0, right=0.0)

    def integral(self) -> float:
        return float(np.trapezoid(self.values, self.x))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def with_values(self, values, transform=None) -> DensityProfile:
        return DensityProfile(self.window, np.asarray(values, dtype=float), transform)


def profile_from_function(fn, window: Window, grid_size: int = DEFAULT_GRID) -> DensityProfile:
    x = np.linspace(window.lo_f, window.hi_f, grid_size)
    return DensityProfile(window, np.asarray(fn(x), dtype=float))


def flat_density(window: Window, grid_size: int = DEFAULT_GRID) -> DensityProfile:
    """Normalised indicator ``1_window / vol(window)``."""
    return DensityProfile(window, np.full(grid_size, 1.0 / window.volume))


# --- Fourier side -------------------------------------------------------------


def box_transform(k, window: Window) -> np.ndarray:
    """Transform of the normalised indicator of ``window``: ``exp(-2 pi i k m) sinc(k w)``."""
    return _box(np.asarray(k, dtype=float), window.center, window.volume)


def _box(k, center, width):
    if center == 0:
        return np.sinc(k * width) + 0j
    return np.exp(-2j * np.pi * k * center) * np.sinc(k * width)


def product_terms(k_abs: float, c: float, a: float, tol: float) -> tuple[int, float]:
    """Number of factors N and a bound on ``|prod_{n>=N} F(a^n k) - 1|``.

    Each factor satisfies ``|F(kappa) - 1| <= c |kappa|``; the tail is then
    bounded by ``expm1(c |k| |a|^N / (1 - |a|))``.
    """
    a = abs(a)
    if not 0 < a < 1:
        raise ValueError("contraction factor must satisfy 0 < |a| < 1")
    n = 0
    while True:
        exponent = c * k_abs * a**n / (1.0 - a)
        bound = math.expm1(exponent) if exponent < 700 else math.inf
        if bound < tol:
            return n, bound
        n += 1


@dataclass(frozen=True)
class FourierProductValue:
    k: float
    value: complex
    terms_used: int
    truncation_bound: float


def fhat_array(k, omega_q: Window, a, tol: float = FHAT_TOL):
    """Vectorised truncated product ``prod_n X^_{omega_q}(a^n k)``.

    Returns ``(values, terms_used, bound)``; the bound holds for every entry.
    """
    k = np.asarray(k, dtype=float)
    a = float(a)
    c = 2 * np.pi * omega_q.max_abs
    kmax = float(np.max(np.abs(k))) if k.size else 0.0
    n, bound = product_terms(kmax, c, a, tol)
    out = np.ones(k.shape, dtype=complex)
    center, width = omega_q.center, omega_q.volume
    scale = 1.0
    for _ in range(n):
        out *= _box(scale * k, center, width)
        scale *= a
    return out, n, bound


def fhat(k: float, omega_q: Window, a, tol: float = FHAT_TOL) -> FourierProductValue:
    """Transform of the invariant density at ``k`` with a certified truncation bound."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    value, n, bound = fhat_array(np.array([k]), omega_q, a, tol)
    return FourierProductValue(float(k), complex(value[0]), n, bound)


def _profile_transform(profile: DensityProfile, k: np.ndarray, chunk: int = 512) -> np.ndarray:
    """Trapezoid-rule transform of the sampled values (spectrally accurate for smooth inputs)."""
    x = profile.x
    w = np.full(len(x), profile.step)
    w[0] = w[-1] = profile.step / 2
    fw = w * profile.values
    out = np.empty(len(k), dtype=complex)
    for i in range(0, len(k), chunk):
        kk = k[i : i + chunk, None]
        out[i : i + chunk] = np.exp(-2j * np.pi * kk * x[None, :]) @ fw
    return out


def _synthesize(x: np.ndarray, k: np.ndarray, ft: np.ndarray, dk: float, chunk: int = 512) -> np.ndarray:
    """Trapezoid inverse transform of a Hermitian spectrum given on ``k = 0, dk, 2dk, ...``.

    The k grid is uniform, so one phase block ``exp(2 pi i x j dk)`` is
    reused for every chunk, shifted by the chunk's start frequency.
    """
    out = np.full(len(x), ft[0].real * dk)
    width = min(chunk, len(k) - 1)
    if width <= 0:
        return out
    block = np.exp(2j * np.pi * np.outer(x, np.arange(width) * dk))
    for i in range(1, len(k), chunk):
        part = ft[i : i + chunk]
        shift = np.exp(2j * np.pi * x * k[i])
        out += 2 * dk * (shift * (block[:, : len(part)] @ part)).real
    return out


def inverse_transform(
    spectrum_fn: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    support_width: float,
    order: int = 0,
    tail_tol: float = TAIL_TOL,
    k_start: float = 16.0,
    k_cap: float = 4096.0,
) -> np.ndarray:
    """``D^order`` of the real function whose transform is ``spectrum_fn``, sampled at ``x``.

    The cutoff K doubles until the spectrum's mass in the last octave
    ``(K/2, K]`` falls below ``tail_tol`` (super-polynomial decay makes this a
    reliable estimate of everything beyond K).  The spacing
    ``dk = 1/(4 support_width)`` keeps periodic images away from the support.
    """
    dk = 1.0 / (4.0 * support_width)
    K = k_start
    while True:
        k = np.arange(0.0, K + dk / 2, dk)
        ft = spectrum_fn(k) * (2j * np.pi * k) ** order
        tail = dk * 2 * np.sum(np.abs(ft[k > K / 2]))
        if tail < tail_tol or K >= k_cap:
            break
        K *= 2
    return _synthesize(np.asarray(x, dtype=float), k, ft, dk)


# --- the averaging operator in its three forms ---------------------------------


def average_direct(profile: DensityProfile, translations: TranslationSet) -> DensityProfile:
    """Finite average ``(|q| / #T_s) sum_v f((x - v*)/a)`` over the translation sample."""
    if len(translations) == 0:
        raise ValueError("translation set is empty")
    a = translations.inflation.a
    x = profile.x
    acc = np.zeros_like(x)
    for u in translations.star_values:
        acc += profile((x - u) / a)
    return profile.with_values(acc / (abs(a) * len(translations)))


def refinement_integral(profile: DensityProfile, omega_q: Window, a) -> DensityProfile:
    """Kernel form ``int X_{a y + omega_q}(x) f(y) dy``.

    The kernel integral over the linear interpolant of ``f`` is done in closed
    form through its piecewise-quadratic antiderivative.
    """
    a = float(a)
    if not 0 < abs(a) < 1:
        raise ValueError("|a| must lie in (0, 1)")
    xg, fv, h = profile.x, profile.values, profile.step
    cum = np.concatenate([[0.0], np.cumsum(h * (fv[1:] + fv[:-1]) / 2)])

    def antiderivative(y):
        y = np.clip(y, xg[0], xg[-1])
        i = np.clip(((y - xg[0]) / h).astype(int), 0, len(xg) - 2)
        t = y - xg[i]
        return cum[i] + fv[i] * t + (fv[i + 1] - fv[i]) * t * t / (2 * h)

    x = xg
    # x - a y in [c1, c2]  <=>  y between (x - c2)/a and (x - c1)/a
    y1 = (x - omega_q.hi_f) / a
    y2 = (x - omega_q.lo_f) / a
    lo, hi = np.minimum(y1, y2), np.maximum(y1, y2)
    return profile.with_values((antiderivative(hi) - antiderivative(lo)) / omega_q.volume)


def refinement_fourier(profile: DensityProfile, omega_q: Window, a, tail_tol: float = TAIL_TOL) -> DensityProfile:
    """Multiplier form: inverse transform of ``X^_{omega_q}(k) f^(a k)``."""
    a = float(a)
    k_cap = 1.0 / (4.0 * profile.step)

    def ft(k):
        return box_transform(k, omega_q) * _profile_transform(profile, a * k)

    vals = inverse_transform(ft, profile.x, profile.window.volume, tail_tol=tail_tol, k_cap=k_cap)
    return profile.with_values(vals)


# --- invariant density -----------------------------------------------------------


def invariant_density(window: Window, omega_q: Window, a, grid_size: int = DEFAULT_GRID, tol: float = TAIL_TOL) -> DensityProfile:
    """Fixed point of the averaging operator, by inverse transform of the infinite product."""
    if not 0 < abs(float(a)) < 1:
        raise ValueError("|a| must lie in (0, 1)")
    if not (exact(window.lo) <= exact(omega_q.lo) and exact(omega_q.hi) <= exact(window.hi)):
        raise ValueError("compatibility window must lie inside the window")

    def transform(k):
        return fhat_array(k, omega_q, a)[0]

    x = np.linspace(window.lo_f, window.hi_f, grid_size)
    vals = inverse_transform(transform, x, window.volume, tail_tol=tol)
    return DensityProfile(window, vals, transform)


def cascade_factors(omega_q: Window, a, factors: int = CASCADE_FACTORS) -> list[tuple[float, float]]:
    """Intervals ``a^n * omega_q`` for ``n < factors`` as float pairs."""
    a = float(a)
    out = []
    for n in range(factors):
        s = a**n
        ends = sorted((s * omega_q.lo_f, s * omega_q.hi_f))
        out.append((ends[0], ends[1]))
    return out


def _uniform_sum_density(x, intervals) -> np.ndarray:
    """Exact density of a sum of independent uniforms on ``intervals`` (few factors only)."""
    m = len(intervals)
    lows = sum(lo for lo, _ in intervals)
    widths = [hi - lo for lo, hi in intervals]
    out = np.zeros_like(x)
    for subset in itertools.product((0, 1), repeat=m):
        shift = lows + sum(w for w, s in zip(widths, subset) if s)
        sign = -1.0 if sum(subset) % 2 else 1.0
        out += sign * np.maximum(x - shift, 0.0) ** (m - 1)
    return out / (math.factorial(m - 1) * math.prod(widths))


def _closed_form_count(intervals, limit: float = 1e-10) -> int:
    """How many leading factors the alternating closed form can take before cancellation bites."""
    best = 1
    for m in range(2, min(_MAX_CLOSED_FORM, len(intervals)) + 1):
        widths = [hi - lo for lo, hi in intervals[:m]]
        term = sum(widths) ** (m - 1) / (math.factorial(m - 1) * math.prod(widths))
        if 2**m * term * np.finfo(float).eps > limit:
            break
        best = m
    return best


def invariant_density_cascade(
    window: Window, omega_q: Window, a, grid_size: int = DEFAULT_GRID, factors: int = CASCADE_FACTORS
) -> DensityProfile:
    """Invariant density as the convolution of normalised indicators of ``a^n omega_q``.

    Independent of any Fourier transform: the leading factors are combined
    in closed form, the remaining ones by exact box averaging of a cubic
    spline antiderivative on a fine grid.
    """
    intervals = cascade_factors(omega_q, a, factors)
    m = _closed_form_count(intervals)
    head, rest = intervals[:m], intervals[m:]
    lo = sum(i[0] for i in intervals)
    hi = sum(i[1] for i in intervals)
    n = int(math.ceil((hi - lo) / _CASCADE_STEP)) + 1
    xf = np.linspace(lo, hi, n)
    g = _uniform_sum_density(xf, head)
    for c1, c2 in rest:
        # boxes this narrow change g by O(width^2 g'') only, far below round-off
        if c2 - c1 < 1e-6 * _CASCADE_STEP:
            continue
        anti = CubicSpline(xf, g).antiderivative()
        g = (anti(np.clip(xf - c1, lo, hi)) - anti(np.clip(xf - c2, lo, hi))) / (c2 - c1)
    spline = CubicSpline(xf, g)
    x = np.linspace(window.lo_f, window.hi_f, grid_size)
    vals = np.where((x >= lo) & (x <= hi), spline(np.clip(x, lo, hi)), 0.0)
    return DensityProfile(window, vals)


# --- spectrum and eigenfunctions ---------------------------------------------------


@dataclass
class SpectrumEntry:
    eigenvalue: complex | QuadraticNumber
    multiplicity: int
    multi_indices: list[tuple[int, ...]]

    @property
    def multi_index(self) -> tuple[int, ...]:
        return self.multi_indices[0]


def _is_exact(x) -> bool:
    return isinstance(x, (QuadraticNumber, RingElement, int)) or hasattr(x, "denominator")


def spectrum(eigenvalues_of_a: Sequence, max_total_degree: int, tol: float = 1e-12) -> list[SpectrumEntry]:
    """Products ``alpha^m`` over multi-indices with ``|m| <= max_total_degree``, grouped with multiplicities.

    Exact inputs (QuadraticNumber, ints, Fractions; ring elements by their
    value) are grouped exactly, anything else by ``tol``.  Sorted by
    decreasing modulus, then by multi-index.
    """
    if max_total_degree < 0:
        raise ValueError("max_total_degree must be non-negative")
    alphas = list(eigenvalues_of_a)
    exact_mode = all(_is_exact(x) for x in alphas)
    if exact_mode:
        alphas = [x.exact_value if isinstance(x, RingElement) else exact(x) for x in alphas]
        mods = [abs(float(x)) for x in alphas]
    else:
        alphas = [complex(x) for x in alphas]
        mods = [abs(x) for x in alphas]
    for m in mods:
        if not 0 < m < 1:
            raise ValueError(f"eigenvalue modulus {m} not in (0, 1)")
    n = len(alphas)
    groups: list[tuple[object, list[tuple[int, ...]]]] = []
    for deg in range(max_total_degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), deg):
            idx = tuple(combo.count(i) for i in range(n))
            val = exact(1) if exact_mode else 1 + 0j
            for i, e in enumerate(idx):
                for _ in range(e):
                    val = val * alphas[i]
            for key, members in groups:
                if (key == val) if exact_mode else (abs(key - val) <= tol):
                    members.append(idx)
                    break
            else:
                groups.append((val, [idx]))
    entries = [SpectrumEntry(v, len(m), sorted(m, reverse=True)) for v, m in groups]
    entries.sort(key=lambda e: (-abs(complex(float(e.eigenvalue)) if exact_mode else e.eigenvalue), e.multi_index))
    return entries


def eigenfunction(profile_f: DensityProfile, order: int, tail_tol: float = TAIL_TOL) -> DensityProfile:
    """``order``-th derivative of ``profile_f`` computed in Fourier space.

    Uses the profile's exact transform when it carries one, otherwise the
    trapezoid transform of its samples.  Order 0 returns the input.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    if order == 0:
        return profile_f
    if profile_f.transform is not None:
        ft = profile_f.transform
        k_cap = 4096.0
    else:
        def ft(k):
            return _profile_transform(profile_f, k)

        k_cap = 1.0 / (4.0 * profile_f.step)
    vals = inverse_transform(
        ft, profile_f.x, profile_f.window.volume, order=order, tail_tol=tail_tol, k_cap=k_cap
    )
    return profile_f.with_values(vals)


def sign_changes(values: np.ndarray, rel_threshold: float = 1e-6) -> int:
    """Sign changes of a sampled function, ignoring samples below ``rel_threshold * max|values|``."""
    v = np.asarray(values)
    big = v[np.abs(v) > rel_threshold * np.max(np.abs(v))]
    s = np.sign(big)
    return int(np.count_nonzero(s[1:] != s[:-1]))


def relative_residual(lhs: DensityProfile, rhs: DensityProfile) -> float:
    """``||lhs - rhs||_inf / ||rhs||_inf``."""
    return float(np.max(np.abs(lhs.values - rhs.values)) / np.max(np.abs(rhs.values)))
