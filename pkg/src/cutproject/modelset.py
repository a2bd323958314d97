"""Windows, model set generation and finite-sample statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .ring import QuadraticNumber, QuadraticRing, RingElement, exact

# relative slack of float tests; anything closer to a boundary goes to exact arithmetic
_MARGIN = 1e-9


@dataclass(frozen=True)
class Window:
    """Closed interval ``[lo, hi]`` in internal space.

    Endpoints may be floats, ints, Fractions or exact ``QuadraticNumber``s;
    membership tests against ring elements are exact either way.
    """

    lo: object
    hi: object

    def __post_init__(self):
        for x in (self.lo, self.hi):
            if isinstance(x, float) and not math.isfinite(x):
                raise ValueError("window endpoints must be finite")
        if not exact(self.lo) < exact(self.hi):
            raise ValueError(f"window empty: lo={self.lo} must be below hi={self.hi}")

    @property
    def lo_f(self) -> float:
        return float(self.lo)

    @property
    def hi_f(self) -> float:
        return float(self.hi)

    @property
    def volume(self) -> float:
        return float(exact(self.hi) - exact(self.lo))

    @property
    def center(self) -> float:
        return float((exact(self.hi) + exact(self.lo)) / 2)

    @property
    def half_width(self) -> float:
        return float((exact(self.hi) - exact(self.lo)) / 2)

    @property
    def max_abs(self) -> float:
        return max(abs(self.lo_f), abs(self.hi_f))

    def contains(self, u) -> bool:
        if isinstance(u, RingElement):
            u = u.exact_star
        u = exact(u)
        return exact(self.lo) <= u <= exact(self.hi)

    def is_symmetric(self) -> bool:
        return exact(self.lo) == -exact(self.hi)

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


def _in_interval(x_float, exact_fn, lo, hi, scale):
    """Boolean mask for ``lo <= x <= hi``; near-boundary entries decided exactly."""
    lo_f, hi_f = float(lo), float(hi)
    tol = _MARGIN * (1.0 + scale)
    inside = (x_float >= lo_f + tol) & (x_float <= hi_f - tol)
    maybe = ~inside & (x_float >= lo_f - tol) & (x_float <= hi_f + tol)
    if maybe.any():
        lo_e, hi_e = exact(lo), exact(hi)
        for i in np.flatnonzero(maybe):
            v = exact_fn(i)
            inside[i] = lo_e <= v <= hi_e
    return inside


def enumerate_coefficients(ring: QuadraticRing, window: Window, s: float):
    """Coefficient arrays ``(a, b)`` of all ``x`` with ``|x| <= s`` and ``x* in window``.

    The result is sorted by physical value.  Only the integer ranges allowed
    by the two linear constraints are visited.
    """
    if not s > 0:
        raise ValueError("radius must be positive")
    root = math.sqrt(ring.discriminant)
    q, qs = ring.q_value, ring.q_star
    # x - x* = b*sqrt(D)
    b_min = math.floor((-s - window.hi_f) / root) - 1
    b_max = math.ceil((s - window.lo_f) / root) + 1
    if max(abs(b_min), abs(b_max)) > 2**62 or s > 2.0**62:
        raise OverflowError(f"radius {s} needs coefficients beyond the 64-bit range")
    b = np.arange(b_min, b_max + 1, dtype=np.int64)
    bf = b.astype(float)
    low = np.maximum(-s - bf * q, window.lo_f - bf * qs)
    high = np.minimum(s - bf * q, window.hi_f - bf * qs)
    start = np.floor(low).astype(np.int64) - 1
    stop = np.ceil(high).astype(np.int64) + 1
    count = np.maximum(stop - start + 1, 0)
    keep = count > 0
    b, start, count = b[keep], start[keep], count[keep]
    total = int(count.sum())
    bb = np.repeat(b, count)
    offsets = np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(count) - count, count)
    aa = np.repeat(start, count) + offsets

    scale = np.abs(aa).astype(float) + np.abs(bb).astype(float)
    vals = ring.values(aa, bb)
    stars = ring.star_values(aa, bb)
    s_exact = exact(Fraction(s), ring.discriminant) if isinstance(s, (int, float)) else exact(s, ring.discriminant)

    def _val(i):
        return ring.element(aa[i], bb[i]).exact_value

    def _star(i):
        return ring.element(aa[i], bb[i]).exact_star

    ok = _in_interval(vals, _val, -s_exact, s_exact, scale)
    ok &= _in_interval(stars, _star, window.lo, window.hi, scale)
    aa, bb, vals = aa[ok], bb[ok], vals[ok]
    order = np.argsort(vals, kind="stable")
    return aa[order], bb[order]


@dataclass(frozen=True, eq=False)
class ModelSetSample:
    """The finite slice ``{x in Lambda : |x| <= radius}``, sorted by physical value."""

    ring: QuadraticRing
    window: Window
    radius: float
    a: np.ndarray
    b: np.ndarray

    def __len__(self):
        return len(self.a)

    @property
    def values(self) -> np.ndarray:
        return self.ring.values(self.a, self.b)

    @property
    def star_values(self) -> np.ndarray:
        return self.ring.star_values(self.a, self.b)

    @property
    def points(self) -> list[RingElement]:
        return [self.ring.element(x, y) for x, y in zip(self.a.tolist(), self.b.tolist())]

    def coefficient_set(self) -> set[tuple[int, int]]:
        return set(zip(self.a.tolist(), self.b.tolist()))

    def __contains__(self, x: RingElement) -> bool:
        return bool(np.any((self.a == x.a) & (self.b == x.b)))

    def __eq__(self, other):
        if not isinstance(other, ModelSetSample):
            return NotImplemented
        return (
            self.ring == other.ring
            and exact(self.window.lo) == exact(other.window.lo)
            and exact(self.window.hi) == exact(other.window.hi)
            and self.radius == other.radius
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.b, other.b)
        )


def generate(ring: QuadraticRing, window: Window, s: float) -> ModelSetSample:
    """All points of the model set ``Lambda(window)`` with ``|x| <= s``."""
    a, b = enumerate_coefficients(ring, window, s)
    return ModelSetSample(ring, window, float(s), a, b)


def in_model_set(x: RingElement, window: Window) -> bool:
    return window.contains(x.exact_star)


def density(sample: ModelSetSample) -> float:
    """Point density estimate ``#Lambda_s / (2 s)``."""
    if len(sample) == 0:
        raise ValueError("empty sample")
    return len(sample) / (2.0 * sample.radius)


def theoretical_density(ring: QuadraticRing, window: Window) -> float:
    """``vol(window) / covolume`` for the lattice ``{(x, x*)}``."""
    return window.volume / math.sqrt(ring.discriminant)


def uniform_distribution_discrepancy(sample: ModelSetSample, bins: int) -> float:
    """Largest deviation of the binned star-image frequencies from uniform.

    ``bins=1`` is accepted and gives 0 trivially.
    """
    if bins < 1:
        raise ValueError("bins must be positive")
    if len(sample) == 0:
        raise ValueError("empty sample")
    counts, _ = np.histogram(sample.star_values, bins=bins, range=(sample.window.lo_f, sample.window.hi_f))
    frac = counts / len(sample)
    return float(np.max(np.abs(frac - 1.0 / bins)))


def _interior_gaps(sample: ModelSetSample) -> np.ndarray:
    # gaps from coefficient differences, so large radii lose no precision
    a, b = sample.a, sample.b
    if len(a) < 2:
        raise ValueError("need at least two points")
    if len(a) >= 6:
        # drop two points at each end
        a, b = a[2:-2], b[2:-2]
    return sample.ring.values(np.diff(a), np.diff(b))


def min_gap(sample: ModelSetSample) -> float:
    return float(_interior_gaps(sample).min())


def relative_denseness(sample: ModelSetSample) -> float:
    """Largest gap between consecutive interior points (an upper bound proxy for 2R)."""
    return float(_interior_gaps(sample).max())


def gap_types(sample: ModelSetSample) -> list[RingElement]:
    """Distinct interior gaps as exact ring elements, ascending."""
    a, b = sample.a, sample.b
    if len(a) >= 6:
        a, b = a[2:-2], b[2:-2]
    pairs = set(zip(np.diff(a).tolist(), np.diff(b).tolist()))
    gaps = [sample.ring.element(da, db) for da, db in pairs]
    return sorted(gaps, key=lambda g: g.exact_value)


@dataclass(frozen=True)
class PatchNeighborhood:
    patch_radius: float
    translations: list[RingElement]


def _coords_within(sample: ModelSetSample, center: RingElement, radius: float) -> set[tuple[int, int]]:
    """Exact set of sample points ``x`` with ``|x - center| <= radius``."""
    vals = sample.values
    c = center.value
    tol = _MARGIN * (1.0 + abs(c) + radius)
    idx = np.flatnonzero(np.abs(vals - c) <= radius + tol)
    bound = exact(Fraction(radius), sample.ring.discriminant)
    out = set()
    for i in idx:
        x = sample.ring.element(sample.a[i], sample.b[i])
        if abs(vals[i] - c) <= radius - tol or abs((x - center).exact_value) <= bound:
            out.add((x.a, x.b))
    return out


def patch_neighborhood(sample: ModelSetSample, patch_radius: float, search_radius: float) -> PatchNeighborhood:
    """Translations ``v`` with ``v + (Lambda cap K) == Lambda cap (v + K)``, ``K = [-R, R]``.

    Both patches must lie inside the generated sample, otherwise missing
    points would produce false positives.
    """
    if patch_radius <= 0 or search_radius < 0:
        raise ValueError("radii must be positive")
    if patch_radius + search_radius > sample.radius:
        raise ValueError(
            f"patch_radius + search_radius = {patch_radius + search_radius} exceeds sample radius {sample.radius}"
        )
    ring = sample.ring
    patch = _coords_within(sample, ring.zero, patch_radius)
    if not patch:
        raise ValueError("empty patch: the neighbourhood is not determined by a finite search")
    # any valid v maps a fixed patch point x0 onto a point of Lambda
    x0 = ring.element(*min(patch))
    candidates = _coords_within(sample, x0, search_radius)
    found = []
    for ya, yb in sorted(candidates):
        v = ring.element(ya, yb) - x0
        shifted = {(xa + v.a, xb + v.b) for xa, xb in patch}
        if shifted == _coords_within(sample, v, patch_radius):
            found.append(v)
    found.sort(key=lambda v: v.exact_value)
    return PatchNeighborhood(float(patch_radius), found)
