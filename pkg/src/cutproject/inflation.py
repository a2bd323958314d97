"""Self-similarities ``x -> q x + v`` of a model set and their translation sets."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .modelset import ModelSetSample, Window, generate
from .ring import QuadraticNumber, QuadraticRing, RingElement, exact


class IncompatibleInflation(ValueError):
    """The compatibility window has empty interior."""


@dataclass(frozen=True)
class Inflation:
    """Scalar inflation by a unit ``q_factor`` of Z[q].

    ``a_contraction`` is the star image of the factor, i.e. the action on
    internal space; it is kept exact.
    """

    q_factor: RingElement

    def __post_init__(self):
        if not self.q_factor.is_unit():
            raise ValueError(f"inflation factor {self.q_factor} has norm {self.q_factor.norm()}, not a unit")
        if not abs(self.q_factor.exact_value) > 1:
            raise ValueError(f"inflation factor {self.q_factor} does not expand")
        if not abs(self.q_factor.exact_star) < 1:
            raise ValueError(f"star image of {self.q_factor} does not contract")

    @property
    def ring(self) -> QuadraticRing:
        return self.q_factor.ring

    @property
    def a_contraction(self) -> QuadraticNumber:
        return self.q_factor.exact_star

    @property
    def a(self) -> float:
        return float(self.a_contraction)

    @property
    def q(self) -> float:
        return self.q_factor.value

    def power(self, n: int) -> Inflation:
        return Inflation(self.q_factor**n)

    def apply(self, x: RingElement, v: RingElement) -> RingElement:
        return self.q_factor * x + v


def omega_q(window: Window, a) -> Window:
    """Compatibility window ``{u : a*window + u within window}``.

    Exact when ``a`` and the window endpoints are exact numbers.  Raises
    ``IncompatibleInflation`` if the result has empty interior, which for
    an interval happens exactly when ``|a| >= 1``.
    """
    if isinstance(a, float) or isinstance(window.lo, float) or isinstance(window.hi, float):
        lo, hi, af = window.lo_f, window.hi_f, float(a)
        new_lo = lo - min(af * lo, af * hi)
        new_hi = hi - max(af * lo, af * hi)
    else:
        lo, hi, ae = exact(window.lo), exact(window.hi), exact(a)
        new_lo = lo - min(ae * lo, ae * hi)
        new_hi = hi - max(ae * lo, ae * hi)
    if not exact(new_lo) < exact(new_hi):
        raise IncompatibleInflation(f"not compatible: compatibility window [{new_lo}, {new_hi}] has empty interior")
    return Window(new_lo, new_hi)


@dataclass(frozen=True)
class TranslationSet:
    inflation: Inflation
    omega_q: Window
    sample: ModelSetSample

    def __len__(self):
        return len(self.sample)

    @property
    def values(self) -> np.ndarray:
        return self.sample.values

    @property
    def star_values(self) -> np.ndarray:
        return self.sample.star_values


def translations(ring: QuadraticRing, window: Window, inflation: Inflation, s: float) -> TranslationSet:
    """Translations ``v`` with ``|v| <= s`` for which ``x -> q x + v`` maps the model set into itself."""
    if inflation.ring != ring:
        raise ValueError("inflation factor lives in a different ring")
    oq = omega_q(window, inflation.a_contraction)
    return TranslationSet(inflation, oq, generate(ring, oq, s))


def translations_with_count(ring, window, inflation, min_count: int, s0: float = 8.0) -> TranslationSet:
    """Translation set at the smallest radius holding at least ``min_count`` translations."""
    if min_count < 1:
        raise ValueError("min_count must be positive")
    s = s0
    ts = translations(ring, window, inflation, s)
    while len(ts) < min_count:
        s *= 2
        ts = translations(ring, window, inflation, s)
    radius = float(np.sort(np.abs(ts.values))[min_count - 1])
    return translations(ring, window, inflation, radius)


@dataclass
class SelfSimilarityReport:
    passed: bool
    checked: int
    counterexample: RingElement | None = None
    image: RingElement | None = None


def verify_self_similarity(sample: ModelSetSample, inflation: Inflation, v: RingElement) -> SelfSimilarityReport:
    """Exactly check that ``q x + v`` lies in the model set for all sample ``x`` whose image stays in range."""
    qa, qb = inflation.q_factor.a, inflation.q_factor.b
    ring = sample.ring
    p, r = ring.p, ring.r
    # (qa + qb q)(a + b q) + v, vectorised over the sample
    a = qa * sample.a + r * qb * sample.b + v.a
    b = qa * sample.b + qb * sample.a + p * qb * sample.b + v.b
    vals = ring.values(a, b)
    in_range = np.abs(vals) <= sample.radius
    checked = 0
    window = sample.window
    lo, hi = exact(window.lo), exact(window.hi)
    stars = ring.star_values(a, b)
    tol = 1e-9 * (1.0 + np.abs(a) + np.abs(b))
    for i in np.flatnonzero(in_range):
        checked += 1
        y = ring.element(int(a[i]), int(b[i]))
        if window.lo_f + tol[i] <= stars[i] <= window.hi_f - tol[i]:
            continue
        if not lo <= y.exact_star <= hi:
            x = ring.element(int(sample.a[i]), int(sample.b[i]))
            return SelfSimilarityReport(False, checked, x, y)
    return SelfSimilarityReport(True, checked)
