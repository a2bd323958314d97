"""Exponential-sum amplitudes, their Weyl limits and Bragg intensities.

The limit functions g and h are nowhere continuous, so they are only ever
evaluated at explicit Fourier module points (closed form).  Arbitrary k
are handled by the finite sums ``g_s`` / ``h_s``.

``sign=-1`` (default) uses the kernel ``exp(-2 pi i k x)``; ``sign=+1``
flips it, which conjugates every amplitude.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import DensityProfile, box_transform, product_terms, FHAT_TOL
from .inflation import Inflation, TranslationSet
from .modelset import ModelSetSample, Window
from .ring import EmbeddingLattice, FourierModulePoint


@dataclass(frozen=True)
class SpectralAmplitude:
    k: FourierModulePoint | float
    value: complex
    s_used: float

    @property
    def intensity(self) -> float:
        return abs(self.value) ** 2

    @property
    def k_value(self) -> float:
        return self.k.k_value if isinstance(self.k, FourierModulePoint) else float(self.k)


def _k(k) -> float:
    return k.k_value if isinstance(k, FourierModulePoint) else float(k)


def _phase_sum(positions: np.ndarray, weights, k: float, sign: int) -> complex:
    ph = np.exp(sign * 2j * np.pi * k * positions)
    if weights is None:
        return complex(ph.mean())
    return complex(np.dot(weights, ph) / len(positions))


def g_s(translations: TranslationSet, k, sign: int = -1) -> SpectralAmplitude:
    """``(1/#T_s) sum_v exp(-2 pi i k v)`` over the translation sample."""
    if len(translations) == 0:
        raise ValueError("translation set is empty")
    val = _phase_sum(translations.values, None, _k(k), sign)
    return SpectralAmplitude(k, val, translations.sample.radius)


def point_weights(sample: ModelSetSample, profile: DensityProfile) -> np.ndarray:
    """Per-point weights ``p(w) = vol(window) f(w*)``; their sample mean tends to 1."""
    return sample.window.volume * profile(sample.star_values)


def h_s(sample: ModelSetSample, weights: DensityProfile, k, sign: int = -1) -> SpectralAmplitude:
    """Weighted sum ``(1/#Lambda_s) sum_w p(w) exp(-2 pi i k w)``."""
    if len(sample) == 0:
        raise ValueError("empty sample")
    p = point_weights(sample, weights)
    return SpectralAmplitude(k, _phase_sum(sample.values, p, _k(k), sign), sample.radius)


def module_point(lattice: EmbeddingLattice, k: float, k_internal: float, tol: float = 1e-7) -> FourierModulePoint:
    """Recover the exact module point with dual coordinates ``(k, k_internal)``.

    Raises ValueError when the pair is not (within ``tol``) on the dual lattice.
    """
    ring = lattice.ring
    root = math.sqrt(ring.discriminant)
    y, ys = k * root, -k_internal * root
    b = (y - ys) / root
    a = y - b * ring.q_value
    ai, bi = round(a), round(b)
    if abs(a - ai) > tol or abs(b - bi) > tol:
        raise ValueError(f"({k}, {k_internal}) is not on the Fourier module")
    return FourierModulePoint(ring.element(ai, bi))


def g_weyl(k: FourierModulePoint, omega_q: Window, sign: int = -1) -> SpectralAmplitude:
    """Weyl limit of ``g_s`` at a module point: the normalised window transform at ``k_star``."""
    if not isinstance(k, FourierModulePoint):
        raise ValueError("g_weyl is only defined at exact Fourier module points")
    kappa = k.k_star if sign < 0 else -k.k_star
    return SpectralAmplitude(k, complex(box_transform(kappa, omega_q)), math.inf)


def h_product(k: FourierModulePoint, omega_q: Window, inflation: Inflation, tol: float = FHAT_TOL, sign: int = -1) -> SpectralAmplitude:
    """``prod_N g((Q^t)^N k)`` with the module points scaled exactly in the ring.

    Truncated by the same certified rule as the internal-space product.
    """
    if not isinstance(k, FourierModulePoint):
        raise ValueError("h_product is only defined at exact Fourier module points")
    c = 2 * np.pi * omega_q.max_abs
    n, _ = product_terms(abs(k.k_star), c, inflation.a, tol)
    value = 1 + 0j
    point = k
    for _ in range(n):
        value *= g_weyl(point, omega_q, sign).value
        point = point.scaled(inflation.q_factor)
    return SpectralAmplitude(k, value, math.inf)


@dataclass(frozen=True)
class BraggPeak:
    k: FourierModulePoint
    amplitude: complex

    @property
    def intensity(self) -> float:
        return abs(self.amplitude) ** 2


def bragg_intensities(module_points, omega_q: Window, inflation: Inflation, weights_mode: str = "flat", sign: int = -1) -> list[BraggPeak]:
    """Bragg peaks ``|g(k)|^2`` (flat weights) or ``|h(k)|^2`` (invariant-density weights)."""
    if weights_mode == "flat":
        amp = [g_weyl(k, omega_q, sign).value for k in module_points]
    elif weights_mode == "invariant":
        amp = [h_product(k, omega_q, inflation, sign=sign).value for k in module_points]
    else:
        raise ValueError(f"unknown weights mode {weights_mode!r}")
    peaks = [BraggPeak(k, v) for k, v in zip(module_points, amp)]
    peaks.sort(key=lambda p: p.k.k_value)
    return peaks


def support_included(inner: list[BraggPeak], outer: list[BraggPeak], threshold: float = 1e-30) -> bool:
    """Every k with intensity above ``threshold`` in ``inner`` also has it in ``outer``."""
    outer_map = {(p.k.numerator.a, p.k.numerator.b): p.intensity for p in outer}
    for p in inner:
        if p.intensity > threshold:
            key = (p.k.numerator.a, p.k.numerator.b)
            if outer_map.get(key, 0.0) <= threshold:
                return False
    return True
