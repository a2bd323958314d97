"""Hutchinson measures of the contraction family ``y -> a y + v*`` on the window.

Measures are binned on a uniform partition of the window.  One Hutchinson
step pushes every bin's mass through every contraction and splits it
linearly between the two bins whose centres straddle the image; this keeps
mass and first moment exact.  A chaos-game sampler is included only as an
independent cross-check.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .density import DensityProfile, product_terms, FHAT_TOL
from .inflation import TranslationSet
from .modelset import Window

log = logging.getLogger(__name__)

DEFAULT_BINS = 4096


class ConvergenceError(RuntimeError):
    def __init__(self, message, iterations, residual):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


@dataclass(frozen=True, eq=False)
class BinnedMeasure:
    window: Window
    masses: np.ndarray
    iterations: int | None = None
    residual: float | None = None

    @property
    def bins(self) -> int:
        return len(self.masses)

    @property
    def width(self) -> float:
        return self.window.volume / self.bins

    @property
    def centers(self) -> np.ndarray:
        return self.window.lo_f + (np.arange(self.bins) + 0.5) * self.width

    @property
    def total(self) -> float:
        return float(self.masses.sum())

    def integrate(self, phi) -> float:
        """``mu(phi)`` with ``phi`` evaluated at bin centres (callable or profile)."""
        return float(np.dot(self.masses, phi(self.centers)))

    def characteristic(self, k) -> np.ndarray | complex:
        """``sum_j m_j exp(-2 pi i k c_j)``."""
        k = np.asarray(k, dtype=float)
        out = np.exp(-2j * np.pi * np.multiply.outer(k, self.centers)) @ self.masses
        return complex(out) if out.ndim == 0 else out

    def l1_distance(self, other: BinnedMeasure) -> float:
        return float(np.abs(self.masses - other.masses).sum())


def uniform_measure(window: Window, bins: int = DEFAULT_BINS) -> BinnedMeasure:
    return BinnedMeasure(window, np.full(bins, 1.0 / bins))


def point_mass(window: Window, bins: int, u: float) -> BinnedMeasure:
    m = np.zeros(bins)
    i = int(np.clip(np.floor((u - window.lo_f) / window.volume * bins), 0, bins - 1))
    m[i] = 1.0
    return BinnedMeasure(window, m)


def random_measure(window: Window, bins: int, seed: int) -> BinnedMeasure:
    m = np.random.default_rng(seed).random(bins)
    return BinnedMeasure(window, m / m.sum())


def transfer_matrix(window: Window, bins: int, translations: TranslationSet) -> sparse.csr_matrix:
    """Column-stochastic matrix of one Hutchinson step on the binned window."""
    if len(translations) == 0:
        raise ValueError("translation set is empty")
    a = translations.inflation.a
    h = window.volume / bins
    centers = window.lo_f + (np.arange(bins) + 0.5) * h
    rows, cols, vals = [], [], []
    src = np.arange(bins)
    weight = 1.0 / len(translations)
    for u in translations.star_values:
        r = (a * centers + u - centers[0]) / h
        i = np.floor(r).astype(int)
        frac = r - i
        below = i < 0
        above = i >= bins - 1
        i = np.clip(i, 0, bins - 2)
        frac = np.where(below, 0.0, np.where(above, 1.0, frac))
        rows += [i, i + 1]
        cols += [src, src]
        vals += [weight * (1.0 - frac), weight * frac]
    mat = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(bins, bins)
    )
    return mat.tocsr()


def hutchinson_step(measure: BinnedMeasure, translations: TranslationSet) -> BinnedMeasure:
    mat = transfer_matrix(measure.window, measure.bins, translations)
    return BinnedMeasure(measure.window, mat @ measure.masses)


def hutchinson_fixed_point(
    translations: TranslationSet,
    bins: int = DEFAULT_BINS,
    tol: float = 1e-10,
    max_iter: int = 2000,
    initial: BinnedMeasure | None = None,
    window: Window | None = None,
) -> BinnedMeasure:
    """Iterate Hutchinson steps until the L1 change drops below ``tol``.

    ``window`` defaults to the window containing the compatibility window
    (the caller should pass the model set window).  Starts from the uniform
    measure unless ``initial`` is given.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if initial is not None:
        window, bins = initial.window, initial.bins
        m = initial.masses.astype(float)
    else:
        if window is None:
            raise ValueError("window is required without an initial measure")
        m = np.full(bins, 1.0 / bins)
    mat = transfer_matrix(window, bins, translations)
    dist = np.inf
    for it in range(1, max_iter + 1):
        new = mat @ m
        dist = float(np.abs(new - m).sum())
        m = new
        if dist < tol:
            log.info("hutchinson fixed point after %d iterations, last L1 step %.3e", it, dist)
            return BinnedMeasure(window, m, it, dist)
    raise ConvergenceError(f"no convergence in {max_iter} iterations (last L1 step {dist:.3e})", max_iter, dist)


def internal_g_s(translations: TranslationSet, k) -> np.ndarray:
    """``(1/#T_s) sum_v exp(-2 pi i k v*)``, the internal-side exponential sum."""
    k = np.asarray(k, dtype=float)
    return np.exp(-2j * np.pi * np.multiply.outer(k, translations.star_values)).mean(axis=-1)


def hutchinson_fourier(k: float, translations: TranslationSet, a=None, n_terms: int | None = None, tol: float = FHAT_TOL) -> complex:
    """Characteristic function ``prod_N g_s(a^N k)`` of the Hutchinson measure.

    ``n_terms`` defaults to the certified truncation for ``tol``.
    """
    a = translations.inflation.a if a is None else float(a)
    if n_terms is None:
        c = 2 * np.pi * float(np.max(np.abs(translations.star_values)))
        n_terms, _ = product_terms(abs(k), c, a, tol)
    value = 1 + 0j
    for n in range(n_terms):
        value *= complex(internal_g_s(translations, a**n * k))
    return value


def chaos_game(translations: TranslationSet, n_samples: int, seed: int = 0, burn_in: int = 64) -> np.ndarray:
    """Random-iteration samples of the Hutchinson measure (cross-check only)."""
    rng = np.random.default_rng(seed)
    a = translations.inflation.a
    u = translations.star_values
    y = np.zeros(n_samples)
    for _ in range(burn_in):
        y = a * y + u[rng.integers(len(u), size=n_samples)]
    return y


@dataclass
class WeakConvergenceRow:
    radius: float
    n_maps: int
    errors: list[float]


def weak_convergence_report(
    translations_list: list[TranslationSet],
    test_functions: list,
    reference_f: DensityProfile,
    bins: int = DEFAULT_BINS,
    tol: float = 1e-12,
) -> list[WeakConvergenceRow]:
    """``|mu_s(phi) - int phi f|`` for each translation set and test function."""
    x = reference_f.x
    ref = [float(np.trapezoid(phi(x) * reference_f.values, x)) for phi in test_functions]
    rows = []
    for ts in translations_list:
        mu = hutchinson_fixed_point(ts, bins, tol, window=reference_f.window)
        errs = [abs(mu.integrate(phi) - r) for phi, r in zip(test_functions, ref)]
        rows.append(WeakConvergenceRow(ts.sample.radius, len(ts), errs))
    return rows
