import math

import numpy as np
import pytest

from cutproject.density import fhat, flat_density
from cutproject.diffraction import (
    bragg_intensities,
    g_s,
    g_weyl,
    h_product,
    h_s,
    module_point,
    point_weights,
    support_included,
)
from cutproject.inflation import translations
from cutproject.modelset import generate
from cutproject.ring import EmbeddingLattice, FourierModulePoint, fourier_module_points

TAU = (1 + 5**0.5) / 2


@pytest.fixture(scope="module")
def t5(golden, window, tau_inflation):
    return translations(golden, window, tau_inflation, 5)


@pytest.fixture(scope="module")
def t_big(golden, window, tau_inflation):
    return translations(golden, window, tau_inflation, 1e4)


@pytest.fixture(scope="module")
def sample_big(golden, window):
    return generate(golden, window, 1e4)


def test_g_s_t5(t5):
    assert g_s(t5, 0.0).value == 1
    expected = (1 + 2 * math.cos(2 * math.pi * (1 + TAU)) + 2 * math.cos(2 * math.pi * (1 + 2 * TAU))) / 5
    assert g_s(t5, 1.0).value == pytest.approx(expected, abs=1e-13)


def test_amplitudes_bounded_and_hermitian(t5, golden, window, f_inv):
    sample = generate(golden, window, 200)
    for k in np.linspace(-7, 7, 57):
        v = g_s(t5, k)
        assert abs(v.value) <= 1 + 1e-15
        assert g_s(t5, -k).value == pytest.approx(v.value.conjugate(), abs=1e-15)
        w = h_s(sample, f_inv, k)
        assert h_s(sample, f_inv, -k).value == pytest.approx(w.value.conjugate(), abs=1e-14)


def test_sign_flip_conjugates(t5, omega_tau):
    assert g_s(t5, 0.7, sign=+1).value == pytest.approx(g_s(t5, 0.7).value.conjugate(), abs=1e-15)
    k = FourierModulePoint(t5.sample.ring.element(1, 1))
    assert g_weyl(k, omega_tau, sign=+1).value == pytest.approx(g_weyl(k, omega_tau).value.conjugate(), abs=1e-15)


def test_flat_weights_reduce_to_plain_sum(golden, window):
    sample = generate(golden, window, 300)
    flat = flat_density(window)
    assert np.allclose(point_weights(sample, flat), 1.0)
    for k in (0.3, 1.7):
        plain = np.exp(-2j * np.pi * k * sample.values).mean()
        assert h_s(sample, flat, k).value == pytest.approx(plain, abs=1e-14)


def test_h_s_at_zero_near_one(sample_big, f_inv):
    assert h_s(sample_big, f_inv, 0.0).value.real == pytest.approx(1, abs=1e-3)


def test_module_point_recovery(golden):
    lattice = EmbeddingLattice(golden)
    k = FourierModulePoint(golden.element(3, -2))
    assert module_point(lattice, k.k_value, k.k_internal) == k
    with pytest.raises(ValueError):
        module_point(lattice, 0.123, 0.456)


def test_g_weyl_closed_form(golden, omega_tau):
    assert g_weyl(FourierModulePoint(golden.zero), omega_tau).value == 1
    c = omega_tau.hi_f
    for a, b in [(1, 1), (2, -1), (0, 1)]:
        k = FourierModulePoint(golden.element(a, b))
        x = 2 * math.pi * k.k_star * c
        assert g_weyl(k, omega_tau).value == pytest.approx(math.sin(x) / x, abs=1e-15)
    with pytest.raises(ValueError):
        g_weyl(0.5, omega_tau)


def test_weyl_convergence(golden, window, tau_inflation, omega_tau, t_big):
    small = translations(golden, window, tau_inflation, 1e3)
    # smallest nonzero module point
    pts = [k for k in fourier_module_points(EmbeddingLattice(golden), 1, 1) if k.numerator != golden.zero]
    k = min(pts, key=lambda p: abs(p.k_value))
    limit = g_weyl(k, omega_tau).value
    err_small = abs(g_s(small, k).value - limit)
    err_big = abs(g_s(t_big, k).value - limit)
    assert err_big < 0.02
    assert err_big < err_small


def test_h_product_equals_fhat(golden, omega_tau, tau_inflation):
    a = tau_inflation.a_contraction
    assert h_product(FourierModulePoint(golden.zero), omega_tau, tau_inflation).value == 1
    for c in [(1, 0), (0, 1), (1, 1), (2, -1), (-3, 2)]:
        k = FourierModulePoint(golden.element(*c))
        assert abs(h_product(k, omega_tau, tau_inflation).value - fhat(k.k_star, omega_tau, a).value) < 1e-10


def test_h_s_converges_to_h_product(golden, sample_big, f_inv, omega_tau, tau_inflation):
    for c in [(1, 1), (0, 1), (2, 1)]:
        k = FourierModulePoint(golden.element(*c))
        assert abs(h_s(sample_big, f_inv, k).value - h_product(k, omega_tau, tau_inflation).value) < 0.03


def test_off_module_decay(t_big, golden, window, tau_inflation):
    rng = np.random.default_rng(1)
    small = translations(golden, window, tau_inflation, 1e3)
    for k in rng.uniform(0.1, 3, 5):
        assert abs(g_s(t_big, k).value) < 0.05
    k = math.pi / 3
    assert abs(g_s(t_big, k).value) < abs(g_s(small, k).value) + 0.01


def test_bragg_lists(golden, omega_tau, tau_inflation):
    pts = fourier_module_points(EmbeddingLattice(golden), 3, 3)
    flat = bragg_intensities(pts, omega_tau, tau_inflation, "flat")
    inv = bragg_intensities(pts, omega_tau, tau_inflation, "invariant")
    assert [p.k.k_value for p in flat] == sorted(p.k.k_value for p in flat)
    zero = [p for p in flat + inv if p.k.numerator == golden.zero]
    assert all(p.intensity == 1 for p in zero)
    assert support_included(inv, flat)
    with pytest.raises(ValueError):
        bragg_intensities(pts, omega_tau, tau_inflation, "weird")


def test_flat_intensity_envelope(golden, omega_tau, tau_inflation):
    # sinc envelope: bounded by 1 / (2 pi c |k_star|)^2
    pts = fourier_module_points(EmbeddingLattice(golden), 5, 5)
    c = omega_tau.hi_f
    for p in bragg_intensities(pts, omega_tau, tau_inflation, "flat"):
        if p.k.k_star != 0:
            assert p.intensity <= 1 / (2 * math.pi * c * p.k.k_star) ** 2 + 1e-15
