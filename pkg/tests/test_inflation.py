from fractions import Fraction

import numpy as np
import pytest

from cutproject.inflation import (
    IncompatibleInflation,
    Inflation,
    omega_q,
    translations,
    translations_with_count,
    verify_self_similarity,
)
from cutproject.modelset import Window, generate, theoretical_density
from cutproject.ring import QuadraticNumber, QuadraticRing

TAU = (1 + 5**0.5) / 2
INV_TAU2 = QuadraticNumber(Fraction(3, 2), Fraction(-1, 2), 5)  # 1/tau^2
INV_TAU = QuadraticNumber(Fraction(-1, 2), Fraction(1, 2), 5)  # 1/tau


def test_omega_tau_exact(window, tau_inflation):
    oq = omega_q(window, tau_inflation.a_contraction)
    assert oq.lo == -INV_TAU2 and oq.hi == INV_TAU2
    assert oq.hi == 1 - INV_TAU


def test_omega_tau_squared(golden, window):
    a = Inflation(golden.element(1, 1)).a_contraction
    assert a == INV_TAU2
    oq = omega_q(window, a)
    assert oq.lo == -INV_TAU and oq.hi == INV_TAU


def test_omega_float_input(window):
    oq = omega_q(window, -1 / TAU)
    assert oq.hi_f == pytest.approx(1 / TAU**2, rel=1e-14)


def test_incompatible(window):
    for a in (1, -1, 2):
        with pytest.raises(IncompatibleInflation, match="not compatible"):
            omega_q(window, a)


def test_omega_volume_symmetric(golden, window):
    for n in range(1, 6):
        a = Inflation(golden.q**n).a_contraction
        oq = omega_q(window, a)
        assert oq.volume == pytest.approx(window.volume * (1 - abs(float(a))), rel=1e-14)
        assert window.lo_f < oq.lo_f and oq.hi_f < window.hi_f


def test_omega_increasing_in_power(golden, window):
    prev = None
    for n in range(1, 6):
        oq = omega_q(window, Inflation(golden.q**n).a_contraction)
        if prev is not None:
            assert oq.lo <= prev.lo and prev.hi <= oq.hi
        prev = oq


def test_inflation_rejects(golden):
    with pytest.raises(ValueError, match="not a unit"):
        Inflation(golden.element(2, 0))
    with pytest.raises(ValueError):
        Inflation(golden.one)
    with pytest.raises(ValueError):
        # star of -q*... (1 - q) has |value| < 1
        Inflation(golden.element(1, -1))


def test_t5(golden, window, tau_inflation):
    ts = translations(golden, window, tau_inflation, 5)
    got = sorted((v.a, v.b) for v in ts.sample.points)
    assert got == sorted([(0, 0), (1, 1), (-1, -1), (1, 2), (-1, -2)])
    # 1 + tau sits exactly on the boundary of the compatibility window
    assert golden.element(1, 1).exact_star == ts.omega_q.hi


def test_translation_count_grows_linearly(golden, window, tau_inflation):
    oq = omega_q(window, tau_inflation.a_contraction)
    slope = 2 * theoretical_density(golden, oq)
    for s in (1e3, 4e3):
        ts = translations(golden, window, tau_inflation, s)
        assert len(ts) / s == pytest.approx(slope, rel=0.01)


def test_translations_with_count(golden, window, tau_inflation):
    ts = translations_with_count(golden, window, tau_inflation, 200)
    assert len(ts) >= 200
    smaller = translations(golden, window, tau_inflation, ts.sample.radius * 0.999)
    assert len(smaller) < 200


def test_self_similarity(golden, window, tau_inflation):
    sample = generate(golden, window, 300)
    assert verify_self_similarity(sample, tau_inflation, golden.zero).passed
    bad = verify_self_similarity(sample, tau_inflation, golden.one)
    assert not bad.passed
    assert bad.counterexample in sample
    assert not window.contains(bad.image)
    empty = generate(golden, Window(QuadraticNumber(Fraction(1, 3)), QuadraticNumber(Fraction(1, 2))), 0.1)
    assert verify_self_similarity(empty, tau_inflation, golden.zero).passed


def test_every_translation_is_a_self_similarity(golden, window, tau_inflation):
    sample = generate(golden, window, 1000)
    for v in translations(golden, window, tau_inflation, 200).sample.points:
        assert verify_self_similarity(sample, tau_inflation, v).passed


def test_silver_inflation():
    ring = QuadraticRing(2, 1)
    window = Window(-1, 1)
    inf = Inflation(ring.q)
    ts = translations(ring, window, inf, 50)
    sample = generate(ring, window, 200)
    assert len(ts) > 3
    for v in ts.sample.points:
        assert verify_self_similarity(sample, inf, v).passed
