import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cutproject.modelset import (
    Window,
    density,
    enumerate_coefficients,
    gap_types,
    generate,
    in_model_set,
    min_gap,
    patch_neighborhood,
    relative_denseness,
    theoretical_density,
    uniform_distribution_discrepancy,
)
from cutproject.ring import QuadraticNumber, QuadraticRing

TAU = (1 + 5**0.5) / 2


def brute_force(ring, lo, hi, s, bound=40):
    out = set()
    for a in range(-bound, bound + 1):
        for b in range(-bound, bound + 1):
            x = ring.element(a, b)
            if abs(x.exact_value) <= s and lo <= x.exact_star <= hi:
                out.add((a, b))
    return out


def test_window_validation():
    with pytest.raises(ValueError, match="window empty"):
        Window(1, 1)
    with pytest.raises(ValueError, match="window empty"):
        Window(1, -1)
    w = Window(-1, 1)
    assert w.contains(1) and w.contains(-1) and not w.contains(1.0000001)
    assert w.volume == 2 and w.is_symmetric()


def test_first_points(golden, window):
    sample = generate(golden, window, 3)
    nonneg = [(a, b) for a, b in zip(sample.a.tolist(), sample.b.tolist()) if golden.element(a, b).value >= 0]
    assert nonneg == [(0, 0), (1, 0), (0, 1), (1, 1)]
    assert np.allclose(sample.values[sample.values >= 0], [0, 1, TAU, 1 + TAU])


def test_boundary_points_included(golden, window):
    sample = generate(golden, window, 10)
    assert golden.one in sample and golden.element(-1, 0) in sample
    assert golden.element(2, 0) not in sample
    assert golden.zero in sample


@pytest.mark.parametrize("pr, lo, hi, s", [((1, 1), -1, 1, 10), ((2, 1), -1, 1, 12), ((1, 1), -0.3, 0.7, 15), ((3, 1), QuadraticNumber(0, -1, 13), 2, 9)])
def test_generation_matches_brute_force(pr, lo, hi, s):
    ring = QuadraticRing(*pr)
    sample = generate(ring, Window(lo, hi), s)
    assert sample.coefficient_set() == brute_force(ring, QuadraticNumber(0) + lo, QuadraticNumber(0) + hi, s)
    assert np.all(np.diff(sample.values) > 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(-200, 200), st.integers(-200, 200))
def test_membership_agrees_with_generation(a, b):
    ring = QuadraticRing(1, 1)
    window = Window(-1, 1)
    x = ring.element(a, b)
    s = abs(x.value) + 1
    assert in_model_set(x, window) == (x in generate(ring, window, s))


def test_radius_must_be_positive(golden, window):
    with pytest.raises(ValueError):
        generate(golden, window, 0)


def test_absurd_radius_overflows(golden, window):
    with pytest.raises(OverflowError):
        enumerate_coefficients(golden, window, 1e30)


def test_density_matches_volume_over_covolume(golden, window):
    sample = generate(golden, window, 1e4)
    assert density(sample) == pytest.approx(2 / 5**0.5, rel=0.01)
    assert theoretical_density(golden, window) == pytest.approx(2 / 5**0.5, rel=1e-15)
    half = generate(golden, Window(-0.5, 0.5), 1e4)
    assert density(half) / density(sample) == pytest.approx(0.5, rel=0.02)


def test_density_cauchy(golden, window):
    for s in (500.0, 2000.0):
        d1 = density(generate(golden, window, s))
        d2 = density(generate(golden, window, 2 * s))
        assert abs(d1 - d2) < 5 / s


def test_gaps(golden, window):
    small = generate(golden, window, 1e3)
    big = generate(golden, window, 1e4)
    assert min_gap(small) == pytest.approx(1 / TAU, rel=1e-12)
    assert min_gap(big) == min_gap(small)
    assert relative_denseness(big) <= 2
    assert {(g.a, g.b) for g in gap_types(big)} == {(-1, 1), (1, 0), (0, 1)}
    sub = generate(golden, Window(-0.5, 0.5), 1e3)
    assert min_gap(sub) >= min_gap(small)


def test_discrepancy(golden, window):
    d3 = uniform_distribution_discrepancy(generate(golden, window, 1e3), 20)
    d4 = uniform_distribution_discrepancy(generate(golden, window, 1e4), 20)
    d5 = uniform_distribution_discrepancy(generate(golden, window, 1e5), 20)
    assert d4 < 0.02
    assert d5 < d3
    assert uniform_distribution_discrepancy(generate(golden, window, 100), 1) == 0


def test_patch_neighborhood_generic_window(golden):
    # no lattice star lands on a rational endpoint other than an integer
    window = Window(-0.95, 1.05)
    sample = generate(golden, window, 60)
    n2 = patch_neighborhood(sample, 2, 50)
    n4 = patch_neighborhood(sample, 4, 50)
    coords2 = {(v.a, v.b) for v in n2.translations}
    coords4 = {(v.a, v.b) for v in n4.translations}
    assert (0, 0) in coords2
    assert coords4 <= coords2
    assert any(c != (0, 0) for c in coords2)
    patch = [x for x in sample.points if abs(x.value) <= 2]
    for v in n2.translations:
        for x in patch:
            assert (x + v) in sample


def test_patch_neighborhood_boundary_window(golden, window):
    # both 1 and -1 sit on the boundary of [-1, 1]; any v keeping them
    # inside needs star(v) = 0, so only v = 0 survives
    sample = generate(golden, window, 60)
    n2 = patch_neighborhood(sample, 2, 50)
    assert [(v.a, v.b) for v in n2.translations] == [(0, 0)]
    n_half = patch_neighborhood(sample, 0.5, 50)
    assert len(n_half.translations) > 1
    assert {(v.a, v.b) for v in n2.translations} <= {(v.a, v.b) for v in n_half.translations}


def test_patch_precondition(golden, window):
    sample = generate(golden, window, 20)
    with pytest.raises(ValueError):
        patch_neighborhood(sample, 5, 20)
