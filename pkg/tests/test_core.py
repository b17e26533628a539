import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from doublewell.core import (Biquartic, DoubleBox, InfiniteBox, PotentialSamples, UnitSystem,
                             build_grid, check_reflection_symmetry, grid_for, potential_from_dict,
                             potential_to_dict, sample_potential)
from doublewell.errors import DomainError, SymmetryError


def test_grid_three_points():
    g = build_grid(3, 0, 1, min_points=3)
    assert g.dx == pytest.approx(0.25)
    np.testing.assert_allclose(g.points, [0.25, 0.5, 0.75])


def test_grid_spacing_999():
    assert build_grid(999, 0, 1).dx == pytest.approx(1e-3, rel=1e-12)


@pytest.mark.parametrize("n", [8, 15, 0, -3])
def test_grid_too_small(n):
    with pytest.raises(DomainError):
        build_grid(n, 0, 1)


def test_grid_bad_interval():
    with pytest.raises(DomainError):
        build_grid(32, 1.0, 1.0)
    with pytest.raises(DomainError):
        build_grid(32, 0.0, math.inf)


@given(st.integers(16, 500), st.floats(-5, 5), st.floats(0.1, 10))
def test_grid_offsets_antisymmetric(n, lo, width):
    g = build_grid(n, lo, lo + width)
    d = g.offsets
    assert np.array_equal(d, -d[::-1])
    np.testing.assert_allclose(g.points - g.center, d, atol=1e-9 * (1 + abs(lo) + width))


def test_units():
    u = UnitSystem()
    assert u.planck == pytest.approx(2 * math.pi)
    assert u.ground_energy == pytest.approx(math.pi**2 / 2)
    assert u.box_energy(3) == pytest.approx(9 * math.pi**2 / 2)


def test_box_samples_zero():
    box = InfiniteBox(1.0)
    assert np.all(sample_potential(box, grid_for(box, 37)).values == 0)


def test_double_box_barrier_points():
    box = DoubleBox(1.0, 0.1, 500.0)
    g = grid_for(box, 199)
    v = sample_potential(box, g).values
    inside = np.abs(g.points - 0.5) < 0.05 - 1e-12
    assert np.all(v[inside] == 500.0)
    assert np.all(v[~inside] == 0.0)
    assert inside.sum() == 19


def test_double_box_validation():
    with pytest.raises(DomainError):
        DoubleBox(1.0, 1.5, 10.0)
    with pytest.raises(DomainError):
        DoubleBox(1.0, 0.1, -1.0)


def test_box_grid_width_must_match():
    with pytest.raises(DomainError):
        sample_potential(InfiniteBox(1.0), build_grid(64, 0, 2))


def test_biquartic_minima_are_stationary():
    q = Biquartic(-20.0, 80.0)
    lo, hi = q.minima()
    assert hi == pytest.approx(math.sqrt(20 / 160))
    assert lo == pytest.approx(-hi)
    dv = lambda s: 2 * q.alpha * s + 4 * q.beta * s**3
    assert dv(hi) == pytest.approx(0, abs=1e-12)
    assert dv(lo) == pytest.approx(0, abs=1e-12)


def test_symmetry_check_values():
    box = DoubleBox(1.0, 0.2, 500.0)
    s = sample_potential(box, grid_for(box, 101))
    assert check_reflection_symmetry(s) == 0.0
    v = np.array(s.values)
    v[3] += 1e-3
    assert check_reflection_symmetry(PotentialSamples(s.grid, v)) == pytest.approx(1e-3, rel=1e-2)


def test_off_center_biquartic_rejected():
    q = Biquartic(-20.0, 80.0, center_offset=0.013)
    with pytest.raises(SymmetryError):
        sample_potential(q, grid_for(q, 100))
    s = sample_potential(q, grid_for(q, 100), check=False)
    assert check_reflection_symmetry(s) > 0


def test_samples_are_read_only(box_samples):
    with pytest.raises(ValueError):
        box_samples.values[0] = 1.0
    with pytest.raises(DomainError):
        PotentialSamples(box_samples.grid, np.full(box_samples.grid.n, np.nan))


@pytest.mark.parametrize("spec", [InfiniteBox(2.0), DoubleBox(1.0, 0.1, 200.0),
                                  Biquartic(-10.0, 50.0, 1.5, 0.0)])
def test_potential_dict_round_trip(spec):
    assert potential_from_dict(potential_to_dict(spec)) == spec


def test_potential_from_dict_rejects_unknown():
    with pytest.raises(DomainError):
        potential_from_dict({"variant": "harmonic"})
