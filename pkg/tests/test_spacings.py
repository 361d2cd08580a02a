from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from haarspacing.haar import sample_haar_unitary
from haarspacing.rng import RandomStream
from haarspacing.spacings import (
    eigenangles,
    gap_index_containing,
    lazy_mean,
    normalized_spacings,
    select_gap_containing_point,
    select_gap_uniform_index,
    size_biased_mean,
    wrap_angles,
)

PI = np.pi


def enumerate_size_biased(angles):
    """Length-weighted expectation over the circular gaps, in exact rationals."""
    angles = [Fraction(float(a)) for a in angles]
    m = len(angles)
    circle = Fraction(2 * PI)
    total = Fraction(0)
    for k in range(m):
        length = angles[k + 1] - angles[k] if k + 1 < m else angles[0] + circle - angles[-1]
        total += (length / circle) * (length * m / circle)
    return float(total)


def midpoint_point_average(angles, points=100_000):
    grid = -PI + (np.arange(points) + 0.5) * (2 * PI / points)
    return select_gap_containing_point(angles, grid).mean()


angle_lists = st.lists(
    st.floats(-PI, PI, exclude_max=True, allow_nan=False), min_size=1, max_size=40
).map(lambda xs: np.sort(np.array(xs)))


# -- eigenangles ----------------------------------------------------------------


def test_eigenangles_identity():
    assert np.array_equal(eigenangles(np.eye(3)), [0.0, 0.0, 0.0])


def test_minus_one_maps_to_minus_pi():
    assert np.allclose(eigenangles(np.diag([1.0, -1.0])), [-PI, 0.0], atol=1e-15)
    assert wrap_angles(PI) == -PI


def test_eigenangles_sorted():
    u = np.diag(np.exp(1j * np.array([0.5, -2.0, 3.0])))
    assert np.allclose(eigenangles(u), [-2.0, 0.5, 3.0], atol=1e-12)


@given(st.floats(-1e3, 1e3, allow_nan=False))
def test_wrap_angles_range(x):
    w = wrap_angles(x)
    assert -PI <= w < PI
    assert np.isclose(np.exp(1j * w), np.exp(1j * x), atol=1e-9)


# -- spacings -------------------------------------------------------------------


@pytest.mark.parametrize("m", [1, 2, 7, 30])
def test_picket_fence(m):
    angles = -PI + 2 * PI * np.arange(m) / m
    assert np.allclose(normalized_spacings(angles), 1.0, atol=1e-12)


def test_three_angle_example():
    s = normalized_spacings([-PI / 2, 0.0, PI / 2])
    assert np.allclose(s, [0.75, 0.75, 1.5], atol=1e-15)
    assert s.sum() == pytest.approx(3.0, abs=1e-12)


def test_degenerate_spectrum():
    assert np.array_equal(normalized_spacings([0.0, 0.0, 0.0]), [0.0, 0.0, 3.0])


@pytest.mark.parametrize("bad", [[0.5, 0.1], [PI], [-4.0, 0.0]])
def test_invalid_angle_lists(bad):
    with pytest.raises(ValueError):
        normalized_spacings(bad)


def test_stacked_input():
    angles = np.array([[-PI / 2, 0.0, PI / 2], [0.0, 0.0, 0.0]])
    s = normalized_spacings(angles)
    assert s.shape == (2, 3)
    assert np.allclose(s[1], [0, 0, 3])


@given(angle_lists)
def test_sum_rule(angles):
    s = normalized_spacings(angles)
    m = len(angles)
    assert (s >= 0).all()
    assert abs(s.sum() - m) <= 1e-9 * m


@given(angle_lists, st.floats(-10, 10, allow_nan=False))
def test_rotation_preserves_spacing_multiset(angles, phi):
    s = normalized_spacings(angles)
    s_rot = normalized_spacings(np.sort(wrap_angles(angles + phi)))
    m = len(angles)
    assert np.allclose(np.sort(s), np.sort(s_rot), atol=1e-9)
    assert abs(s_rot.sum() - m) <= 1e-9 * m


@given(angle_lists.filter(lambda a: len(a) >= 2))
def test_lazy_identity(angles):
    s = normalized_spacings(angles)
    m = len(s)
    assert abs((m - 1) * lazy_mean(s) + s[-1] - m) <= 1e-12 * m


def test_lazy_mean_examples():
    assert lazy_mean([1.0, 1.0, 1.0]) == 1.0
    s = np.full(14, (14 - 1.18) / 13)
    s[-1] = 1.18
    assert lazy_mean(s) == pytest.approx(0.986154, abs=1e-6)
    with pytest.raises(ValueError):
        lazy_mean([1.0])


# -- gap selection ----------------------------------------------------------------


class FixedIndices:
    def __init__(self, seq):
        self.seq = iter(seq)

    def integers(self, high):
        return next(self.seq)


def test_uniform_index_selection():
    assert select_gap_uniform_index([1.0, 1.0, 1.0], RandomStream((0, 1))) == 1.0
    picks = [select_gap_uniform_index([0.5, 1.5], FixedIndices([j])) for j in (0, 1)]
    assert np.mean(picks) == 1.0


def test_uniform_index_selection_is_unbiased_per_matrix():
    s = normalized_spacings(eigenangles(sample_haar_unitary(6, RandomStream((2, 2)))))
    rng = RandomStream((3, 3))
    draws = np.array([select_gap_uniform_index(s, rng) for _ in range(60_000)])
    se = draws.std() / np.sqrt(draws.size)
    assert abs(draws.mean() - 1.0) < 4 * se


def test_point_at_minus_pi_hits_wrap_gap():
    angles = np.array([-2.5, -0.3, 1.1, 2.9])
    s = normalized_spacings(angles)
    assert select_gap_containing_point(angles, -PI) == s[-1]
    assert select_gap_containing_point(angles, 3.0) == s[-1]


def test_point_selection_examples():
    fence = -PI + 2 * PI * np.arange(9) / 9
    pts = np.linspace(-PI, PI, 50, endpoint=False)
    assert np.allclose(select_gap_containing_point(fence, pts), 1.0, atol=1e-12)
    assert select_gap_containing_point([-PI / 2, 0.0, PI / 2], 0.1) == pytest.approx(0.75)


def test_point_on_eigenangle_takes_gap_to_its_right():
    angles = np.array([-PI / 2, 0.0, PI / 2])
    assert gap_index_containing(angles, 0.0) == 1
    assert gap_index_containing(angles, PI / 2) == 2
    # repeated angles: the gap starting at the last copy has positive length
    assert gap_index_containing(np.array([0.0, 0.0, 1.0]), 0.0) == 1


def test_point_selection_validates_input():
    # a single angle still has the full-circle wrap gap
    assert select_gap_containing_point(np.zeros(1), 0.0) == 1.0
    with pytest.raises(ValueError):
        select_gap_containing_point([0.0, 1.0], PI)


def test_size_biased_examples():
    assert size_biased_mean([1.0, 1.0, 1.0, 1.0]) == 1.0
    assert size_biased_mean([0.5, 1.5]) == 1.25
    assert size_biased_mean([0.75, 0.75, 1.5]) == pytest.approx(9 / 8, abs=1e-15)
    assert enumerate_size_biased([-PI / 2, PI / 2]) == pytest.approx(1.0)


@settings(deadline=None)
@given(angle_lists)
def test_size_biased_mean_equals_enumeration(angles):
    assert size_biased_mean(normalized_spacings(angles)) == pytest.approx(
        enumerate_size_biased(angles), abs=1e-12
    )


def test_size_biased_mean_is_the_point_selection_average():
    for i in range(3):
        angles = eigenangles(sample_haar_unitary(12, RandomStream.for_matrix(4, 12, i)))
        exact = size_biased_mean(normalized_spacings(angles))
        assert exact == pytest.approx(enumerate_size_biased(angles), abs=1e-12)
        # quadrature over the circle
        assert midpoint_point_average(angles) == pytest.approx(exact, abs=1e-3)
        # Monte Carlo
        pts = wrap_angles(-PI + 2 * PI * np.random.default_rng(i).random(100_000))
        draws = select_gap_containing_point(angles, pts)
        se = draws.std(ddof=1) / np.sqrt(draws.size)
        assert abs(draws.mean() - exact) < 4 * se
