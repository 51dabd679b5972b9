from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from opazeros.errors import DomainError, RootFindingError
from opazeros.opa import opa_kernel_route
from opazeros.target import TargetPolynomial
from opazeros.weights import WeightModel
from opazeros.zeros import (
    EmpiricalMeasure,
    companion_roots,
    discrepancy,
    equidistribution,
    find_roots,
    pairing_distance,
    radial_report,
    trim_leading,
    weyl_moments,
)

HARDY = WeightModel.dirichlet(0)
Z1 = TargetPolynomial.from_zeros([1])


def roots_of_unity(N):
    return np.exp(2j * np.pi * np.arange(N) / N)


def measure(points):
    return EmpiricalMeasure(np.asarray(points, dtype=complex))


def arc_oracle(angles):
    """Arc discrepancy by enumerating every arc with endpoints at data angles."""
    x = np.sort(np.asarray(angles, dtype=float) / (2 * math.pi))
    N = x.size
    best = 0.0
    for a in x:
        offsets = np.mod(x - a, 1.0)
        for b in x:
            length = (b - a) % 1.0
            closed = np.count_nonzero(offsets <= length) / N
            best = max(best, closed - length)
            if length == 0.0:
                open_count = np.count_nonzero(offsets > 0) / N
                best = max(best, 1.0 - open_count)
            else:
                open_count = np.count_nonzero((offsets > 0) & (offsets < length)) / N
                best = max(best, length - open_count)
    return best


def from_roots(roots):
    """Ascending coefficients of prod (z - r)."""
    return np.polynomial.polynomial.polyfromroots(roots)


# find_roots


def test_roots_of_unity_quartic():
    m = find_roots([-1, 0, 0, 0, 1])
    assert m.N == 4
    assert pairing_distance(m.points, [1, 1j, -1, -1j]) <= 1e-14


def test_single_zero_residual_n2():
    sol = opa_kernel_route(HARDY, Z1, 2)
    assert np.allclose(sol.residual, [0.25] * 4, atol=1e-15)
    m = find_roots(sol.residual)
    assert pairing_distance(m.points, [-1, 1j, -1j]) <= 1e-14


def test_quadratic_real_roots():
    m = find_roots([6, -5, 1])
    assert pairing_distance(m.points, [2, 3]) <= 1e-14


def test_degree_zero_is_domain_error():
    with pytest.raises(DomainError):
        find_roots([3.0])
    with pytest.raises(DomainError):
        find_roots([2.0, 1e-20])


def test_trim_reported():
    m = find_roots([-1, 0, 1, 1e-17, 0.0])
    assert m.trimmed == 2
    assert m.N == 2
    c, count = trim_leading([1, 2, 0])
    assert count == 1 and c.tolist() == [1, 2]


def test_zero_low_coefficients_give_exact_zeros():
    m = find_roots([0, 0, -1, 0, 1])
    assert np.count_nonzero(m.points == 0) == 2
    assert pairing_distance(m.points, [0, 0, 1, -1]) <= 1e-14


def test_non_convergence_reports_worst_residual():
    with pytest.raises(RootFindingError) as info:
        find_roots(from_roots(roots_of_unity(40) * 1.3), max_iter=1)
    assert info.value.worst_residual > 1e-10


def test_backward_error_invariant():
    rng = np.random.default_rng(7)
    c = rng.normal(size=120) + 1j * rng.normal(size=120)
    m = find_roots(c)
    assert m.N == 119
    z = m.points
    bound = np.polynomial.polynomial.polyval(np.abs(z), np.abs(c))
    assert np.all(np.abs(np.polynomial.polynomial.polyval(z, c)) <= 1e-10 * bound)


@given(st.lists(st.tuples(st.floats(0.2, 3.0), st.floats(-math.pi, math.pi)),
                min_size=1, max_size=50))
@settings(max_examples=60, deadline=None)
def test_companion_cross_check(polar):
    roots = np.array([r * cmath.exp(1j * t) for r, t in polar])
    gaps = np.abs(roots[:, None] - roots[None, :]) + 10 * np.eye(roots.size)
    assume(gaps.min() >= 0.05)
    c = from_roots(roots)
    m = find_roots(c)
    assert pairing_distance(m.points, companion_roots(c)) <= 1e-6


@given(st.lists(st.tuples(st.floats(0.3, 2.5), st.floats(-math.pi, math.pi)),
                min_size=1, max_size=30),
       st.floats(1e-3, 1e3), st.floats(-math.pi, math.pi))
@settings(max_examples=60, deadline=None)
def test_scale_invariance(polar, scale, phase):
    roots = np.array([r * cmath.exp(1j * t) for r, t in polar])
    gaps = np.abs(roots[:, None] - roots[None, :]) + 10 * np.eye(roots.size)
    assume(gaps.min() >= 0.05)
    c = from_roots(roots)
    a = find_roots(c).points
    b = find_roots(c * scale * cmath.exp(1j * phase)).points
    assert pairing_distance(a, b) <= 1e-8


@pytest.mark.parametrize("n", [10, 50, 200])
def test_single_zero_residual_roots_of_unity(n):
    sol = opa_kernel_route(HARDY, Z1, n)
    m = find_roots(sol.residual)
    expected = roots_of_unity(n + 2)[1:]
    assert m.N == n + 1
    assert pairing_distance(m.points, expected) <= 1e-8


# discrepancy


def test_discrepancy_all_at_zero():
    for N in (1, 2, 7, 100):
        value = discrepancy(measure(np.ones(N)))
        assert 1 - 1 / N <= value <= 1


@pytest.mark.parametrize("N", [8, 64, 512])
def test_discrepancy_roots_of_unity(N):
    assert discrepancy(measure(roots_of_unity(N))) <= 1 / N + 1e-12


@pytest.mark.parametrize("n", [10, 50, 200])
def test_discrepancy_roots_of_unity_minus_one(n):
    pts = roots_of_unity(n + 2)[1:]
    value = discrepancy(measure(pts))
    assert value <= 4 / (n + 2)
    assert value == pytest.approx(arc_oracle(np.mod(np.angle(pts), 2 * math.pi)), abs=1e-12)


def test_discrepancy_ignores_radii():
    pts = roots_of_unity(16)
    scaled = pts * np.linspace(0.5, 3, 16)
    assert discrepancy(measure(scaled)) == discrepancy(measure(pts))


def test_discrepancy_needs_a_point():
    with pytest.raises(DomainError):
        discrepancy(measure([]))


@given(st.lists(st.integers(0, 359), min_size=1, max_size=40),
       st.lists(st.floats(0, 2 * math.pi, exclude_max=True), max_size=40))
@settings(max_examples=120, deadline=None)
def test_discrepancy_matches_arc_enumeration(degrees, free):
    # integer degrees force repeated angles; the free floats cover the generic case
    angles = [math.radians(d) for d in degrees] + list(free)
    pts = np.exp(1j * np.array(angles))
    m = measure(pts)
    value = discrepancy(m)
    assert 0 <= value <= 1
    assert value == pytest.approx(arc_oracle(m.angles), abs=1e-12)


# Weyl moments and radial report


def test_weyl_roots_of_unity():
    N = 24
    moments = weyl_moments(measure(roots_of_unity(N)), 10)
    assert len(moments) == 10
    assert max(moments) <= 1e-12


def test_weyl_single_point():
    assert weyl_moments(measure([1]), 7) == [1.0] * 7


def test_weyl_three_points():
    assert weyl_moments(measure([-1, 1j, -1j]), 1)[0] == pytest.approx(1 / 3, abs=1e-15)


def test_weyl_requires_positive_order():
    with pytest.raises(ValueError):
        weyl_moments(measure([1]), 0)


@given(st.lists(st.tuples(st.floats(0.1, 2.0), st.floats(-math.pi, math.pi)),
                min_size=1, max_size=30), st.integers(1, 12))
@settings(max_examples=60, deadline=None)
def test_weyl_bounds(polar, M):
    pts = np.array([r * cmath.exp(1j * t) for r, t in polar])
    moments = weyl_moments(measure(pts), M)
    top = np.max(np.abs(pts))
    for m, value in enumerate(moments, start=1):
        assert 0 <= value <= top ** m * (1 + 1e-12)


def test_radial_examples():
    assert radial_report(measure(roots_of_unity(9)), 0.1)[1] == 1.0
    assert radial_report(measure(roots_of_unity(9)), 0.1)[0] <= 1e-15
    assert radial_report(measure([2, 3]), 0.5) == (2.0, 0.0)
    with pytest.raises(ValueError):
        radial_report(measure([1]), 1.0)


def test_radial_single_zero_residual_n18():
    sol = opa_kernel_route(HARDY, Z1, 18)
    spread, shell = radial_report(find_roots(sol.residual), 0.01)
    assert spread <= 1e-12
    assert shell == 1.0


def test_equidistribution_report():
    report = equidistribution(measure(roots_of_unity(32)))
    assert report.discrepancy <= 1 / 32 + 1e-12
    assert report.weyl_max <= 1e-12
    assert report.radial_max <= 1e-15 and report.shell_fraction == 1.0
    d = report.to_dict()
    assert set(d) == {"discrepancy", "weyl", "radial_max", "shell_fraction", "shell_eps"}
    assert len(d["weyl"]) == 10
