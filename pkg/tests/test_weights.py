from __future__ import annotations

import math
import pickle
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opazeros.errors import ConfigError, WeightRangeError
from opazeros.weights import (
    DivergenceVerdict,
    WeightModel,
    check_admissibility,
    partial_sum,
    weight_at,
)


@pytest.mark.parametrize("alpha, k, expected", [(0, 7, 1.0), (1, 4, 5.0), (-1, 3, 0.25)])
def test_weight_at_examples(alpha, k, expected):
    assert weight_at(WeightModel.dirichlet(alpha), k) == expected


def test_partial_sum_examples():
    assert partial_sum(WeightModel.dirichlet(0), 9) == 10.0
    assert partial_sum(WeightModel.dirichlet(-1), 2) == 6.0
    exact = sum(Fraction(1, k + 1) for k in range(4))
    assert exact == Fraction(25, 12)
    assert partial_sum(WeightModel.dirichlet(1), 3) == pytest.approx(float(exact), rel=1e-15)


def test_omega_zero_is_one_and_positive():
    for alpha in (-2.5, -1, 0, 0.5, 1, 3):
        w = WeightModel.dirichlet(alpha)
        assert w.weight_at(0) == 1.0
        assert np.all(w.weights(500) > 0)


def test_dirichlet_values_full_precision():
    w = WeightModel.dirichlet(0.37)
    ks = np.arange(0, 3000, 7)
    with mpmath.workprec(200):
        for k in ks:
            exact = mpmath.power(k + 1, mpmath.mpf(0.37))
            got = w.weight_at(int(k))
            assert abs(got - float(exact)) <= 2 * np.spacing(float(exact))


def test_table_out_of_range_names_length():
    w = WeightModel.table([1.0, 2.0, 3.0])
    assert w.weight_at(2) == 3.0
    with pytest.raises(WeightRangeError, match="length >= 6") as info:
        w.weight_at(5)
    assert info.value.required_length == 6
    with pytest.raises(WeightRangeError):
        w.partial_sum(3)


def test_repeated_calls_bit_identical():
    w = WeightModel.dirichlet(0.73)
    first = [w.weight_at(k) for k in range(0, 5000, 13)]
    w.weights(20000)
    assert first == [w.weight_at(k) for k in range(0, 5000, 13)]


def test_concurrent_materialization_is_idempotent():
    reference = WeightModel.dirichlet(1.3).partial_sums(9000).copy()
    shared = WeightModel.dirichlet(1.3)
    order = [9000, 17, 4000, 1025, 8191, 3, 6000, 2048] * 4
    with ThreadPoolExecutor(max_workers=8) as pool:
        list(pool.map(shared.partial_sum, order))
    assert np.array_equal(shared.partial_sums(9000), reference)


def test_pickle_roundtrip():
    w = WeightModel.dirichlet(-0.5)
    w.weights(100)
    clone = pickle.loads(pickle.dumps(w))
    assert clone == w
    assert clone.partial_sum(2000) == w.partial_sum(2000)


def test_hardy_partial_sums_exact():
    sums = WeightModel.dirichlet(0).partial_sums(5000)
    assert np.array_equal(sums, np.arange(1, 5002, dtype=float))


@given(st.floats(-3, 3, allow_nan=False), st.integers(0, 3000))
@settings(max_examples=60, deadline=None)
def test_partial_sum_increments(alpha, n):
    w = WeightModel.dirichlet(alpha)
    step = w.partial_sum(n + 1) - w.partial_sum(n)
    assert step > 0
    assert step == pytest.approx(1 / w.weight_at(n + 1), rel=1e-9, abs=1e-12 * w.partial_sum(n))


@given(st.integers(0, 400))
@settings(max_examples=40, deadline=None)
def test_partial_sum_matches_direct_fraction_sum(n):
    w = WeightModel.dirichlet(-1)
    assert w.partial_sum(n) == float(sum(Fraction(k + 1) for k in range(n + 1)))


def test_partial_sum_compensated_against_mpmath():
    w = WeightModel.dirichlet(1)
    n = 100_000
    with mpmath.workprec(120):
        exact = mpmath.harmonic(n + 1)
    assert abs(w.partial_sum(n) - float(exact)) <= 4 * np.spacing(float(exact))


def test_admissibility_hardy():
    report = check_admissibility(WeightModel.dirichlet(0), 64)
    assert report.normalized and report.monotone
    assert report.divergence_verdict is DivergenceVerdict.DIVERGES
    assert report.admissible is True
    assert report.hard_failures == []


def test_admissibility_convergent_series():
    report = check_admissibility(WeightModel.dirichlet(1.5), 100)
    assert report.divergence_verdict is DivergenceVerdict.CONVERGES
    assert report.admissible is False


@given(st.floats(-4, 4, allow_nan=False))
@settings(max_examples=50, deadline=None)
def test_dirichlet_verdict_is_analytic(alpha):
    verdict = check_admissibility(WeightModel.dirichlet(alpha), 16).divergence_verdict
    expected = DivergenceVerdict.DIVERGES if alpha <= 1 else DivergenceVerdict.CONVERGES
    assert verdict is expected


def test_admissibility_geometric_table():
    w = WeightModel.table([2.0 ** k for k in range(80)])
    report = check_admissibility(w, 64)
    for n, ratio in report.ratio_diagnostic:
        assert ratio == 2.0 ** math.isqrt(n)
    assert report.ratio_trend_ok is False
    assert report.divergence_verdict is DivergenceVerdict.INCONCLUSIVE
    assert report.hard_failures == []


def test_admissibility_hard_failures():
    report = check_admissibility(WeightModel.table([2.0] + [1.0] * 40), 32)
    assert not report.normalized
    assert report.admissible is False
    zigzag = check_admissibility(WeightModel.table([1.0, 2.0, 1.5] * 10), 20)
    assert not zigzag.monotone
    assert any("monotone" in msg for msg in zigzag.hard_failures)


def test_admissibility_growth_diagnostic():
    report = check_admissibility(WeightModel.dirichlet(2), 256, epsilon=0.5)
    n, sup_ratio, scaled = report.growth_diagnostic[-1]
    assert n == 256
    assert sup_ratio == pytest.approx(257.0 ** 2)
    assert scaled == pytest.approx(257.0 ** 2 / 256 ** 1.5)
    with pytest.raises(ValueError):
        check_admissibility(WeightModel.dirichlet(0), 15)


def test_from_spec():
    assert WeightModel.from_spec({"kind": "dirichlet", "alpha": 1}) == WeightModel.dirichlet(1)
    table = WeightModel.from_spec({"kind": "table", "values": [1, 2, 3]})
    assert table.to_spec() == {"kind": "table", "values": [1.0, 2.0, 3.0]}
    with pytest.raises(ConfigError, match="weight.beta"):
        WeightModel.from_spec({"kind": "dirichlet", "alpha": 1, "beta": 2})
    with pytest.raises(ConfigError, match="weight.kind"):
        WeightModel.from_spec({"kind": "sobolev"})
    with pytest.raises(ConfigError, match="weight.values"):
        WeightModel.from_spec({"kind": "table", "values": [1, -2]})
