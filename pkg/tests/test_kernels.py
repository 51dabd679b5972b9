from __future__ import annotations

import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opazeros.errors import DomainError
from opazeros.kernels import assemble_gram, kernel, solve_gram, tail_factor
from opazeros.precision import working_precision
from opazeros.target import TargetPolynomial
from opazeros.weights import WeightModel

alphas = st.sampled_from([-1.0, 0.0, 0.5, 1.0, 2.0])


def disk_points(max_radius=1.0):
    return st.builds(
        lambda r, t: r * cmath.exp(1j * t),
        st.floats(0, max_radius), st.floats(-math.pi, math.pi),
    )


def brute_kernel(w, n, z, b):
    base = complex(b).conjugate() * complex(z)
    return sum(base ** k / w.weight_at(k) for k in range(n + 1))


def test_kernel_examples():
    for alpha in (-1, 0, 1):
        assert kernel(WeightModel.dirichlet(alpha), 5, 0.3 - 0.8j, 0) == 1
    assert kernel(WeightModel.dirichlet(0), 9, 1, 1) == 10
    assert kernel(WeightModel.dirichlet(0), 3, 1, -1) == 0


@given(alphas, st.integers(0, 300), disk_points(1.5), disk_points(1.5))
@settings(max_examples=80, deadline=None)
def test_kernel_hermitian(alpha, n, z, b):
    w = WeightModel.dirichlet(alpha)
    a = kernel(w, n, z, b)
    c = kernel(w, n, b, z)
    assert abs(a - c.conjugate()) <= 1e-12 * max(1.0, abs(a))


@given(alphas, st.integers(0, 400), disk_points(), disk_points())
@settings(max_examples=80, deadline=None)
def test_kernel_bounded_by_partial_sum(alpha, n, z, b):
    w = WeightModel.dirichlet(alpha)
    assert abs(kernel(w, n, z, b)) <= w.partial_sum(n) * (1 + 1e-12)


@given(alphas, st.integers(0, 120), disk_points(1.3), disk_points(1.3))
@settings(max_examples=60, deadline=None)
def test_kernel_matches_brute_force(alpha, n, z, b):
    w = WeightModel.dirichlet(alpha)
    expected = brute_kernel(w, n, z, b)
    assert abs(kernel(w, n, z, b) - expected) <= 1e-11 * max(1.0, sum(
        abs(complex(b).conjugate() * z) ** k / w.weight_at(k) for k in range(n + 1)))


@pytest.mark.parametrize("alpha", [-1.0, 0.0, 1.0])
@pytest.mark.parametrize("z1, z2", [(1, -1j), (cmath.exp(0.3j), cmath.exp(-2j)), (0.9, -0.4j)])
def test_kernel_ratio_decreases(alpha, z1, z2):
    # |k_m(z1, z2)| / S_m oscillates in m for unimodular pairs, so compare the
    # envelope over the window [n, 1.1 n] at n = 1e2, 1e3, 1e4
    w = WeightModel.dirichlet(alpha)
    top = 11_000
    base = complex(z2).conjugate() * z1
    partial = np.cumsum(base ** np.arange(top + 1) / w.weights(top))
    ratio = np.abs(partial) / w.partial_sums(top)
    envelope = [ratio[n: n + n // 10 + 1].max() for n in (100, 1000, 10_000)]
    assert envelope[0] > envelope[1] > envelope[2]
    for n in (100, 1000, 10_000):
        assert abs(kernel(w, n, z1, z2)) / w.partial_sum(n) == pytest.approx(ratio[n], rel=1e-9)


def test_kernel_overflow_is_explicit():
    w = WeightModel.dirichlet(0)
    with pytest.raises(OverflowError):
        kernel(w, 1000, 3.0, 1.0)
    with working_precision(113):
        value = kernel(w, 1000, 3.0, 1.0)
    with mpmath.workprec(113):
        exact = (mpmath.mpf(3) ** 1001 - 1) / 2
        assert abs(value - exact) <= exact * mpmath.mpf(2) ** -100


def test_kernel_large_but_finite():
    w = WeightModel.dirichlet(1)
    value = kernel(w, 400, 2.0, 1.0)
    with mpmath.workprec(120):
        exact = mpmath.fsum(mpmath.mpf(2) ** k / (k + 1) for k in range(401))
    assert abs(value - float(exact)) <= 1e-13 * float(exact)


def test_tail_factor_exact_geometric():
    tf = tail_factor(WeightModel.dirichlet(0), 10, 2)
    assert Fraction(tf.value.real) == Fraction(2047, 2048)
    assert tf.value.imag == 0
    assert tf.limit == 1
    assert tf.deviation == 1 / 2048


def test_tail_factor_domain():
    with pytest.raises(DomainError):
        tail_factor(WeightModel.dirichlet(0), 10, 1.0)
    with pytest.raises(DomainError):
        tail_factor(WeightModel.dirichlet(0), 10, 0.5j)


def test_tail_factor_dirichlet_large_n_extended_oracle():
    w = WeightModel.dirichlet(1)
    N = 10_000
    tf = tail_factor(w, N, 2)
    with mpmath.workprec(200):
        x = mpmath.mpf(1) / 2
        # C(N, 2) = sum_k (N+1)/(N-k+1) 2^{-(k+1)}
        exact = mpmath.fsum((N + 1) * x ** (k + 1) / (N - k + 1) for k in range(N + 1))
    assert abs(tf.value - complex(exact)) <= 1e-13
    assert tf.deviation <= 0.01


@pytest.mark.parametrize("z", [2.0, 1.5 + 0.7j, -1.1, 3j])
@pytest.mark.parametrize("alpha", [-1.0, 0.0, 1.0])
def test_tail_factor_against_brute_force(z, alpha):
    w = WeightModel.dirichlet(alpha)
    for N in (0, 5, 50, 300, 1000):
        with mpmath.workprec(300):
            zz = mpmath.mpc(z)
            total = mpmath.fsum(zz ** k / w.weight_mp(k) for k in range(N + 1))
            exact = complex(total * w.weight_mp(N) / zz ** (N + 1))
        assert abs(tail_factor(w, N, z).value - exact) <= 1e-12 * abs(exact)


def test_tail_factor_deviation_trend():
    w = WeightModel.dirichlet(1)
    devs = [tail_factor(w, N, 2).deviation for N in (10, 100, 1000, 10_000)]
    assert all(a > b for a, b in zip(devs, devs[1:]))


def test_gram_single_boundary_zero():
    gram = assemble_gram(WeightModel.dirichlet(0), TargetPolynomial.from_zeros([1]), 2)
    assert gram.order == 3
    assert np.array_equal(gram.entries, np.array([[4.0 + 0j]]))


def test_gram_conjugate_pair():
    theta = 0.7
    w = WeightModel.dirichlet(1)
    f = TargetPolynomial.from_zeros([cmath.exp(1j * theta), cmath.exp(-1j * theta)])
    n = 25
    E = assemble_gram(w, f, n).entries
    S = w.partial_sum(n + 2)
    z1, z2 = f.zeros
    assert E[0, 0] == S and E[1, 1] == S
    assert abs(E[0, 1] - kernel(w, n + 2, z1, z2)) <= 1e-13 * S
    assert E[1, 0] == E[0, 1].conjugate()


def test_gram_exterior_entry():
    gram = assemble_gram(WeightModel.dirichlet(0), TargetPolynomial.from_zeros([1, 2]), 0)
    E = gram.entries
    assert E[1, 1] == pytest.approx(21.0, rel=1e-15)
    assert E[0, 0] == 3.0
    assert E[1, 0] == pytest.approx(1 + 2 + 4, rel=1e-15)
    assert gram.scaling[1] == pytest.approx(8.0)


@given(st.integers(0, 500), st.sampled_from([-1.0, 0.0, 1.0]),
       st.lists(st.tuples(st.floats(1.05, 4.0), st.floats(-math.pi, math.pi)),
                min_size=0, max_size=3))
@settings(max_examples=40, deadline=None)
def test_gram_invariants(n, alpha, exterior):
    zeros = [1.0] + [r * cmath.exp(1j * t) for r, t in exterior]
    try:
        f = TargetPolynomial.from_zeros(zeros)
    except DomainError:
        return
    w = WeightModel.dirichlet(alpha)
    gram = assemble_gram(w, f, n)
    M = gram.scaled
    S = w.partial_sum(gram.order)
    assert np.array_equal(M, M.conj().T)
    assert np.all(np.isfinite(M))
    assert np.max(np.abs(M)) <= S * (1 + 1e-12)
    assert M[0, 0] == S


def test_gram_positive_definite_and_log_det():
    w = WeightModel.dirichlet(0)
    f = TargetPolynomial.from_zeros([1, -1, 2j])
    gram = assemble_gram(w, f, 6)
    assert np.all(np.linalg.eigvalsh(gram.scaled) > 0)
    direct = math.log(np.linalg.det(gram.entries).real)
    assert gram.log_det() == pytest.approx(direct, rel=1e-12)


def test_gram_extended_precision_matches():
    w = WeightModel.dirichlet(1)
    f = TargetPolynomial.from_zeros([1, 1.5 * cmath.exp(0.4j)])
    base = assemble_gram(w, f, 40)
    a53 = solve_gram(base)
    with working_precision(113):
        ext = assemble_gram(w, f, 40)
        a113 = solve_gram(ext)
    assert ext.scaled_mp is not None
    assert np.max(np.abs(ext.scaled - base.scaled)) <= 1e-14 * np.max(np.abs(base.scaled))
    assert np.max(np.abs(a113 - a53)) <= 1e-10 * np.max(np.abs(a113))


def test_gram_entries_overflow():
    gram = assemble_gram(WeightModel.dirichlet(0), TargetPolynomial.from_zeros([1, 4]), 400)
    with pytest.raises(OverflowError):
        gram.entries
    assert np.isfinite(gram.log_det())
    assert gram.to_dict()["order"] == 402
