import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import zeta

from conftest import random_series
from dirichlet_flows.acceptance import brute_convolve
from dirichlet_flows.dirichlet_core import (
    LambdaSet,
    MultiIndex,
    TruncatedDirichletSeries as T,
    bohr_lift_index,
    bohr_lift_values,
    convolve,
    differentiate,
    evaluate,
    exp_series,
    h2_norm,
    helson_lhs,
    hinf_norm_estimate,
    hp_norm_mc,
    lambda_closure_check,
)

seeds = st.integers(0, 2**32 - 1)


# ---------------------------------------------------------------- container


def test_rejects_bad_coefficients():
    with pytest.raises(ValueError):
        T([])
    with pytest.raises(ValueError):
        T([1.0, np.nan])
    with pytest.raises(ValueError):
        T([np.inf])


def test_immutable():
    f = T([1, 2, 3])
    with pytest.raises(ValueError):
        f.coeffs[0] = 5
    src = np.array([1.0, 2.0])
    g = T(src)
    src[0] = 9
    assert g.coeff(1) == 1


def test_resized_and_arithmetic():
    f = T.from_dict({1: 2, 3: 1j}, 4)
    assert f.resized(2).coeffs.tolist() == [2, 0]
    assert f.resized(6).coeffs.tolist() == [2, 0, 1j, 0, 0, 0]
    assert (f + 1).coeff(1) == 3
    assert (1 - f).coeff(3) == -1j
    assert (f * 2).coeff(3) == 2j
    assert (f / 2).coeff(1) == 1
    g = T.from_dict({2: 1}, 4)
    assert (f * g).coeffs.tolist() == convolve(f, g).coeffs.tolist()


# ---------------------------------------------------------------- evaluate


def test_evaluate_examples():
    assert evaluate(T.from_dict({1: 1}, 4), 3 + 4j) == 1
    assert evaluate(T.from_dict({2: 1}, 4), 1.0) == pytest.approx(0.5, abs=1e-15)
    zeta_n = T(np.ones(1000))
    v = evaluate(zeta_n, 2.0)
    assert v.real == pytest.approx(1.64393, abs=1e-5)
    assert 0 < math.pi**2 / 6 - v.real < 1e-3


def test_evaluate_vectorised_agrees_with_scalar(rng):
    f = random_series(rng, 50)
    s = np.array([1 + 1j, 0.3 - 2j, 5.0])
    vec = evaluate(f, s)
    for k, sk in enumerate(s):
        direct = sum(f.coeff(n) * n ** (-sk) for n in range(1, 51))
        assert abs(vec[k] - direct) < 1e-12 * max(1, abs(direct))
        assert abs(evaluate(f, sk) - vec[k]) < 1e-14


# ---------------------------------------------------------------- convolution


def test_convolve_examples():
    six = convolve(T.from_dict({2: 1}, 10), T.from_dict({3: 1}, 10))
    assert six.support().tolist() == [6] and six.coeff(6) == 1
    f = T([1, 2, 3, 4, 5])
    assert convolve(f, T.unit(5)).coeffs.tolist() == f.coeffs.tolist()
    z = T(np.ones(200))
    assert convolve(z, z).coeff(12) == 6


def test_convolve_truncation_is_min():
    assert convolve(T(np.ones(10)), T(np.ones(7))).truncation == 7


@given(seeds, st.integers(1, 120), st.sampled_from([1.0, 0.3, 0.05]))
def test_convolve_matches_double_loop(seed, N, density):
    rng = np.random.default_rng(seed)
    f, g = random_series(rng, N, density), random_series(rng, N, density)
    want = brute_convolve(f.coeffs, g.coeffs)
    got = convolve(f, g).coeffs
    assert np.max(np.abs(got - want)) <= 1e-12 * max(1.0, np.max(np.abs(want)))


@given(seeds, st.integers(1, 80))
def test_convolve_commutative_associative(seed, N):
    rng = np.random.default_rng(seed)
    f, g, h = (random_series(rng, N, 0.5) for _ in range(3))
    fg = convolve(f, g)
    assert np.allclose(fg.coeffs, convolve(g, f).coeffs, rtol=0, atol=1e-12 * max(1, np.abs(fg.coeffs).max()))
    left = convolve(fg, h).coeffs
    right = convolve(f, convolve(g, h)).coeffs
    assert np.max(np.abs(left - right)) <= 1e-12 * max(1.0, np.max(np.abs(left)))


@given(seeds)
def test_lambda_algebra_closed(seed):
    rng = np.random.default_rng(seed)
    L = LambdaSet.generated_by([2, 3], 100)
    mask = np.array([n in L for n in range(1, 101)])
    f = T(random_series(rng, 100).coeffs * mask)
    g = T(random_series(rng, 100).coeffs * mask)
    assert lambda_closure_check(convolve(f, g), L)
    assert lambda_closure_check(exp_series(f), L)


@given(seeds, st.integers(2, 6))
def test_shift_by_monomial_is_isometric(seed, n):
    rng = np.random.default_rng(seed)
    N = 96
    f = T(np.concatenate([random_series(rng, N // n).coeffs, np.zeros(N - N // n)]))
    c = 0.7 - 0.2j
    out = convolve(f, T.monomial(n, N, c))
    assert h2_norm(out) == pytest.approx(h2_norm(f) * abs(c), rel=1e-12)


# ---------------------------------------------------------------- derivative, exp


def test_differentiate_examples(rng):
    d = differentiate(T.from_dict({2: 1}, 4), 1)
    assert d.coeff(2) == pytest.approx(-math.log(2))
    f = random_series(rng, 20)
    assert differentiate(f, 0).coeffs.tolist() == f.coeffs.tolist()
    d2 = differentiate(T.from_dict({2: 1, 4: 1}, 4), 2)
    assert d2.coeff(2) == pytest.approx(math.log(2) ** 2)
    assert d2.coeff(4) == pytest.approx(math.log(4) ** 2)
    with pytest.raises(ValueError):
        differentiate(f, -1)


def test_differentiate_matches_finite_difference(rng):
    f = random_series(rng, 30)
    s, h = 1.3 + 0.4j, 1e-5
    fd = (evaluate(f, s + h) - evaluate(f, s - h)) / (2 * h)
    assert abs(evaluate(differentiate(f), s) - fd) < 1e-8


def test_exp_series_examples():
    assert exp_series(T.zeros(8)).coeffs.tolist() == T.unit(8).coeffs.tolist()
    alpha = 0.3 + 0.1j
    e = exp_series(T.from_dict({2: alpha}, 8))
    want = {1: 1, 2: alpha, 4: alpha**2 / 2, 8: alpha**3 / 6}
    for n in range(1, 9):
        assert abs(e.coeff(n) - want.get(n, 0)) < 1e-15


def test_exp_series_constant_term():
    e = exp_series(T.from_dict({1: 0.5 + 1j, 3: 1}, 9))
    assert e.coeff(1) == pytest.approx(np.exp(0.5 + 1j))
    assert e.coeff(9) == pytest.approx(np.exp(0.5 + 1j) / 2)


@given(seeds)
def test_exp_is_a_homomorphism(seed):
    rng = np.random.default_rng(seed)
    f, g = random_series(rng, 64), random_series(rng, 64)
    lhs = exp_series(f + g).coeffs
    rhs = convolve(exp_series(f), exp_series(g)).coeffs
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(1.0, np.max(np.abs(lhs)))


def test_exp_series_pointwise(rng):
    # at Re s = 8 the dropped tail is below 1e-14
    f = random_series(rng, 64)
    s = 8 + 3j
    assert abs(evaluate(exp_series(f), s) - np.exp(evaluate(f, s))) < 1e-12


# ---------------------------------------------------------------- Bohr lift, norms


def test_bohr_lift_index_examples():
    assert bohr_lift_index(1) == MultiIndex(())
    assert bohr_lift_index(12).exponents == (2, 1)
    k = bohr_lift_index(97).exponents
    assert len(k) == 25 and k[-1] == 1 and sum(k) == 1
    assert MultiIndex((0, 1, 0, 0)).exponents == (0, 1)
    with pytest.raises(ValueError):
        bohr_lift_index(0)


@given(st.integers(1, 10**6))
def test_multi_index_roundtrip(n):
    assert bohr_lift_index(n).value == n


def test_bohr_lift_values_match_evaluation_on_vertical_line(rng):
    # theta_j = -t ln p_j / 2 pi  turns the lifted polynomial into f(i t)
    f = random_series(rng, 30)
    from dirichlet_flows.numtheory import primes_upto

    ps = primes_upto(30)
    for t in (0.0, 1.7, -12.5):
        theta = np.mod(-t * np.log(ps) / (2 * np.pi), 1.0)[None, :]
        assert abs(bohr_lift_values(f, theta)[0] - evaluate(f, 1j * t)) < 1e-11


def test_h2_norm_examples():
    assert h2_norm(T.monomial(7, 10)) == 1
    assert h2_norm(T.zeros(5)) == 0
    assert h2_norm(T.from_dict({2: 3, 3: 4}, 5)) == 5


def test_hp_norm_mc_examples():
    m = hp_norm_mc(T.monomial(6, 10), 1.5, 2000, seed=1)
    assert m.estimate == pytest.approx(1.0, abs=1e-12)
    assert hp_norm_mc(T.zeros(4), 2, 10, seed=0).estimate == 0
    r = hp_norm_mc(T.from_dict({1: 1, 2: 1}, 4), 2, 20000, seed=7)
    assert abs(r.estimate - math.sqrt(2)) <= 3 * r.stderr
    with pytest.raises(ValueError):
        hp_norm_mc(T.unit(4), 2, 0, seed=0)
    with pytest.raises(ValueError):
        hp_norm_mc(T.unit(4), 0.5, 10, seed=0)


def test_hp_norm_mc_is_reproducible(rng):
    f = random_series(rng, 20)
    assert hp_norm_mc(f, 1, 5000, seed=3) == hp_norm_mc(f, 1, 5000, seed=3)
    assert hp_norm_mc(f, 1, 5000, seed=3) != hp_norm_mc(f, 1, 5000, seed=4)


@given(seeds)
def test_hp_norm_mc_p2_agrees_with_h2(seed):
    rng = np.random.default_rng(seed)
    f = random_series(rng, 24, 0.5)
    if f.is_zero():
        return
    r = hp_norm_mc(f, 2, 20000, seed=seed)
    assert abs(r.estimate - h2_norm(f)) <= 4 * r.stderr + 1e-12


def test_helson_examples():
    assert helson_lhs(T.unit(4)) == 1
    assert helson_lhs(T.from_dict({6: 2}, 6)) == pytest.approx(1.0)
    assert helson_lhs(T.from_dict({2: 1, 3: 1}, 4)) == pytest.approx(1.0)


@given(seeds)
def test_helson_inequality(seed):
    rng = np.random.default_rng(seed)
    f = random_series(rng, 16, 0.5)
    if f.is_zero():
        return
    r = hp_norm_mc(f, 1, 20000, seed=seed)
    assert helson_lhs(f) <= r.estimate + 4 * r.stderr


def test_hinf_norm_estimate_examples():
    assert hinf_norm_estimate(T.from_dict({2: 1}, 4), 1.0) == pytest.approx(0.5)
    assert hinf_norm_estimate(T.zeros(3), 1.0) == 0
    assert hinf_norm_estimate(T.from_dict({1: 3 - 4j}, 3), 0.5) == pytest.approx(5)
    with pytest.raises(ValueError):
        hinf_norm_estimate(T.unit(3), 1.0, grid=(-1, 1, 0))
    with pytest.raises(ValueError):
        hinf_norm_estimate(T.unit(3), 0.0)


@given(st.floats(0.55, 3.0), st.integers(10, 5000))
def test_partial_zeta_sums_below_zeta(sigma, N):
    n = np.arange(1, N + 1, dtype=float)
    partial = np.sum(n ** (-2 * sigma))
    assert partial <= zeta(2 * sigma) + 1e-12
    assert np.sum(n[: N // 2] ** (-2 * sigma)) <= partial


# ---------------------------------------------------------------- Lambda sets


def test_lambda_closure_examples(rng):
    L = LambdaSet.generated_by([2], 64)
    assert lambda_closure_check(T.from_dict({2: 1, 4: 1}, 8), L)
    assert not lambda_closure_check(T.from_dict({3: 1}, 8), L)
    assert lambda_closure_check(random_series(rng, 30), LambdaSet.everything(30))


def test_lambda_set_validation():
    with pytest.raises(ValueError):
        LambdaSet((2, 4), 10)
    with pytest.raises(ValueError):
        LambdaSet((1, 2, 3), 10)  # 4 = 2*2 missing
    L = LambdaSet.generated_by([3, 5], 50)
    assert L.members == (1, 3, 5, 9, 15, 25, 27, 45)
    assert 15 in L and 2 not in L
