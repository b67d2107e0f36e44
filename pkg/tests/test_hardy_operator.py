import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import zeta

from dirichlet_flows import reference as ref
from dirichlet_flows.acceptance import random_symbol
from dirichlet_flows.dirichlet_core import TruncatedDirichletSeries as T, h2_norm
from dirichlet_flows.gh_symbol import GHSymbol, compose
from dirichlet_flows.hardy_operator import (
    WitnessError,
    assemble_matrix,
    compression_norm,
    eval_functional_norm,
    generator_unboundedness_check,
    nonunivalence_witness,
    strong_continuity_probe,
)
from dirichlet_flows.semigroup_flow import Generator, integrate_flow

seeds = st.integers(0, 2**32 - 1)


def example(N):
    return Generator(T(ref.example_generator_coeffs(N)))


def test_assemble_examples():
    assert np.array_equal(assemble_matrix(GHSymbol.identity(12), 12).entries, np.eye(12))
    alpha = 0.6
    M = assemble_matrix(GHSymbol.translation(alpha, 10), 10).entries
    assert np.allclose(M, np.diag(np.arange(1, 11, dtype=float) ** -alpha), atol=1e-15)
    # column 2 of C_{Phi_{1/2}}: 2^{-Phi} = 2^{-s-t} / (1 + y 2^{-s}), y = 1 - 2^{-t}
    t, N = 0.5, 32
    y = 1 - 2**-t
    M = assemble_matrix(GHSymbol(1, T(ref.flow_coefficients(t, N))), N).entries
    want = np.zeros(N)
    for k in range(5):
        want[2 ** (k + 1) - 1] = 2**-t * (-y) ** k
    assert np.max(np.abs(M[:, 1] - want)) < 1e-15


@settings(max_examples=15)
@given(seeds)
def test_matrix_structure(seed):
    rng = np.random.default_rng(seed)
    P = random_symbol(rng, 1, 24)
    M = assemble_matrix(P, 24).entries
    assert np.array_equal(M[:, 0], np.eye(24)[:, 0])
    n, m = np.meshgrid(np.arange(1, 25), np.arange(1, 25), indexing="ij")
    assert not np.any(M[(n % m) != 0])


@settings(max_examples=15)
@given(seeds, st.integers(1, 2), st.integers(1, 2))
def test_matrix_of_composition_is_product(seed, cp, cq):
    rng = np.random.default_rng(seed)
    N = 48
    P, Q = random_symbol(rng, cp, N), random_symbol(rng, cq, N)
    # f o (P o Q) = (f o P) o Q, so C_{P o Q} = C_Q C_P
    lhs = assemble_matrix(compose(P, Q), N).entries
    rhs = assemble_matrix(Q, N).entries @ assemble_matrix(P, N).entries
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_compression_norm_examples():
    assert compression_norm(assemble_matrix(GHSymbol.identity(16), 16)) == pytest.approx(1.0)
    assert compression_norm(assemble_matrix(GHSymbol.translation(0.8, 16), 16)) == pytest.approx(1.0)
    assert compression_norm(np.zeros((3, 3))) == 0.0


def test_compression_norm_matches_svd(rng):
    A = rng.normal(size=(20, 20)) + 1j * rng.normal(size=(20, 20))
    assert compression_norm(A) == pytest.approx(np.linalg.norm(A, 2), rel=1e-8)


def test_flow_matrices_are_contractions():
    t0 = time.perf_counter()
    states = integrate_flow(example(64), 1.0, 1e-3)
    for st_ in states[100::200]:
        M = assemble_matrix(st_.symbol, 64)
        nrm = compression_norm(M)
        assert nrm <= 1 + 1e-9
        assert nrm == pytest.approx(np.linalg.norm(M.entries, 2), abs=1e-8)
    assert time.perf_counter() - t0 < 10


def test_eval_functional_examples():
    fn = eval_functional_norm(1.0, 2.0, 10**6)
    assert fn.lower <= math.sqrt(zeta(2)) <= fn.upper
    assert fn.upper - fn.lower < 1e-5
    assert fn.estimate == fn.lower
    big = eval_functional_norm(30.0, 2.0, 1000)
    assert big.estimate == pytest.approx(1.0, abs=1e-9)
    one = eval_functional_norm(1.0, 1.0, 10**5)
    assert one.lower <= math.pi**2 / 6 <= one.upper
    with pytest.raises(ValueError):
        eval_functional_norm(0.5, 2, 10)
    with pytest.raises(ValueError):
        eval_functional_norm(1.0, 0.5, 10)


@given(st.floats(0.6, 4.0), st.floats(1.0, 6.0), st.integers(10, 20000))
def test_eval_functional_bracket_contains_zeta(sigma, p, N):
    fn = eval_functional_norm(sigma, p, N)
    true = zeta(2 * sigma) ** (1 / p)
    assert fn.lower <= true * (1 + 1e-12) and true <= fn.upper * (1 + 1e-12)


def test_strong_continuity_examples():
    G = example(32)
    assert strong_continuity_probe(G, T.unit(32), [0.1, 0.01]) == [0.0, 0.0]
    alpha = 0.9
    Gt = Generator(T.from_dict({1: alpha}, 8))
    d = strong_continuity_probe(Gt, T.monomial(2, 8), [0.5, 0.1, 0.01])
    assert np.allclose(d, [abs(2 ** (-alpha * t) - 1) for t in (0.5, 0.1, 0.01)], atol=1e-12)
    d = strong_continuity_probe(G, T.monomial(2, 32), [1e-1, 1e-2, 1e-3])
    assert d[0] > d[1] > d[2]
    assert 8 < d[1] / d[2] < 12 and 7 < d[0] / d[1] < 12
    with pytest.raises(ValueError):
        strong_continuity_probe(G, T.unit(32), [0.0])


def test_unboundedness_examples(rng):
    row = generator_unboundedness_check(T.unit(1), [2])[0]
    assert row.norm == pytest.approx(math.log(2))
    row = generator_unboundedness_check(T.from_dict({1: 1, 2: 1}, 2), [3])[0]
    assert row.norm == pytest.approx(math.log(3) * math.sqrt(2))
    H = T(rng.normal(size=12) + 1j * rng.normal(size=12))
    rows = generator_unboundedness_check(H, [2, 3, 5, 8, 100])
    for r in rows:
        assert abs(r.ratio - 1) < 1e-10
        assert r.norm_over_log == pytest.approx(h2_norm(H), rel=1e-12)
    with pytest.raises(ValueError):
        generator_unboundedness_check(H, [1])


def test_witness_examples():
    t0 = time.perf_counter()
    for x in (3.0, 10.0):
        w = nonunivalence_witness(T.from_dict({2: 1}, 8), x)
        assert abs(w.s0 - x) < 1e-10
        assert abs(w.s1 - complex(x, 2 * math.pi / ref.LN2)) < 1e-10
        assert w.separation == pytest.approx(2 * math.pi / ref.LN2, abs=1e-9)
    w = nonunivalence_witness(T.from_dict({2: 1, 3: 0.01}, 8), 6.0)
    assert w.value_gap <= 1e-8 and w.separation >= math.pi / ref.LN2
    assert time.perf_counter() - t0 < 1.0


def test_witness_normalises_constant_and_scale():
    phi = T.from_dict({1: 5 - 1j, 3: 2j, 5: 0.001}, 8)
    w = nonunivalence_witness(phi, 4.0)
    assert w.base == 3
    assert abs(phi(w.s0) - phi(w.s1)) <= 1e-8
    assert w.separation >= math.pi / math.log(3)


def test_witness_reports_rouche_failure():
    with pytest.raises(WitnessError, match="increase x"):
        nonunivalence_witness(T.from_dict({2: 1, 3: 5.0}, 8), 0.5)
    with pytest.raises(ValueError):
        nonunivalence_witness(T.unit(4), 1.0)


def test_witness_bisection_fallback():
    phi = T.from_dict({2: 1, 3: 0.3, 5: 0.2}, 8)
    full = nonunivalence_witness(phi, 3.0)
    w = nonunivalence_witness(phi, 3.0, max_newton=2)
    assert w.method == ("bisection", "bisection")
    assert abs(w.s0 - full.s0) < 1e-10 and abs(w.s1 - full.s1) < 1e-10
    assert w.value_gap <= 1e-8
