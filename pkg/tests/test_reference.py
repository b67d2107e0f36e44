"""The closed-form oracle module checked against an independent symbolic expansion."""

import cmath
import math

import numpy as np
import sympy

from dirichlet_flows import reference as ref


def _log_series_coeffs(y, K):
    z = sympy.symbols("z")
    ser = sympy.series(sympy.log(1 + y * z) / sympy.log(2), z, 0, K + 1).removeO()
    return [complex(sympy.N(ser.coeff(z, k), 30)) for k in range(1, K + 1)]


def test_flow_coefficients_match_symbolic_expansion():
    for t in (sympy.Rational(1, 4), sympy.Rational(1, 2), sympy.Integer(1)):
        y = 1 - sympy.Integer(2) ** (-t)
        c = _log_series_coeffs(y, 6)
        a = ref.flow_coefficients(float(t), 64)
        assert a[0] == float(t)
        for k in range(1, 7):
            assert abs(a[2**k - 1] - c[k - 1]) < 1e-15
        assert np.count_nonzero(a) == 7


def test_koenigs_and_inverse_coefficients():
    c = _log_series_coeffs(sympy.Integer(1), 5)
    # differentiating c_k 2^{-ks} gives -k ln2 c_k 2^{-ks}, the coefficients of 1/H
    inv = ref.inverse_generator_coeffs(32)
    for k in range(1, 6):
        assert abs(inv[2**k - 1] - (-k * math.log(2) * c[k - 1])) < 1e-14


def test_closed_forms_satisfy_abel_equation():
    for s in (1.0, 1 + 5j, 2 - 1j):
        for t in (0.3, 1.0):
            lhs = ref.koenigs_closed_form(ref.flow_closed_form(s, t))
            assert abs(lhs - ref.koenigs_closed_form(s) - t) < 1e-13


def test_closed_form_value_at_one():
    assert abs(ref.flow_closed_form(1.0, 1.0) - math.log2(5)) < 1e-15
    # the flow solves dPhi/dt = 1 + 2^{-Phi}
    s, t, e = 1.5 + 2j, 0.4, 1e-6
    d = (ref.flow_closed_form(s, t + e) - ref.flow_closed_form(s, t - e)) / (2 * e)
    assert abs(d - (1 + cmath.exp(-ref.LN2 * ref.flow_closed_form(s, t)))) < 1e-9


def test_tail_bounds_dominate_truncation_error():
    for N in (8, 32, 256):
        for s in (1.0, complex(1, math.pi / ref.LN2), 2 + 1j):
            a = ref.flow_coefficients(1.0, N)
            approx = s + sum(a[n - 1] * n ** (-s) for n in range(1, N + 1) if a[n - 1])
            assert abs(approx - ref.flow_closed_form(s, 1.0)) <= ref.flow_tail_bound(s, 1.0, N)
            inv = ref.inverse_generator_coeffs(N)
            h = s - sum(inv[n - 1] / math.log(n) * n ** (-s) for n in range(2, N + 1) if inv[n - 1])
            assert abs(h - ref.koenigs_closed_form(s)) <= ref.koenigs_tail_bound(s, N)
