"""Closed forms for the semigroup generated by ``H(s) = 1 + 2^{-s}``.

With ``y = 1 - 2^{-t}``::

    Phi_t(s) = s + t + Log(1 + y 2^{-s}) / ln 2
    h(s)     = s + Log(1 + 2^{-s}) / ln 2

Expanding ``Log(1+z) = sum_k (-1)^{k+1} z^k / k`` gives the Dirichlet coefficients,
supported on powers of 2. These are used as oracles for the integrator and the
Koenigs construction, so nothing here calls into the numerical modules.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

LN2 = math.log(2.0)


def example_generator_coeffs(N: int) -> np.ndarray:
    a = np.zeros(N, dtype=np.complex128)
    a[0] = 1.0
    if N >= 2:
        a[1] = 1.0
    return a


def flow_closed_form(s: complex, t: float) -> complex:
    """``Phi_t(s)`` with the principal logarithm (valid for ``Re s > 0``)."""
    y = 1.0 - 2.0**-t
    return s + t + cmath.log(1.0 + y * 2.0 ** (-s)) / LN2


def flow_coefficients(t: float, N: int) -> np.ndarray:
    """Exact ``a_n(t)`` for ``n <= N``: ``a_1 = t``, ``a_{2^k} = (-1)^{k+1} y^k / (k ln 2)``."""
    y = 1.0 - 2.0**-t
    a = np.zeros(N, dtype=np.complex128)
    a[0] = t
    k, n = 1, 2
    while n <= N:
        a[n - 1] = (-1) ** (k + 1) * y**k / (k * LN2)
        k += 1
        n *= 2
    return a


def flow_tail_bound(s: complex, t: float, N: int) -> float:
    """Bound on ``|Phi_t(s) - Phi_t^{(N)}(s)|`` from the dropped Log terms (geometric majorant)."""
    x = (1.0 - 2.0**-t) * 2.0 ** (-s.real)
    K = int(math.floor(math.log2(N))) + 1
    return x**K / (K * LN2 * (1.0 - x))


def koenigs_closed_form(s: complex) -> complex:
    return s + cmath.log(1.0 + 2.0 ** (-s)) / LN2


def koenigs_tail_bound(s: complex, N: int) -> float:
    x = 2.0 ** (-s.real)
    K = int(math.floor(math.log2(N))) + 1
    return x**K / (K * LN2 * (1.0 - x))


def inverse_generator_coeffs(N: int) -> np.ndarray:
    """``1/(1 + 2^{-s}) = sum_k (-1)^k 2^{-ks}``."""
    c = np.zeros(N, dtype=np.complex128)
    k, n = 0, 1
    while n <= N:
        c[n - 1] = (-1) ** k
        k += 1
        n *= 2
    return c
