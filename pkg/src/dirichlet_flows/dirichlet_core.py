"""Truncated Dirichlet series and the operations of the Dirichlet convolution algebra.

A :class:`TruncatedDirichletSeries` stores ``a_1..a_N`` of ``sum_n a_n n^{-s}`` in a
dense complex vector (``coeffs[n-1] = a_n``). Everything here is exact on the
indices ``n <= N``: products of frequencies never move mass to smaller indices,
so dropping ``n > N`` yields a prefix of the untruncated result.

Convolution loops only over the nonzero entries of the sparser operand, which
keeps series supported on thin multiplicative sets (powers of 2, say) cheap even
at large ``N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .numtheory import divisor_counts, exponent_matrix, factorize, primes_upto

DEFAULT_TRUNCATION = 64
DEFAULT_LINE_GRID = (-50.0, 50.0, 4001)


class TruncatedDirichletSeries:
    """Finite coefficient vector ``a_1..a_N`` representing ``sum a_n n^{-s}``.

    Instances are immutable; arithmetic returns new series. ``*`` between two
    series is Dirichlet convolution, ``*`` with a number is scaling, and calling
    the series evaluates it.
    """

    __slots__ = ("_a",)

    def __init__(self, coeffs: Iterable[complex] | np.ndarray):
        a = np.array(coeffs, dtype=np.complex128)
        if a.ndim != 1 or a.size < 1:
            raise ValueError("coefficient vector must be 1-D with at least one entry")
        if not np.all(np.isfinite(a)):
            raise ValueError("coefficients must be finite")
        a.setflags(write=False)
        self._a = a

    @classmethod
    def _wrap(cls, a: np.ndarray) -> "TruncatedDirichletSeries":
        # trusted internal constructor: no copy, no finiteness scan
        obj = cls.__new__(cls)
        a.setflags(write=False)
        obj._a = a
        return obj

    @classmethod
    def _checked(cls, a: np.ndarray) -> "TruncatedDirichletSeries":
        if not np.all(np.isfinite(a)):
            raise ValueError("coefficients must be finite")
        return cls._wrap(a)

    @classmethod
    def zeros(cls, N: int = DEFAULT_TRUNCATION) -> "TruncatedDirichletSeries":
        return cls._wrap(np.zeros(_check_truncation(N), dtype=np.complex128))

    @classmethod
    def unit(cls, N: int = DEFAULT_TRUNCATION) -> "TruncatedDirichletSeries":
        return cls.monomial(1, N)

    @classmethod
    def monomial(cls, n: int, N: int = DEFAULT_TRUNCATION, coef: complex = 1.0) -> "TruncatedDirichletSeries":
        """``coef * n^{-s}``; zero when ``n > N``."""
        a = np.zeros(_check_truncation(N), dtype=np.complex128)
        if n < 1:
            raise ValueError(f"frequency must be >= 1, got {n}")
        if n <= N:
            a[n - 1] = coef
        return cls._checked(a)

    @classmethod
    def from_dict(cls, terms: Mapping[int, complex], N: int = DEFAULT_TRUNCATION) -> "TruncatedDirichletSeries":
        """Build from ``{n: a_n}``; frequencies beyond ``N`` are dropped."""
        a = np.zeros(_check_truncation(N), dtype=np.complex128)
        for n, c in terms.items():
            if n < 1:
                raise ValueError(f"frequency must be >= 1, got {n}")
            if n <= N:
                a[n - 1] += c
        return cls._checked(a)

    @property
    def coeffs(self) -> np.ndarray:
        return self._a

    @property
    def truncation(self) -> int:
        return self._a.size

    N = truncation

    def coeff(self, n: int) -> complex:
        """``a_n`` (1-based); zero beyond the truncation."""
        if n < 1:
            raise ValueError(f"frequency must be >= 1, got {n}")
        return complex(self._a[n - 1]) if n <= self._a.size else 0j

    def support(self) -> np.ndarray:
        """Frequencies ``n`` with ``a_n != 0``."""
        return np.flatnonzero(self._a) + 1

    def resized(self, N: int) -> "TruncatedDirichletSeries":
        """Truncate to, or zero-pad up to, ``N`` coefficients."""
        N = _check_truncation(N)
        if N == self._a.size:
            return self
        a = np.zeros(N, dtype=np.complex128)
        m = min(N, self._a.size)
        a[:m] = self._a[:m]
        return TruncatedDirichletSeries._wrap(a)

    def constant_term(self) -> complex:
        return complex(self._a[0])

    def tail(self) -> "TruncatedDirichletSeries":
        """The series with ``a_1`` set to zero."""
        a = self._a.copy()
        a[0] = 0
        return TruncatedDirichletSeries._wrap(a)

    def is_zero(self) -> bool:
        return not np.any(self._a)

    def __call__(self, s):
        return evaluate(self, s)

    def __len__(self) -> int:
        return self._a.size

    def __repr__(self) -> str:
        terms = ", ".join(f"{n}: {self._a[n - 1]:.6g}" for n in self.support()[:8])
        more = ", ..." if len(self.support()) > 8 else ""
        return f"TruncatedDirichletSeries(N={self.truncation}, {{{terms}{more}}})"

    def _binary(self, other, op):
        if isinstance(other, TruncatedDirichletSeries):
            N = min(self.truncation, other.truncation)
            return TruncatedDirichletSeries._wrap(op(self._a[:N], other._a[:N]))
        return NotImplemented

    def __add__(self, other):
        if np.isscalar(other):
            a = self._a.copy()
            a[0] += other
            return TruncatedDirichletSeries(a)
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        if np.isscalar(other):
            return self + (-other)
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return TruncatedDirichletSeries._wrap(-self._a)

    def __mul__(self, other):
        if isinstance(other, TruncatedDirichletSeries):
            return convolve(self, other)
        if np.isscalar(other):
            return TruncatedDirichletSeries(self._a * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return TruncatedDirichletSeries(self._a / other)
        return NotImplemented


def _check_truncation(N) -> int:
    if int(N) != N or N < 1:
        raise ValueError(f"truncation must be a positive integer, got {N!r}")
    return int(N)


@dataclass(frozen=True)
class MultiIndex:
    """Exponent vector ``kappa`` with ``n = prod_j p_j^{kappa_j}`` (``p_1 = 2``)."""

    exponents: tuple[int, ...] = ()

    def __post_init__(self):
        e = tuple(int(k) for k in self.exponents)
        if any(k < 0 for k in e):
            raise ValueError("exponents must be non-negative")
        while e and e[-1] == 0:
            e = e[:-1]
        object.__setattr__(self, "exponents", e)

    @property
    def value(self) -> int:
        if not self.exponents:
            return 1
        primes = _first_primes(len(self.exponents))
        out = 1
        for p, k in zip(primes, self.exponents):
            out *= int(p) ** k
        return out

    def __len__(self) -> int:
        return len(self.exponents)


def _first_primes(count: int) -> np.ndarray:
    bound = 16
    while True:
        ps = primes_upto(bound)
        if len(ps) >= count:
            return ps[:count]
        bound *= 2


@dataclass(frozen=True)
class LambdaSet:
    """A multiplicative semigroup of the positive integers, cut off at ``bound``."""

    members: tuple[int, ...]
    bound: int

    def __post_init__(self):
        m = tuple(sorted(set(int(x) for x in self.members if x <= self.bound)))
        if m and m[0] < 1:
            raise ValueError("members must be positive integers")
        if not m or m[0] != 1:
            raise ValueError("a multiplicative semigroup must contain 1")
        ms = set(m)
        for i, x in enumerate(m[1:], 1):
            for y in m[i:]:
                if x * y > self.bound:
                    break
                if x * y not in ms:
                    raise ValueError(f"not closed under products: {x}*{y} missing")
        object.__setattr__(self, "members", m)

    @classmethod
    def generated_by(cls, generators: Iterable[int], bound: int) -> "LambdaSet":
        gens = sorted(set(int(g) for g in generators if 1 < g <= bound))
        members = {1}
        frontier = [1]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = x * g
                    if y <= bound and y not in members:
                        members.add(y)
                        nxt.append(y)
            frontier = nxt
        return cls(tuple(members), bound)

    @classmethod
    def everything(cls, bound: int) -> "LambdaSet":
        return cls(tuple(range(1, bound + 1)), bound)

    def __contains__(self, n) -> bool:
        return int(n) in self.members


# --------------------------------------------------------------------------- operations


def evaluate(f: TruncatedDirichletSeries, s):
    """Partial sum ``sum_{n<=N} a_n exp(-s ln n)``; ``s`` may be a scalar or an array."""
    nz = np.flatnonzero(f.coeffs)
    s_arr = np.asarray(s, dtype=np.complex128)
    if nz.size == 0:
        out = np.zeros(s_arr.shape, dtype=np.complex128)
    else:
        logn = np.log(nz + 1.0)
        a = f.coeffs[nz]
        flat = s_arr.reshape(-1)
        out = np.empty(flat.shape, dtype=np.complex128)
        step = max(1, 2_000_000 // nz.size)
        for i in range(0, flat.size, step):
            chunk = flat[i : i + step]
            out[i : i + step] = np.exp(-np.multiply.outer(chunk, logn)) @ a
        out = out.reshape(s_arr.shape)
    return complex(out) if out.ndim == 0 else out


def _convolve_arrays(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    N = min(a.size, b.size)
    a, b = a[:N], b[:N]
    ia, ib = np.flatnonzero(a), np.flatnonzero(b)
    if ia.size > ib.size:
        a, b, ia, ib = b, a, ib, ia
    out = np.zeros(N, dtype=np.complex128)
    if ia.size == 0 or ib.size == 0:
        return out
    fb = ib + 1
    if ia.size * ib.size <= 4 * N:
        # both sparse: all pairwise products in one scatter
        idx = np.multiply.outer(ia + 1, fb).ravel()
        vals = np.multiply.outer(a[ia], b[ib]).ravel()
        keep = idx <= N
        idx, vals = idx[keep] - 1, vals[keep]
        out.real = np.bincount(idx, vals.real, minlength=N)
        out.imag = np.bincount(idx, vals.imag, minlength=N)
        return out
    strided = 4 * ib.size > N
    for i in ia:
        k = int(i) + 1
        m = N // k
        if m < fb[0]:
            break
        if strided:
            out[k - 1 :: k] += a[i] * b[:m]
        else:
            l = fb[: np.searchsorted(fb, m, side="right")]
            out[k * l - 1] += a[i] * b[l - 1]
    return out


def convolve(f: TruncatedDirichletSeries, g: TruncatedDirichletSeries) -> TruncatedDirichletSeries:
    """Dirichlet product ``d_n = sum_{kl=n} f_k g_l``.

    The result has truncation ``min(N_f, N_g)``.
    """
    return TruncatedDirichletSeries._wrap(_convolve_arrays(f.coeffs, g.coeffs))


def differentiate(f: TruncatedDirichletSeries, k: int = 1) -> TruncatedDirichletSeries:
    """k-th derivative in ``s``: ``a_n -> (-ln n)^k a_n``."""
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    if k == 0:
        return f
    logn = np.log(np.arange(1, f.truncation + 1, dtype=np.float64))
    return TruncatedDirichletSeries._wrap(f.coeffs * (-logn) ** k)


def exp_powers(tail: np.ndarray) -> list[np.ndarray]:
    """``[tail^{*k} / k!]`` for ``k = 0, 1, ...`` until the power vanishes.

    ``tail`` must have ``tail[0] == 0``; then ``tail^{*k}`` lives on ``n >= 2^k`` and
    at most ``floor(log2 N) + 1`` terms are nonzero.
    """
    N = tail.size
    term = np.zeros(N, dtype=np.complex128)
    term[0] = 1.0
    powers = [term]
    ib = np.flatnonzero(tail)
    if ib.size == 0:
        return powers
    fb, tv = ib + 1, tail[ib]
    # sparse (frequency, value) form of the current power while it stays small
    idx, val = np.array([1]), np.array([1.0 + 0j])
    for k in range(1, N.bit_length()):
        if idx is not None and idx.size * fb.size <= 8 * N:
            prod_idx = np.multiply.outer(idx, fb).ravel()
            prod_val = np.multiply.outer(val, tv).ravel() / k
            keep = prod_idx <= N
            if not keep.any():
                break
            idx, inv = np.unique(prod_idx[keep], return_inverse=True)
            w = prod_val[keep]
            val = np.bincount(inv, w.real, minlength=idx.size) + 1j * np.bincount(inv, w.imag, minlength=idx.size)
            term = np.zeros(N, dtype=np.complex128)
            term[idx - 1] = val
        else:
            idx = val = None
            term = _convolve_arrays(term, tail) / k
            if not np.any(term):
                break
        powers.append(term)
    return powers


def combine_powers(powers: list[np.ndarray], scale: complex, length: int) -> np.ndarray:
    """First ``length`` coefficients of ``sum_k scale^k powers[k]``, i.e. ``exp(scale*tail)``."""
    out = powers[0][:length].copy()
    c = 1.0
    for P in powers[1:]:
        c *= scale
        out += c * P[:length]
    return out


def exp_series(f: TruncatedDirichletSeries) -> TruncatedDirichletSeries:
    """Exponential in the truncated convolution algebra.

    ``exp(f) = e^{a_1} * sum_k f_tail^{*k}/k!``; the sum is finite because
    ``f_tail^{*k}`` vanishes on ``n < 2^k``.
    """
    tail = f.coeffs.copy()
    a1 = tail[0]
    tail[0] = 0
    powers = exp_powers(tail)
    return TruncatedDirichletSeries._wrap(np.exp(a1) * combine_powers(powers, 1.0, f.truncation))


def bohr_lift_index(n: int) -> MultiIndex:
    """Prime-exponent multi-index of ``n`` (trial division)."""
    fac = factorize(n)
    if not fac:
        return MultiIndex(())
    primes = primes_upto(max(fac))
    return MultiIndex(tuple(fac.get(int(p), 0) for p in primes))


def h2_norm(f: TruncatedDirichletSeries) -> float:
    return float(np.linalg.norm(f.coeffs))


class MCEstimate(NamedTuple):
    estimate: float
    stderr: float
    samples: int
    seed: int


def bohr_lift_values(f: TruncatedDirichletSeries, theta: np.ndarray) -> np.ndarray:
    """Evaluate the Bohr lift at torus points ``z_j = exp(2 pi i theta_j)``.

    ``theta`` has shape ``(samples, pi(N))``, one column per prime ``<= N``.
    """
    nz = np.flatnonzero(f.coeffs)
    _, K = exponent_matrix(f.truncation)
    phases = 2.0 * np.pi * (theta @ K[nz].T.astype(np.float64))
    return np.exp(1j * phases) @ f.coeffs[nz]


def hp_norm_mc(
    f: TruncatedDirichletSeries, p: float, samples: int, seed: int, chunk: int = 8192
) -> MCEstimate:
    """Monte Carlo estimate of the H^p norm through the Bohr lift.

    Points on the torus ``T^d`` (``d`` = number of primes ``<= N``) are drawn from a
    seeded PCG64 stream, so the estimate is reproducible for a fixed seed. The
    standard error of the mean of ``|Bf|^p`` is mapped to the ``1/p`` root with
    the delta method.
    """
    if samples < 1:
        raise ValueError("samples must be a positive integer")
    if p < 1:
        raise ValueError("p must be >= 1")
    if f.is_zero():
        return MCEstimate(0.0, 0.0, samples, seed)
    d = len(primes_upto(f.truncation))
    if d == 0:
        return MCEstimate(abs(f.coeff(1)), 0.0, samples, seed)
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        v = np.abs(bohr_lift_values(f, rng.random((m, d)))) ** p
        total += float(v.sum())
        total_sq += float((v * v).sum())
        done += m
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / max(samples - 1, 1)
    se_mean = math.sqrt(var / samples)
    if mean == 0.0:
        return MCEstimate(0.0, 0.0, samples, seed)
    est = mean ** (1.0 / p)
    return MCEstimate(est, est / (p * mean) * se_mean, samples, seed)


def helson_lhs(f: TruncatedDirichletSeries) -> float:
    """``(sum |a_n|^2 / d(n))^{1/2}``, the left side of Helson's inequality."""
    d = divisor_counts(f.truncation)
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2 / d)))


def line_grid(epsilon: float, grid=DEFAULT_LINE_GRID) -> np.ndarray:
    t_min, t_max, count = grid
    if count < 1:
        raise ValueError("sampling grid is empty")
    return epsilon + 1j * np.linspace(t_min, t_max, int(count))


def hinf_norm_estimate(f: TruncatedDirichletSeries, epsilon: float, grid=DEFAULT_LINE_GRID) -> float:
    """Lower bound for ``sup_{Re s > epsilon} |f(s)|`` from samples on ``Re s = epsilon``.

    ``grid = (t_min, t_max, count)`` spaces the imaginary parts. This never
    certifies the supremum; it only reports the largest sampled modulus.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    pts = line_grid(epsilon, grid)
    return float(np.max(np.abs(evaluate(f, pts))))


def lambda_closure_check(f: TruncatedDirichletSeries, L: LambdaSet) -> bool:
    members = set(L.members)
    return all(int(n) in members for n in f.support())
