"""Composition operators on H^2 of Dirichlet series, seen through finite matrices.

Column ``m`` of the matrix of ``C_Phi`` in the basis ``n^{-s}`` holds the
coefficients of ``m^{-Phi(s)}``. The ``N x N`` block is the exact compression
``P_N C_Phi P_N`` because the entries with ``n <= N`` are computed exactly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .dirichlet_core import TruncatedDirichletSeries, convolve, differentiate, evaluate, h2_norm
from .gh_symbol import GHSymbol, _PowerTable, pullback
from .semigroup_flow import Generator, integrate_flow


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    entries: np.ndarray  # entries[n-1, m-1] = n-th coefficient of m^{-Phi}

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]


def assemble_matrix(P: GHSymbol, N: int) -> OperatorMatrix:
    table = _PowerTable(P, N)
    M = np.empty((N, N), dtype=np.complex128)
    for m in range(1, N + 1):
        M[:, m - 1] = table.column(m)
    M.setflags(write=False)
    return OperatorMatrix(M)


def compression_norm(M: OperatorMatrix | np.ndarray, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Spectral norm by power iteration on ``M^* M``.

    Stops when the Rayleigh quotient changes by less than ``tol`` (relative).
    The result never exceeds the true norm.
    """
    A = M.entries if isinstance(M, OperatorMatrix) else np.asarray(M, dtype=np.complex128)
    if not np.any(A):
        return 0.0
    AhA = A.conj().T @ A
    v = np.ones(A.shape[1], dtype=np.complex128) / math.sqrt(A.shape[1])
    lam = 0.0
    for _ in range(max_iter):
        w = AhA @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new = float(np.vdot(v, w).real)
        v = w / nw
        if abs(new - lam) <= tol * abs(new):
            lam = new
            break
        lam = new
    return math.sqrt(max(lam, 0.0))


class FunctionalNorm(NamedTuple):
    estimate: float
    tail_bound: float
    lower: float
    upper: float


def eval_functional_norm(sigma: float, p: float, N: int) -> FunctionalNorm:
    """Bracket for ``||delta_s|| = zeta(2 Re s)^{1/p}`` on H^p.

    ``estimate`` is the partial sum ``(sum_{n<=N} n^{-2 sigma})^{1/p}``; the
    dropped mass is at most ``int_N^inf x^{-2 sigma} dx = N^{1-2 sigma}/(2 sigma - 1)``.
    """
    if sigma <= 0.5:
        raise ValueError("sigma must exceed 1/2 (the zeta sum diverges otherwise)")
    if p < 1:
        raise ValueError("p must be >= 1")
    n = np.arange(N, 0, -1, dtype=np.float64)  # small terms first
    partial = float(np.sum(n ** (-2.0 * sigma)))
    tail = N ** (1.0 - 2.0 * sigma) / (2.0 * sigma - 1.0)
    lo = partial ** (1.0 / p)
    hi = (partial + tail) ** (1.0 / p)
    return FunctionalNorm(lo, tail, lo, hi)


def strong_continuity_probe(
    G: Generator, f: TruncatedDirichletSeries, t_list: Sequence[float], steps: int = 200
) -> list[float]:
    """``||f o Phi_t - f||_{H^2}`` for each ``t``.

    Each ``Phi_t`` is integrated on its own grid of ``steps`` RK4 steps.
    """
    out = []
    for t in t_list:
        if t <= 0:
            raise ValueError("times must be positive")
        state = integrate_flow(G, t, t / steps)[-1]
        out.append(h2_norm(pullback(f, state.symbol) - f.resized(min(f.truncation, G.truncation))))
    return out


class UnboundednessRow(NamedTuple):
    n: int
    norm: float
    norm_over_log: float
    ratio: float  # norm / (ln n * ||H||)


def generator_unboundedness_check(H: TruncatedDirichletSeries, n_list: Sequence[int]) -> list[UnboundednessRow]:
    """Norms of ``A(n^{-s}) = H * (n^{-s})'`` in H^2.

    The product is formed at truncation ``n * max(supp H)`` so no term is cut
    off; then it equals ``ln n * ||H||``.
    """
    hnorm = h2_norm(H)
    top = int(H.support().max()) if not H.is_zero() else 1
    rows = []
    for n in n_list:
        if n < 2:
            raise ValueError("n must be >= 2")
        N = n * top
        basis = TruncatedDirichletSeries.monomial(n, N)
        value = h2_norm(convolve(H.resized(N), differentiate(basis, 1)))
        ln = math.log(n)
        ratio = value / (ln * hnorm) if hnorm else float("nan")
        rows.append(UnboundednessRow(int(n), value, value / ln, ratio))
    return rows


class WitnessError(RuntimeError):
    pass


@dataclass
class Witness:
    s0: complex
    s1: complex
    value_gap: float
    separation: float
    base: int
    target: complex
    method: tuple[str, str]


def _rectangle_path(center: complex, half_width: float, half_height: float, samples: int) -> np.ndarray:
    """Counter-clockwise boundary samples of the rectangle, ``samples // 4`` per side."""
    u = np.linspace(0.0, 1.0, samples // 4, endpoint=False)
    x0, x1 = center.real - half_width, center.real + half_width
    y0, y1 = center.imag - half_height, center.imag + half_height
    return np.concatenate(
        [
            (x0 + (x1 - x0) * u) + 1j * y0,
            x1 + 1j * (y0 + (y1 - y0) * u),
            (x1 - (x1 - x0) * u) + 1j * y1,
            x0 + 1j * (y1 - (y1 - y0) * u),
        ]
    )


def _winding_count(f, center: complex, half_width: float, half_height: float, samples: int) -> int:
    """Zeros of ``f`` inside the rectangle, by the argument principle."""
    vals = f(_rectangle_path(center, half_width, half_height, samples))
    dphi = np.angle(np.roll(vals, -1) / vals)
    return int(round(float(np.sum(dphi)) / (2 * math.pi)))


def nonunivalence_witness(
    phi: TruncatedDirichletSeries,
    x: float,
    newton_tol: float = 1e-12,
    max_newton: int = 100,
    boundary_samples: int = 4096,
) -> Witness:
    """Two distinct points where ``phi`` takes the same value.

    Normalizes ``psi = (phi - a_1)/a_N`` with ``N`` the first frequency ``>= 2`` in
    the support, then solves ``psi(s) = N^{-x}`` inside the rectangles centred at
    ``x + 2 pi i m / ln N`` (``m = 0, 1``), width 2 and height ``2 pi / ln N``.
    Rouche's theorem puts exactly one root in each when ``|psi - N^{-s}|`` stays
    below ``|N^{-s} - N^{-x}|`` on the boundary; that is checked on
    ``boundary_samples`` points. Newton starts at the centre; if it fails or
    leaves the rectangle, the rectangle is bisected using winding numbers.
    """
    sup = phi.support()
    sup = sup[sup >= 2]
    if sup.size == 0:
        raise ValueError("phi is constant; it has no nonconstant part to analyse")
    base = int(sup[0])
    lead = phi.coeff(base)
    a = phi.coeffs.copy()
    a[0] = 0.0
    psi = TruncatedDirichletSeries(a / lead)
    dpsi = differentiate(psi, 1)
    target = base ** (-float(x))
    lnb = math.log(base)
    half_h = math.pi / lnb

    def f(s):
        return evaluate(psi, s) - target

    rest = psi - TruncatedDirichletSeries.monomial(base, psi.truncation)

    roots, methods = [], []
    for m in (0, 1):
        c = complex(x, 2 * math.pi * m / lnb)
        # Rouche condition on the boundary of this rectangle
        path = _rectangle_path(c, 1.0, half_h, boundary_samples)
        g = np.abs(base ** (-path) - target)
        h = np.abs(evaluate(rest, path))
        if not np.all(h < g):
            worst = float(np.max(h / g))
            raise WitnessError(
                f"Rouche bound fails on rectangle m={m}: max |psi - {base}^-s| / |{base}^-s - {base}^-x| = {worst:.3g} "
                f"(need < 1); increase x"
            )
        root, how = _newton(f, lambda s: evaluate(dpsi, s), c, newton_tol, max_newton, abs(target))
        inside = root is not None and abs(root.real - c.real) < 1 and abs(root.imag - c.imag) < half_h
        if not inside:
            root, how = _bisect_then_newton(
                f, lambda s: evaluate(dpsi, s), c, 1.0, half_h, newton_tol, max_newton, boundary_samples, abs(target)
            )
        roots.append(root)
        methods.append(how)
    s0, s1 = roots
    v0, v1 = evaluate(phi, s0), evaluate(phi, s1)
    return Witness(s0, s1, abs(v0 - v1), abs(s0 - s1), base, target, tuple(methods))


def _newton(f, df, s: complex, tol: float, max_iter: int, scale: float = 1.0):
    """Plain Newton; converged when ``|f| <= tol * min(1, scale)``."""
    thresh = tol * min(1.0, scale)
    for _ in range(max_iter + 1):
        v = f(s)
        if abs(v) <= thresh:
            return s, "newton"
        d = df(s)
        if d == 0 or not cmath.isfinite(d):
            break
        s = s - v / d
        if not cmath.isfinite(s):
            break
    return None, "newton"


def _bisect_then_newton(f, df, c, half_w, half_h, tol, max_iter, samples, scale):
    for _ in range(60):
        if _winding_count(f, c, half_w, half_h, samples) != 1:
            raise WitnessError(f"winding number around {c} is not 1; cannot isolate a root")
        root, _ = _newton(f, df, c, tol, max_iter, scale)
        if root is not None and abs(root.real - c.real) <= half_w and abs(root.imag - c.imag) <= half_h:
            return root, "bisection"
        # split along the longer side, keep the half that carries the root
        if half_w >= half_h:
            halves = [c - half_w / 2, c + half_w / 2]
            half_w /= 2
        else:
            halves = [c - 1j * half_h / 2, c + 1j * half_h / 2]
            half_h /= 2
        for cand in halves:
            if _winding_count(f, cand, half_w, half_h, samples) == 1:
                c = cand
                break
        else:
            raise WitnessError("root straddles the bisection line; winding count inconclusive")
    raise WitnessError("bisection did not converge")
