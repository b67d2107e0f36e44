"""Continuous semigroups ``Phi_t(s) = s + phi_t(s)`` built from a generator ``H``.

The Cauchy problem ``d/dt Phi_t = H(Phi_t)``, ``Phi_0 = id`` becomes an ODE for the
coefficients ``a_n(t)`` of ``phi_t``::

    a'(t) = coefficients of H(s + phi_t(s)) = sum_m b_m m^{-s} exp(-ln m * phi_t)

Index ``n`` of the right-hand side only sees ``a_k`` with ``k <= n/2`` and ``b_m`` with
``m <= n``, so the system is lower triangular and any truncation ``N`` is closed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dirichlet_core import (
    DEFAULT_LINE_GRID,
    TruncatedDirichletSeries,
    differentiate,
    evaluate,
    hinf_norm_estimate,
    line_grid,
)
from .gh_symbol import GHSymbol, eval_symbol, pullback

# real parts of the vertical lines used for sampled admissibility checks
DIAGNOSTIC_REAL_PARTS = (1e-6, 0.25, 1.0, 3.0)


class InadmissibleGenerator(ValueError):
    pass


class FlowIntegrationError(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class Generator:
    """Infinitesimal generator ``H`` with ``Re H >= 0`` on the right half-plane.

    The condition is checked on sampled vertical lines (``Re b_1 >= 0`` exactly,
    ``Re H >= -tol`` on the grid); pass ``check=False`` to skip it.
    """

    H: TruncatedDirichletSeries
    check: bool = field(default=True, repr=False)
    tol: float = field(default=1e-9, repr=False)

    def __post_init__(self):
        if self.check:
            problems = admissibility_issues(self.H, self.tol)
            if problems:
                raise InadmissibleGenerator("; ".join(problems))

    @property
    def truncation(self) -> int:
        return self.H.truncation

    @property
    def b1(self) -> complex:
        return self.H.coeff(1)


def admissibility_issues(H: TruncatedDirichletSeries, tol: float = 1e-9, grid=DEFAULT_LINE_GRID) -> list[str]:
    issues = []
    if H.coeff(1).real < 0:
        issues.append(f"Re b_1 = {H.coeff(1).real:.6g} < 0")
    for x in DIAGNOSTIC_REAL_PARTS:
        worst = float(evaluate(H, line_grid(x, grid)).real.min())
        if worst < -tol:
            issues.append(f"Re H = {worst:.6g} < 0 on Re s = {x}")
    return issues


@dataclass(frozen=True, eq=False)
class FlowState:
    """Snapshot ``(t, phi_t)`` with ``Phi_t(s) = s + phi_t(s)``.

    ``a1_unpinned`` keeps the integrator's own value of ``a_1(t)`` before it is
    overwritten by the exact ``b_1 t``.
    """

    t: float
    a: TruncatedDirichletSeries
    a1_unpinned: complex | None = None

    @property
    def symbol(self) -> GHSymbol:
        return GHSymbol(1, self.a)

    def __call__(self, s):
        return eval_symbol(self.symbol, s)


def ode_rhs(a, G: Generator) -> np.ndarray:
    """Coefficients of ``H(s + phi(s))`` for ``phi`` with coefficient vector ``a``."""
    phi = a if isinstance(a, TruncatedDirichletSeries) else TruncatedDirichletSeries(a)
    if phi.truncation != G.truncation:
        raise ValueError(f"state has length {phi.truncation}, generator has {G.truncation}")
    return pullback(G.H, GHSymbol(1, phi)).coeffs.copy()


def _rhs(y: np.ndarray, G: Generator) -> np.ndarray:
    return pullback(G.H, GHSymbol(1, TruncatedDirichletSeries._wrap(y.copy()))).coeffs


def integrate_flow(G: Generator, t_end: float, dt: float, pin_a1: bool = True) -> list[FlowState]:
    """Classical RK4 on the coefficient ODE from ``a(0) = 0``.

    Returns the states at ``t = k*dt`` for ``k = 0..floor(t_end/dt)``. After each
    step ``a_1`` is reset to ``b_1 t``, which holds exactly for every semigroup in
    the class; the raw RK value is kept in ``FlowState.a1_unpinned``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if t_end < dt:
        raise ValueError("t_end must be >= dt")
    steps = int(math.floor(t_end / dt + 1e-9))
    N = G.truncation
    b1 = G.b1
    if G.H.is_zero():
        zero = TruncatedDirichletSeries.zeros(N)
        return [FlowState(k * dt, zero, 0j) for k in range(steps + 1)]

    y = np.zeros(N, dtype=np.complex128)
    states = [FlowState(0.0, TruncatedDirichletSeries.zeros(N), 0j)]
    h = dt
    # overflow is reported below as FlowIntegrationError, not as numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(steps):
            k1 = _rhs(y, G)
            k2 = _rhs(y + 0.5 * h * k1, G)
            k3 = _rhs(y + 0.5 * h * k2, G)
            k4 = _rhs(y + h * k3, G)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t = (k + 1) * dt
            if not np.all(np.isfinite(y)):
                bad = np.flatnonzero(~np.isfinite(y)) + 1
                raise FlowIntegrationError(f"non-finite coefficients at t={t:.6g}, indices {bad[:10].tolist()}")
            raw = complex(y[0])
            if pin_a1:
                y[0] = b1 * t
            states.append(FlowState(t, TruncatedDirichletSeries(y), raw))
    return states


def pinning_residual(states: Sequence[FlowState], G: Generator) -> float:
    """Largest ``|a_1^RK(t) - b_1 t|`` over the trace."""
    return max((abs(st.a1_unpinned - G.b1 * st.t) for st in states if st.a1_unpinned is not None), default=0.0)


def dropped_tail_rate(state: FlowState, G: Generator) -> float:
    """l2 size of ``d/dt a_n`` for ``N < n <= 2N``, with the state and ``H`` zero-padded.

    This is the rate at which the true flow feeds coefficients the truncation
    throws away; multiply by ``t`` for a rough magnitude.
    """
    N = G.truncation
    phi = state.a.resized(2 * N)
    rhs = pullback(G.H.resized(2 * N), GHSymbol(1, phi)).coeffs
    return float(np.linalg.norm(rhs[N:]))


@dataclass
class PicardResult:
    states: list[FlowState]
    distances: list[float]
    M: float
    contraction_factor: float


def picard_constant(H: TruncatedDirichletSeries, sigma: float, grid=DEFAULT_LINE_GRID) -> float:
    """``max(sup|H|, sup|H'|)`` sampled on the line ``Re s = 1 + sigma``."""
    x = 1.0 + sigma
    return max(hinf_norm_estimate(H, x, grid), hinf_norm_estimate(differentiate(H, 1), x, grid))


def picard_construct(
    G: Generator, sigma: float, t_max: float, iterations: int, dt: float = 1e-3
) -> PicardResult:
    """Fixed-point iteration of ``Tf(s,t) = s + int_0^t H(f(s,tau)) dtau``.

    Works on coefficient vectors over the time grid ``0, dt, ..., t_max`` with the
    composite trapezoid rule, starting from ``f(s,t) = s``. Requires
    ``t_max < 1/M`` with ``M`` from :func:`picard_constant`.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if not 0 < dt <= t_max:
        raise ValueError("need 0 < dt <= t_max")
    M = picard_constant(G.H, sigma)
    if M > 0 and t_max * M >= 1.0:
        raise ValueError(f"t_max*M = {t_max * M:.4g} >= 1: T is not shown to be a contraction (M = {M:.6g})")
    steps = int(math.floor(t_max / dt + 1e-9))
    times = np.arange(steps + 1) * dt
    N = G.truncation
    f = np.zeros((steps + 1, N), dtype=np.complex128)
    distances = []
    for _ in range(iterations):
        R = np.array([_rhs(row, G) for row in f])
        new = np.zeros_like(f)
        new[1:] = np.cumsum(0.5 * dt * (R[1:] + R[:-1]), axis=0)
        distances.append(float(np.max(np.abs(new - f))))
        f = new
    states = [FlowState(float(t), TruncatedDirichletSeries(row)) for t, row in zip(times, f)]
    return PicardResult(states, distances, M, t_max * M)


def estimate_generator(states: Sequence[FlowState]) -> TruncatedDirichletSeries:
    """One-sided second-order difference for ``a'(0)`` from the first three states.

    The states must start at ``t = 0``; spacing need not be uniform.
    """
    st = sorted(states, key=lambda s: s.t)
    if len(st) < 3:
        raise ValueError("need at least 3 states to estimate the generator")
    t0, t1, t2 = st[0].t, st[1].t, st[2].t
    if abs(t0) > 1e-15:
        raise ValueError(f"first state must be at t=0, got t={t0}")
    if not (t0 < t1 < t2):
        raise ValueError("states must have distinct times")
    w0 = (2 * t0 - t1 - t2) / ((t0 - t1) * (t0 - t2))
    w1 = (t0 - t2) / ((t1 - t0) * (t1 - t2))
    w2 = (t0 - t1) / ((t2 - t0) * (t2 - t1))
    N = min(s.a.truncation for s in st[:3])
    a0, a1, a2 = (s.a.resized(N).coeffs for s in st[:3])
    return TruncatedDirichletSeries(w0 * a0 + w1 * a1 + w2 * a2)


def _state_at(states: Sequence[FlowState], t: float) -> FlowState:
    best = min(states, key=lambda s: abs(s.t - t))
    if abs(best.t - t) > 1e-9 * max(1.0, abs(t)):
        raise KeyError(f"no state at t={t}")
    return best


@dataclass
class SemigroupReport:
    pairs: list[tuple[float, float]]
    residuals: list[np.ndarray]
    max_residual: float
    first_row_residual: float
    small_time_sup: list[tuple[float, float]]


def verify_semigroup(
    states: Sequence[FlowState],
    G: Generator | None = None,
    pairs: Iterable[tuple[float, float]] = ((0.3, 0.4),),
    epsilon: float = 0.5,
    small_times: int = 5,
    grid=DEFAULT_LINE_GRID,
) -> SemigroupReport:
    """Residual of ``a(t+u) = a(u) + M(u) a(t)`` where ``M(u)[n,k]`` is the n-th coefficient of ``k^{-Phi_u}``.

    ``M(u) a(t)`` is just the pullback of ``phi_t`` by ``Phi_u``. Also reports the
    sampled ``sup |Phi_t(s) - s|`` on ``Re s = epsilon`` for the smallest positive
    times in the trace, which should shrink to 0 with ``t``. If ``G`` is given the
    states must have its truncation.
    """
    if G is not None:
        bad = [s.t for s in states if s.a.truncation != G.truncation]
        if bad:
            raise ValueError(f"states at t={bad[:3]} do not have truncation {G.truncation}")
    pairs = [(float(t), float(u)) for t, u in pairs]
    residuals = []
    first_row = 0.0
    for t, u in pairs:
        st, su, stu = _state_at(states, t), _state_at(states, u), _state_at(states, t + u)
        composed = pullback(st.a, su.symbol).coeffs
        r = stu.a.coeffs - su.a.coeffs - composed
        residuals.append(np.abs(r))
        first_row = max(first_row, abs(r[0]))
    positive = sorted((s for s in states if s.t > 0), key=lambda s: s.t)[:small_times]
    sups = [(s.t, hinf_norm_estimate(s.a, epsilon, grid)) for s in positive]
    worst = max((float(r.max()) for r in residuals), default=0.0)
    return SemigroupReport(pairs, residuals, worst, first_row, sups)
