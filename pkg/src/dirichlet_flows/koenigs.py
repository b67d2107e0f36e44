"""Koenigs functions of semigroups in the class G.

The Koenigs function solves ``h(Phi_t(s)) = h(s) + t``. Differentiating at
``t = 0`` gives ``h' = 1/H``, so ``h`` is obtained by inverting the generator in
the Dirichlet algebra and integrating term by term::

    h(s) = d_1 s - sum_{n>=2} d_n / ln(n) * n^{-s},     1/H = d_1 + sum_{n>=2} d_n n^{-s}

The additive constant is fixed to 0.
"""

from __future__ import annotations

import enum
from functools import cached_property
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dirichlet_core import DEFAULT_LINE_GRID, TruncatedDirichletSeries, evaluate, line_grid
from .semigroup_flow import FlowState


class InversionError(ArithmeticError):
    """The generator has ``b_1 = 0`` and is not invertible in the Dirichlet algebra."""


class Dynamics(enum.Enum):
    AUTOMORPHIC_GROUP = "automorphic_group"
    ZERO_HYPERBOLIC_STEP = "zero_hyperbolic_step"


def invert_series(H: TruncatedDirichletSeries) -> TruncatedDirichletSeries:
    """Dirichlet inverse: ``c_1 = 1/b_1``, ``c_n = -(1/b_1) sum_{d|n, d>1} b_d c_{n/d}``.

    Filled in doubling blocks ``(M, 2M]``: every ``c_{n/d}`` needed there has
    ``n/d <= M`` and is already known, so each block is a handful of strided
    slice updates, one per nonzero ``b_d``.
    """
    b = H.coeffs
    N = b.size
    b1 = b[0]
    if b1 == 0:
        raise InversionError("first coefficient b_1 is 0; 1/H is not a Dirichlet series")
    c = np.zeros(N, dtype=np.complex128)
    c[0] = 1.0 / b1
    ds = np.flatnonzero(b[1:]) + 2
    M = 1
    while M < N:
        hi = min(2 * M, N)
        acc = np.zeros(hi - M, dtype=np.complex128)
        for d in ds:
            d = int(d)
            if d > hi:
                break
            jlo = -(-(M + 1) // d)
            jhi = hi // d
            if jhi < jlo:
                continue
            # n = d*j for j in [jlo, jhi]; position in block is n - M - 1
            acc[d * jlo - M - 1 : d * jhi - M : d] += b[d - 1] * c[jlo - 1 : jhi]
        c[M:hi] = -acc / b1
        del acc
        M = hi
    if not np.all(np.isfinite(c)):
        raise InversionError("inverse coefficients overflowed")
    return TruncatedDirichletSeries._wrap(c)


@dataclass(frozen=True, eq=False)
class KoenigsFunction:
    d1: complex
    tail: np.ndarray  # d_2..d_N

    def __post_init__(self):
        t = np.asarray(self.tail, dtype=np.complex128).reshape(-1)
        if t.flags.writeable:
            t = t.copy()
            t.setflags(write=False)
        object.__setattr__(self, "tail", t)
        object.__setattr__(self, "d1", complex(self.d1))

    @property
    def truncation(self) -> int:
        return self.tail.size + 1

    def derivative(self) -> TruncatedDirichletSeries:
        """``h' = d_1 + sum_{n>=2} d_n n^{-s}``."""
        return TruncatedDirichletSeries(np.concatenate(([self.d1], self.tail)))

    def tail_nonzero(self) -> bool:
        return self._support.size > 0

    @cached_property
    def _support(self) -> np.ndarray:
        # positions in ``tail`` of the nonzero d_n; scanning once matters at N ~ 1e8
        return np.flatnonzero(self.tail)

    def __call__(self, s):
        return eval_koenigs(self, s)


def koenigs_from_generator(H: TruncatedDirichletSeries) -> KoenigsFunction:
    c = invert_series(H).coeffs
    return KoenigsFunction(c[0], c[1:])


def eval_koenigs(h: KoenigsFunction, s):
    """``d_1 s - sum_{n=2}^N d_n/ln(n) n^{-s}``."""
    nz = h._support
    s_arr = np.asarray(s, dtype=np.complex128)
    out = h.d1 * s_arr
    if nz.size:
        n = nz + 2.0
        logn = np.log(n)
        w = h.tail[nz] / logn
        flat = s_arr.reshape(-1)
        acc = np.empty(flat.shape, dtype=np.complex128)
        step = max(1, 2_000_000 // nz.size)
        for i in range(0, flat.size, step):
            acc[i : i + step] = np.exp(-np.multiply.outer(flat[i : i + step], logn)) @ w
        out = out - acc.reshape(s_arr.shape)
    return complex(out) if np.ndim(out) == 0 else out


@dataclass
class AbelReport:
    max_residual: float
    per_state: list[tuple[float, float]]


def verify_abel(h: KoenigsFunction, states: Sequence[FlowState], sample_points: Iterable[complex]) -> AbelReport:
    """``max |h(Phi_t(s)) - h(s) - t|`` over states and sample points (``Re s >= 1``)."""
    pts = np.asarray(list(sample_points), dtype=np.complex128)
    if pts.size == 0:
        raise ValueError("no sample points")
    if np.any(pts.real < 1.0):
        raise ValueError("sample points must have Re s >= 1")
    base = eval_koenigs(h, pts)
    per_state = []
    for st in states:
        moved = st(pts)
        r = np.abs(eval_koenigs(h, moved) - base - st.t)
        per_state.append((st.t, float(r.max())))
    return AbelReport(max(r for _, r in per_state), per_state)


def classify_dynamics(h: KoenigsFunction, tail_nonzero: bool | None = None, rtol: float = 1e-14) -> Dynamics:
    """Automorphism group when ``Re d_1 = 0`` (then ``h = d_1 s``), zero hyperbolic step when ``Re d_1 > 0``."""
    if tail_nonzero is None:
        tail_nonzero = h.tail_nonzero()
    if h.d1 == 0:
        raise ValueError("d_1 = 0: h' has vanishing first coefficient, so 1/h' is not a generator")
    re = h.d1.real
    if abs(re) <= rtol * abs(h.d1):
        if tail_nonzero:
            raise ValueError(
                "Re d_1 = 0 with a nonzero tail: a generator with Re b_1 = 0 must be constant"
            )
        return Dynamics.AUTOMORPHIC_GROUP
    if re < 0:
        raise ValueError(f"Re d_1 = {re:.6g} < 0 is impossible for an admissible generator")
    return Dynamics.ZERO_HYPERBOLIC_STEP


def koenigs_issues(
    h: KoenigsFunction, tol: float = 1e-9, real_parts=(0.5, 1.0, 3.0), grid=DEFAULT_LINE_GRID
) -> list[str]:
    """Sampled check that ``Re h' >= 0``.

    The lines stay away from ``Re s = 0``: ``h' = 1/H`` usually converges only
    conditionally there and its partial sums say nothing about the limit.
    """
    dh = h.derivative()
    issues = []
    for x in real_parts:
        worst = float(evaluate(dh, line_grid(x, grid)).real.min())
        if worst < -tol:
            issues.append(f"Re h' = {worst:.6g} < 0 on Re s = {x}")
    return issues
