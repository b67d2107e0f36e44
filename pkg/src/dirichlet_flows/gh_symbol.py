"""Symbols ``Phi(s) = c*s + phi(s)`` with ``c`` a non-negative integer and ``phi`` a Dirichlet series.

Composition operators ``f -> f o Phi`` act on Dirichlet series through the powers
``m^{-Phi(s)} = m^{-c s} * exp(-ln m * phi(s))``: an exponential in the
convolution algebra followed by a shift of the support by ``m^c``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dirichlet_core import (
    DEFAULT_LINE_GRID,
    TruncatedDirichletSeries,
    combine_powers,
    evaluate,
    exp_powers,
    line_grid,
)


class ClassMembershipWarning(UserWarning):
    """A sampled point violates a Gordon-Hedenmalm class condition."""


@dataclass(frozen=True, eq=False)
class GHSymbol:
    characteristic: int
    phi: TruncatedDirichletSeries

    def __post_init__(self):
        c = self.characteristic
        if int(c) != c or c < 0:
            raise ValueError(f"characteristic must be a non-negative integer, got {c!r}")
        object.__setattr__(self, "characteristic", int(c))

    @classmethod
    def identity(cls, N: int) -> "GHSymbol":
        return cls(1, TruncatedDirichletSeries.zeros(N))

    @classmethod
    def translation(cls, shift: complex, N: int) -> "GHSymbol":
        return cls(1, TruncatedDirichletSeries.monomial(1, N, shift))

    @property
    def truncation(self) -> int:
        return self.phi.truncation

    def __call__(self, s):
        return eval_symbol(self, s)


def eval_symbol(P: GHSymbol, s):
    """``c*s + phi(s)`` for scalar or array ``s``."""
    v = evaluate(P.phi, s)
    if np.ndim(s) == 0:
        return P.characteristic * complex(s) + v
    return P.characteristic * np.asarray(s, dtype=np.complex128) + v


class _PowerTable:
    """Shared ``phi_tail^{*k}/k!`` for many ``m^{-Phi}`` at once."""

    def __init__(self, P: GHSymbol, N: int):
        phi = P.phi.resized(N).coeffs
        self.N = N
        self.c = P.characteristic
        self.a1 = phi[0]
        tail = phi.copy()
        tail[0] = 0
        self.powers = exp_powers(tail)

    def shift(self, m: int) -> int | None:
        """``m^c`` or ``None`` when it already exceeds ``N``."""
        if self.c == 0 or m == 1:
            return 1
        # bit-length test avoids building huge integers for large c
        if (m.bit_length() - 1) * self.c >= self.N.bit_length():
            return None
        q = m**self.c
        return q if q <= self.N else None

    def column(self, m: int) -> np.ndarray:
        """Dense coefficients of ``m^{-Phi(s)}``, length ``N``."""
        out = np.zeros(self.N, dtype=np.complex128)
        if m == 1:
            out[0] = 1.0
            return out
        q = self.shift(m)
        if q is None:
            return out
        length = self.N // q
        lm = math.log(m)
        block = np.exp(-lm * self.a1) * combine_powers(self.powers, -lm, length)
        out[q - 1 :: q] = block
        return out


def power_pullback(m: int, P: GHSymbol, N: int | None = None) -> TruncatedDirichletSeries:
    """Coefficients of ``m^{-Phi(s)}`` truncated at ``N`` (default: ``P``'s truncation).

    Computed as ``exp(-ln m * phi)`` with its support moved ``j -> j * m^c``;
    shifted indices past ``N`` are dropped.
    """
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    N = P.truncation if N is None else N
    return TruncatedDirichletSeries._wrap(_PowerTable(P, N).column(int(m)))


def pullback(f: TruncatedDirichletSeries, P: GHSymbol) -> TruncatedDirichletSeries:
    """``f o Phi`` as a Dirichlet series, ``sum_m f_m m^{-Phi}``.

    Truncation is ``min(N_f, N_phi)``.
    """
    N = min(f.truncation, P.truncation)
    table = _PowerTable(P, N)
    a = f.coeffs[:N]
    out = np.zeros(N, dtype=np.complex128)
    for i in np.flatnonzero(a):
        m = int(i) + 1
        q = table.shift(m)
        if q is None:
            continue
        if m == 1:
            out[0] += a[i]
            continue
        lm = math.log(m)
        length = N // q
        out[q - 1 :: q] += (a[i] * np.exp(-lm * table.a1)) * combine_powers(table.powers, -lm, length)
    return TruncatedDirichletSeries._wrap(out)


def compose(P: GHSymbol, Q: GHSymbol) -> GHSymbol:
    """``P o Q``.

    ``(P o Q)(s) = c_P c_Q s + c_P psi(s) + phi_P(Q(s))``; the linear term is
    carried in the characteristic, never formed numerically.
    """
    N = min(P.truncation, Q.truncation)
    series = pullback(P.phi.resized(N), Q)
    if P.characteristic:
        series = series + P.characteristic * Q.phi.resized(N)
    return GHSymbol(P.characteristic * Q.characteristic, series)


def estimate_characteristic(samples: Sequence[tuple[complex, complex]], min_re: float = 20.0) -> int:
    """Recover ``c`` from samples ``(s, Phi(s))`` far to the right.

    Uses the nearest integer to ``Re(Phi(s)/s)`` at the sample with largest
    ``Re s``; warns if the samples disagree by more than 0.1.
    """
    far = [(complex(s), complex(v)) for s, v in samples if complex(s).real >= min_re]
    if len(far) < 2:
        raise ValueError(f"need at least 2 samples with Re s >= {min_re}, got {len(far)}")
    ratios = [(v / s).real for s, v in far]
    s_best, v_best = max(far, key=lambda sv: sv[0].real)
    c = round((v_best / s_best).real)
    if c < 0:
        raise ValueError(f"samples give negative slope {c}; not a class-G symbol")
    if max(ratios) - min(ratios) > 0.1:
        warnings.warn(
            f"characteristic estimates disagree across samples: {min(ratios):.4g}..{max(ratios):.4g}",
            ClassMembershipWarning,
            stacklevel=2,
        )
    return int(c)


def membership_diagnostics(
    P: GHSymbol,
    real_parts: Iterable[float] = (0.05, 0.5, 1.0, 2.0),
    grid=DEFAULT_LINE_GRID,
    tol: float = 1e-9,
    warn: bool = True,
) -> list[str]:
    """Sampled check of the class conditions.

    ``c = 0``: ``Re phi > 1/2``; ``c >= 1``: ``Re phi >= 0``. Returns a list of
    violation messages (empty if none were found) and emits warnings for them.
    """
    issues = []
    bound = 0.5 if P.characteristic == 0 else 0.0
    for x in real_parts:
        re = evaluate(P.phi, line_grid(x, grid)).real
        worst = float(re.min())
        if P.characteristic == 0 and worst <= bound + tol:
            issues.append(f"Re phi = {worst:.6g} <= 1/2 on Re s = {x}")
        elif P.characteristic >= 1 and worst < -tol:
            issues.append(f"Re phi = {worst:.6g} < 0 on Re s = {x}")
    if warn:
        for msg in issues:
            warnings.warn(msg, ClassMembershipWarning, stacklevel=2)
    return issues
