"""JSON and CSV formats for series, symbols, Koenigs functions, flow traces and matrices.

Complex numbers are stored as ``[re, im]`` pairs. Floats go through ``repr`` so a
round trip is lossless and identical inputs give byte-identical files. Every
writer goes through a temporary file in the target directory followed by
``os.replace``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .dirichlet_core import TruncatedDirichletSeries
from .gh_symbol import GHSymbol
from .hardy_operator import OperatorMatrix
from .koenigs import KoenigsFunction
from .semigroup_flow import FlowState


class FormatError(ValueError):
    """Input file does not follow the expected layout."""


# ---------------------------------------------------------------- low level


def atomic_write_text(path: str | os.PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def dumps(obj: Any) -> str:
    """Deterministic JSON (sorted keys, 2-space indent, trailing newline)."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj: Any) -> Path:
    return atomic_write_text(path, dumps(obj))


def read_json(path) -> Any:
    """Parse a JSON file; syntax errors become :class:`FormatError` with line and column."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"{path}: cannot read ({exc.strerror or exc})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _complex(item, where: str) -> complex:
    if isinstance(item, (int, float)) and not isinstance(item, bool):
        z = complex(item)
    elif isinstance(item, (list, tuple)) and len(item) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in item
    ):
        z = complex(item[0], item[1])
    else:
        raise FormatError(f"{where}: expected [re, im], got {item!r}")
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise FormatError(f"{where}: non-finite value {item!r}")
    return z


def _complex_list(items, where: str) -> np.ndarray:
    if not isinstance(items, list):
        raise FormatError(f"{where}: expected a list")
    return np.array([_complex(v, f"{where}[{i}]") for i, v in enumerate(items)], dtype=np.complex128)


# ---------------------------------------------------------------- series / symbols


def series_to_json(f: TruncatedDirichletSeries) -> dict:
    return {"truncation": f.truncation, "coeffs": [_pair(z) for z in f.coeffs]}


def series_from_json(obj, where: str = "series") -> TruncatedDirichletSeries:
    if not isinstance(obj, Mapping):
        raise FormatError(f"{where}: expected an object with 'truncation' and 'coeffs'")
    for key in ("truncation", "coeffs"):
        if key not in obj:
            raise FormatError(f"{where}: missing '{key}'")
    N = obj["truncation"]
    if not isinstance(N, int) or isinstance(N, bool) or N < 1:
        raise FormatError(f"{where}.truncation: expected a positive integer, got {N!r}")
    a = _complex_list(obj["coeffs"], f"{where}.coeffs")
    if a.size != N:
        raise FormatError(f"{where}: truncation is {N} but {a.size} coefficients given")
    return TruncatedDirichletSeries(a)


def symbol_to_json(P: GHSymbol) -> dict:
    return {"characteristic": P.characteristic, "phi": series_to_json(P.phi)}


def symbol_from_json(obj, where: str = "symbol") -> GHSymbol:
    if not isinstance(obj, Mapping) or "characteristic" not in obj or "phi" not in obj:
        raise FormatError(f"{where}: expected an object with 'characteristic' and 'phi'")
    c = obj["characteristic"]
    if not isinstance(c, int) or isinstance(c, bool) or c < 0:
        raise FormatError(f"{where}.characteristic: expected a non-negative integer, got {c!r}")
    return GHSymbol(c, series_from_json(obj["phi"], f"{where}.phi"))


def koenigs_to_json(h: KoenigsFunction) -> dict:
    return {"d1": _pair(h.d1), "tail": [_pair(z) for z in h.tail]}


def koenigs_from_json(obj, where: str = "koenigs") -> KoenigsFunction:
    if not isinstance(obj, Mapping) or "d1" not in obj or "tail" not in obj:
        raise FormatError(f"{where}: expected an object with 'd1' and 'tail'")
    return KoenigsFunction(_complex(obj["d1"], f"{where}.d1"), _complex_list(obj["tail"], f"{where}.tail"))


def load_series(path) -> TruncatedDirichletSeries:
    return series_from_json(read_json(path), str(path))


def load_symbol(path) -> GHSymbol:
    return symbol_from_json(read_json(path), str(path))


# ---------------------------------------------------------------- CSV


def _csv_text(header_lines: Sequence[str], columns: Sequence[str], rows) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def flow_trace_csv(states: Sequence[FlowState], header: Sequence[str] = ()) -> str:
    """Long format: one row per ``(t, n)`` with ``n`` in the support of ``phi_t``.

    The ``t = 0`` state (all zeros) is written as a single ``n = 1`` row so
    every time appears.
    """

    def rows():
        for st in states:
            a = st.a.coeffs
            idx = np.flatnonzero(a)
            if idx.size == 0:
                idx = np.array([0])
            for i in idx:
                yield (float(st.t), int(i) + 1, float(a[i].real), float(a[i].imag))

    return _csv_text(header, ("t", "n", "re_a", "im_a"), rows())


def read_flow_trace(path) -> dict[float, dict[int, complex]]:
    out: dict[float, dict[int, complex]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    for k, row in enumerate(csv.DictReader(lines), start=2):
        try:
            t, n = float(row["t"]), int(row["n"])
            out.setdefault(t, {})[n] = complex(float(row["re_a"]), float(row["im_a"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}: data row {k}: {exc}") from exc
    return out


def matrix_csv(M: OperatorMatrix, header: Sequence[str] = ()) -> str:
    """Dense, 1-based ``row, col, re, im``; row ``n`` and column ``m`` as in ``M[n][m]``."""
    E = M.entries
    N = M.dimension

    def rows():
        for n in range(N):
            for m in range(N):
                z = E[n, m]
                yield (n + 1, m + 1, float(z.real), float(z.imag))

    return _csv_text(header, ("row", "col", "re", "im"), rows())
