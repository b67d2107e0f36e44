"""Command-line driver.

    dirichlet-flows flow    --generator gen.json --t-end 1 --dt 1e-3 --out run/
    dirichlet-flows koenigs --generator gen.json --out run/
    dirichlet-flows matrix  --symbol sym.json --truncation 64 --out run/
    dirichlet-flows verify  --filter koenigs --out run/

Settings come from an optional JSON ``--config`` file whose keys are the
:class:`RunConfig` fields; flags given on the command line win. Outputs are
written atomically and carry the seed, so rerunning a config reproduces them
byte for byte.

Exit codes: 0 success, 1 numerical failure, 2 bad input.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import acceptance
from .hardy_operator import assemble_matrix, compression_norm
from .koenigs import InversionError, classify_dynamics, koenigs_from_generator, verify_abel
from .semigroup_flow import (
    FlowIntegrationError,
    Generator,
    InadmissibleGenerator,
    dropped_tail_rate,
    integrate_flow,
    pinning_residual,
)
from .serialization import (
    FormatError,
    atomic_write_text,
    flow_trace_csv,
    koenigs_to_json,
    load_series,
    load_symbol,
    matrix_csv,
    read_json,
    series_to_json,
    symbol_to_json,
    write_json,
)

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT = 0, 1, 2
COMMANDS = ("flow", "koenigs", "verify", "matrix")
ABEL_TOLERANCE = 1e-7


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    truncation: int | None = None  # None: use the input file's own
    dt: float = 1e-3
    t_end: float = 1.0
    sigma: float = 1.0
    seed: int = acceptance.DEFAULT_SEED
    generator: str | None = None
    symbol: str | None = None
    out: str = "."
    filter: str | None = None
    tolerance: float | None = None

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.truncation is not None and self.truncation < 1:
            raise InputError("truncation must be a positive integer")
        for name in ("dt", "t_end", "sigma"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InputError(f"{name} must be a positive number, got {v!r}")
        if self.dt > self.t_end:
            raise InputError("dt must not exceed t_end")
        if self.tolerance is not None and not (math.isfinite(self.tolerance) and self.tolerance >= 0):
            raise InputError("tolerance must be a non-negative number")
        if self.seed < 0:
            raise InputError("seed must be non-negative")
        for name in ("generator", "symbol"):
            p = getattr(self, name)
            if p is not None and not Path(p).is_file():
                raise InputError(f"{name} file not found: {p}")
        if self.command in ("flow", "koenigs") and self.generator is None:
            raise InputError(f"'{self.command}' needs --generator")
        if self.command == "matrix" and (self.generator is None) == (self.symbol is None):
            raise InputError("'matrix' needs exactly one of --symbol or --generator")
        return self

    def header(self) -> dict:
        # the output directory is left out so a rerun elsewhere gives the same bytes
        d = dataclasses.asdict(self)
        del d["out"]
        return d


_TYPES = {"truncation": int, "dt": float, "t_end": float, "sigma": float, "seed": int, "tolerance": float}


def load_config(path) -> dict:
    raw = read_json(path)
    if not isinstance(raw, dict):
        raise InputError(f"{path}: config must be a JSON object")
    fields = {f.name for f in dataclasses.fields(RunConfig)} - {"command"}
    unknown = sorted(set(raw) - fields)
    if unknown:
        raise InputError(f"{path}: unknown config keys {unknown}")
    out = {}
    for k, v in raw.items():
        if v is None or k not in _TYPES:
            out[k] = v
            continue
        kind = _TYPES[k]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or (kind is int and int(v) != v):
            raise InputError(f"{path}: '{k}' must be {kind.__name__}, got {v!r}")
        out[k] = kind(v)
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON file with RunConfig fields")
    common.add_argument("--out", metavar="DIR", help="output directory (default: current)")
    common.add_argument("--truncation", type=int, metavar="N")
    common.add_argument("--dt", type=float, metavar="X", help="RK4 step")
    common.add_argument("--t-end", dest="t_end", type=float, metavar="X")
    common.add_argument("--sigma", type=float, metavar="X")
    common.add_argument("--seed", type=int, metavar="K")
    common.add_argument("--filter", metavar="NAME", help="verify: section or criterion id")
    common.add_argument("--tolerance", type=float, metavar="X", help="override tolerance")
    common.add_argument("--generator", metavar="PATH", help="generator H as series JSON")
    common.add_argument("--symbol", metavar="PATH", help="symbol JSON")

    p = argparse.ArgumentParser(prog="dirichlet-flows", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("flow", parents=[common], help="integrate the flow of a generator")
    sub.add_parser("koenigs", parents=[common], help="Koenigs function and Abel residual")
    sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    sub.add_parser("matrix", parents=[common], help="composition operator matrix and norm")
    return p


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = load_config(args.config) if args.config else {}
    for f in dataclasses.fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    values["command"] = args.command
    return RunConfig(**values).validate()


def _generator(cfg: RunConfig) -> Generator:
    H = load_series(cfg.generator)
    if cfg.truncation is not None:
        H = H.resized(cfg.truncation)
    return Generator(H)


def _pair(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _out(cfg: RunConfig, name: str) -> Path:
    return Path(cfg.out) / name


# ---------------------------------------------------------------- commands


def cmd_flow(cfg: RunConfig) -> int:
    G = _generator(cfg)
    states = integrate_flow(G, cfg.t_end, cfg.dt)
    final = states[-1]
    header = [f"seed={cfg.seed}", f"truncation={G.truncation}", f"dt={cfg.dt!r}", f"t_end={cfg.t_end!r}"]
    atomic_write_text(_out(cfg, "flow_trace.csv"), flow_trace_csv(states, header))
    summary = {
        "config": cfg.header(),
        "seed": cfg.seed,
        "truncation": G.truncation,
        "t_final": final.t,
        "final_state": series_to_json(final.a),
        "Phi_final_at_1": _pair(final(1.0)),
        "a1_pinning_residual": pinning_residual(states, G),
        "dropped_tail_rate": dropped_tail_rate(final, G),
    }
    write_json(_out(cfg, "flow_summary.json"), summary)
    print(f"flow: {len(states)} states to t={final.t:g}, Phi(1) = {complex(final(1.0)):.12g}")
    print(f"a_1 pinning residual {summary['a1_pinning_residual']:.3e}, dropped tail rate {summary['dropped_tail_rate']:.3e}")
    return EXIT_OK


def cmd_koenigs(cfg: RunConfig) -> int:
    G = _generator(cfg)
    tol = ABEL_TOLERANCE if cfg.tolerance is None else cfg.tolerance
    h = koenigs_from_generator(G.H)  # InversionError when b_1 = 0
    kind = classify_dynamics(h)
    states = integrate_flow(G, cfg.t_end, cfg.dt)
    rep = verify_abel(h, states, acceptance.ORACLE_POINTS)
    ok = rep.max_residual <= tol
    write_json(_out(cfg, "koenigs.json"), koenigs_to_json(h))
    report = {
        "config": cfg.header(),
        "seed": cfg.seed,
        "truncation": h.truncation,
        "classification": kind.value,
        "abel_residual": rep.max_residual,
        "tolerance": tol,
        "passed": ok,
        "sample_points": [_pair(s) for s in acceptance.ORACLE_POINTS],
    }
    write_json(_out(cfg, "koenigs_report.json"), report)
    print(f"koenigs: d1 = {h.d1:.12g}, {kind.value}, Abel residual {rep.max_residual:.3e} (tol {tol:.1e})")
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_matrix(cfg: RunConfig) -> int:
    if cfg.symbol is not None:
        P = load_symbol(cfg.symbol)
        source = {"symbol": cfg.symbol}
    else:
        G = _generator(cfg)
        P = integrate_flow(G, cfg.t_end, cfg.dt)[-1].symbol
        source = {"generator": cfg.generator, "t": cfg.t_end}
    N = cfg.truncation or P.truncation
    M = assemble_matrix(P, N)
    norm = compression_norm(M)
    header = [f"seed={cfg.seed}", f"dimension={N}"]
    atomic_write_text(_out(cfg, "matrix.csv"), matrix_csv(M, header))
    summary = {"config": cfg.header(), "seed": cfg.seed, "dimension": N, "norm_estimate": norm, "source": source}
    if cfg.generator is not None:
        summary["symbol"] = symbol_to_json(P)
    write_json(_out(cfg, "matrix_summary.json"), summary)
    print(f"matrix: dimension {N}, compression norm {norm:.12g}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    try:
        checks = acceptance.select(cfg.filter)
    except KeyError as exc:
        raise InputError(exc.args[0]) from None
    results = acceptance.run_suite(seed=cfg.seed, tolerance=cfg.tolerance, checks=checks, echo=print)
    passed = sum(r.passed for r in results)
    report = {
        "config": cfg.header(),
        "seed": cfg.seed,
        "passed": passed,
        "failed": len(results) - passed,
        "results": [r.to_json() for r in results],
    }
    write_json(_out(cfg, "verify_report.json"), report)
    print(f"{passed}/{len(results)} checks passed")
    return EXIT_OK if passed == len(results) else EXIT_NUMERIC


HANDLERS = {"flow": cmd_flow, "koenigs": cmd_koenigs, "verify": cmd_verify, "matrix": cmd_matrix}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return HANDLERS[cfg.command](cfg)
    except (FormatError, InputError, InadmissibleGenerator) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InversionError, FlowIntegrationError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # raised by the numerical modules for inputs outside their domain
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
