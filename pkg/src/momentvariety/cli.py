"""Command-line front end.

Every output is a JSON document with a ``config`` header (the resolved
``RunConfig``) followed by the payload.  Exit codes: 0 success, 2 invalid
input, 3 numerical failure (including a FAIL in ``reproduce``).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, reproduce, schemas
from .densityrecovery import full_pipeline
from .errors import NumericalError, ValidationError
from .idealrecovery import DeltaBound, Fixed, Stabilize, recover_truncated_ideal
from .measures import MomentTable, QuadratureConfig, body_from_json, body_to_json, moments, spec_from_json
from .momentmatrix import assemble
from .pronysolver import prony

log = logging.getLogger("momentvariety")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


@dataclass
class RunConfig:
    command: str
    seed: int = 42
    tol: float | str = "auto"
    threads: int = 1
    version: str = __version__
    args: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


# -- I/O helpers --------------------------------------------------------------------------


def _read_json(path: str, schema: dict, what: str) -> dict:
    try:
        obj = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ValidationError(f"{what} file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{what} file is not valid JSON: {exc}") from exc
    schemas.validate(obj, schema, what)
    return obj


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(args, payload: dict, schema: dict):
    schemas.validate(payload, schema, "output")
    text = _dump(payload)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _tol(value: str) -> float | str:
    if value == "auto":
        return value
    try:
        tol = float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"tolerance must be a float or 'auto', got {value!r}") from exc
    if not 0 < tol < 1:
        raise argparse.ArgumentTypeError("tolerance must lie in (0, 1)")
    return tol


def _config(args) -> RunConfig:
    skip = {"func", "out", "command", "seed", "tol", "threads", "verbose"}
    extra = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return RunConfig(args.command, args.seed, args.tol, args.threads, args=extra)


def _load_table(path: str) -> MomentTable:
    return MomentTable.from_json(_read_json(path, schemas.MOMENT_TABLE, "moment table"))


def _quadrature(args) -> QuadratureConfig:
    return QuadratureConfig(
        nodes=getattr(args, "nodes", None),
        tol=getattr(args, "quad_tol", 1e-12),
        check=not getattr(args, "no_check", False),
        exact_characters=not getattr(args, "no_exact_characters", False),
        threads=args.threads,
    )


# -- subcommands -------------------------------------------------------------------------


def cmd_moments(args) -> int:
    spec = spec_from_json(_read_json(args.spec, schemas.MEASURE_SPEC, "measure spec"))
    table = moments(spec, args.degree, _quadrature(args))
    _emit(args, {"config": _config(args).to_json(), **table.to_json()}, schemas.MOMENTS_OUTPUT)
    return EXIT_OK


def cmd_matrix(args) -> int:
    table = _load_table(args.moments)
    H = assemble(table, args.rows, args.cols, row_ring=args.row_ring, col_ring=args.col_ring)
    s = np.linalg.svd(H.values, compute_uv=False) if H.values.size else np.zeros(0)
    if args.singular_values_csv:
        Path(args.singular_values_csv).write_text("".join(f"{i},{x!r}\n" for i, x in enumerate(s)))
    if args.format == "csv":
        text = H.to_csv()
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    payload = {"config": _config(args).to_json(), **H.to_json(), "singular_values": [float(x) for x in s]}
    _emit(args, payload, schemas.MATRIX_OUTPUT)
    return EXIT_OK


def _row_policy(args):
    if args.stabilize:
        return Stabilize(max=args.max_row_degree)
    if args.row_degree is not None:
        return Fixed(args.row_degree)
    return DeltaBound(args.delta)


def cmd_support(args) -> int:
    table = _load_table(args.moments)
    row_ring = args.rows or table.space.default_ring().value
    ideal = recover_truncated_ideal(
        table, args.degree, _row_policy(args), tol=args.tol, row_ring=row_ring, col_ring=args.cols
    )
    const = ideal.contains_constant()
    payload = {
        "config": _config(args).to_json(),
        "ideal": ideal.to_json(),
        "constant_in_kernel": const,
        "row_degree": ideal.history[-1],
        "rows": row_ring,
        "status": "constant in kernel: recovery impossible" if const else "ok",
    }
    if const:
        log.warning("constant in kernel: recovery impossible with these rows")
    _emit(args, payload, schemas.SUPPORT_OUTPUT)
    return EXIT_OK


def cmd_prony(args) -> int:
    table = _load_table(args.moments)
    rank = args.rank if args.rank == "auto" else int(args.rank)
    rec, ideal = prony(table, args.degree, rank=rank, seed=args.seed, tol=args.tol)
    payload = {"config": _config(args).to_json(), **rec.to_json(), "rank": rec.rank,
               "singular_values": list(ideal.report.singular_values)}
    _emit(args, payload, schemas.PRONY_OUTPUT)
    return EXIT_OK


def cmd_density(args) -> int:
    table = _load_table(args.moments)
    curve = None
    if args.curve:
        curve = body_from_json(_read_json(args.curve, schemas.BODY, "curve"))
    out = full_pipeline(table, args.degree, args.delta, curve, _quadrature(args), seed=args.seed, tol=args.tol)
    payload = {
        "config": _config(args).to_json(),
        "ideal": out.ideal.to_json(),
        "density": out.density.to_json(),
        "curve": None if out.atoms is not None else body_to_json(out.curve),
        "hints": [{"kind": name, "curve": body_to_json(body)} for name, body in out.hints],
    }
    if out.atoms is not None:
        payload["atoms"] = out.atoms.to_json()
    _emit(args, payload, schemas.DENSITY_OUTPUT)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    ids = list(reproduce.EXAMPLES) if args.example == ["all"] else args.example
    unknown = [i for i in ids if i not in reproduce.EXAMPLES]
    if unknown:
        raise ValidationError(f"unknown example id(s) {unknown}; choose from {sorted(reproduce.EXAMPLES)} or 'all'")
    reports = []
    for i in ids:
        rep = reproduce.EXAMPLES[i]()
        reports.append(rep)
        print(f"{'PASS' if rep.passed else 'FAIL'} {i}")
    payload = {"config": _config(args).to_json(), "reports": [r.to_json() for r in reports]}
    if args.out:
        _emit(args, payload, schemas.REPRODUCE_OUTPUT)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_NUMERICAL


# -- parser ------------------------------------------------------------------------------


def _global_flags(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(42), help="RNG seed (default 42)")
    p.add_argument("--tol", type=_tol, default=d("auto"), help="rank tolerance: 'auto' or relative float")
    p.add_argument("--threads", type=int, default=d(1), help="worker threads for quadrature")
    p.add_argument("--out", default=d(None), help="output path (default stdout)")
    p.add_argument("-v", "--verbose", action="store_true", default=d(False))


def _quad_flags(p):
    p.add_argument("--nodes", type=int, default=None, help="quadrature nodes (default: degree-based)")
    p.add_argument("--quad-tol", type=float, default=1e-12, help="quadrature refinement tolerance")
    p.add_argument("--no-check", action="store_true", help="skip the quadrature refinement check")
    p.add_argument("--no-exact-characters", action="store_true",
                   help="integrate subtorus curves numerically instead of exactly")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="momentvariety", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        _global_flags(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("moments", cmd_moments, "moment table of a measure spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--degree", type=int, required=True)
    _quad_flags(p)

    p = add("matrix", cmd_matrix, "assemble a moment matrix H_{d',d}")
    p.add_argument("--moments", required=True)
    p.add_argument("--rows", type=int, required=True, help="row degree d'")
    p.add_argument("--cols", type=int, required=True, help="column degree d")
    p.add_argument("--row-ring", choices=["R", "L"], default=None)
    p.add_argument("--col-ring", choices=["R", "L"], default="R")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--singular-values-csv", default=None)

    p = add("support", cmd_support, "truncated vanishing ideal from a kernel")
    p.add_argument("--moments", required=True)
    p.add_argument("--degree", type=int, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--delta", type=int, default=0, help="row degree d + delta (default 0)")
    g.add_argument("--row-degree", type=int, default=None)
    g.add_argument("--stabilize", action="store_true", help="raise d' until the kernel stabilizes")
    p.add_argument("--max-row-degree", type=int, default=12)
    p.add_argument("--rows", choices=["R", "L"], default=None, help="row ring (default: L on the torus)")
    p.add_argument("--cols", choices=["R", "L"], default="R")

    p = add("prony", cmd_prony, "atoms and weights of a finitely supported measure")
    p.add_argument("--moments", required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--rank", default="auto")

    p = add("density", cmd_density, "variety plus density recovery")
    p.add_argument("--moments", required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--curve", default=None, help="curve JSON; omitted: hints or finite support")
    _quad_flags(p)

    p = add("reproduce", cmd_reproduce, "run scripted examples and score them")
    p.add_argument("example", nargs="+", help=f"one of {', '.join(reproduce.EXAMPLES)} or 'all'")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 1:
        parser.error("--threads must be positive")
    if args.command == "prony" and args.rank != "auto":
        try:
            int(args.rank)
        except ValueError:
            parser.error("--rank must be an integer or 'auto'")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
