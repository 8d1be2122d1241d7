"""Command-line interface.

Subcommands load operator data from JSON, run one computation, and write
a JSON (or CSV) result with a provenance block.  Exit codes: 0 success,
1 validation failure, 2 numerical non-convergence, 3 I/O or schema error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    ComplexityCap,
    DimensionMismatch,
    NoConvergence,
    NotHermitian,
    Overflow,
    PairingInputInvalid,
    PNotFixed,
    ValidationFailure,
    ZeroMomentumViolation,
)
from .homotopy import (
    beta_independence,
    endpoint_grid,
    linear_family,
    sweep_invariant,
)
from .jlo import PairingInput, equivariant_index, jlo_component, pairing
from .selftest import format_table, run_selftest
from .serialization import (
    csv_text,
    dumps_canonical,
    matrix_from_json,
    split_from_json,
    triple_from_json,
)
from .split import SplitTriple, coupling_sweep, split_pairing, validate_split
from .triples import validate_triple

_VALIDATION_ERRORS = (ValidationFailure, PairingInputInvalid, NotHermitian,
                      PNotFixed, ZeroMomentumViolation)
_NUMERIC_ERRORS = (NoConvergence, Overflow, ComplexityCap)


def _parse_grid(text: str) -> np.ndarray:
    try:
        a, b, n = text.split(":")
        grid = np.linspace(float(a), float(b), int(n))
    except ValueError as exc:
        raise DimensionMismatch(f"cannot parse grid {text!r}, expected a:b:n") from exc
    if len(grid) > 1 and not np.all(np.diff(grid) > 0):
        raise DimensionMismatch(f"grid {text!r} must be strictly increasing")
    return grid


def _parse_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _load_json(path: str) -> dict:
    return json.loads(Path(path).read_text())


def _provenance(args) -> dict:
    return {
        "package_version": __version__,
        "seed": args.seed,
        "tol": args.tol,
        "quad_nodes": args.quad_nodes,
        "max_level": args.max_level,
    }


def _emit(args, payload: dict):
    text = dumps_canonical(payload)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)


def _emit_csv(args, rows):
    text = csv_text(rows)
    if args.output:
        Path(args.output).write_text(text)
    else:
        print(text, end="")


def _pairing_input(doc: dict, t_dim: int, g: int) -> PairingInput:
    if "a" not in doc:
        raise DimensionMismatch("input JSON is missing key 'a'")
    spec = doc["a"]
    if isinstance(spec, dict):
        return PairingInput(
            a=matrix_from_json(spec["matrix"]), m=int(spec.get("m", 1)), g=g
        )
    return PairingInput(a=matrix_from_json(spec), m=1, g=g)


def _cmd_validate(args):
    doc = _load_json(args.input)
    if "Q1" in doc or "split" in doc:
        s = split_from_json(doc.get("split", doc))
        rep = validate_split(s)
    else:
        rep = validate_triple(triple_from_json(doc.get("triple", doc)))
    payload = {
        "command": "validate",
        "provenance": _provenance(args),
        "passed": rep.passed,
        "checks": [
            {"name": c.name, "residual": c.residual, "tol": c.tol, "passed": c.passed}
            for c in rep.checks
        ],
    }
    _emit(args, payload)
    return 0 if rep.passed else 1


def _require_triple(doc: dict):
    t = triple_from_json(doc.get("triple", doc))
    rep = validate_triple(t)
    if not rep.passed:
        raise ValidationFailure(
            "triple fails validation:\n" + "\n".join(str(c) for c in rep.failures),
            report=rep,
        )
    return t


def _cmd_index(args):
    t = _require_triple(_load_json(args.input))
    values = [equivariant_index(t, g) for g in range(len(t.group))]
    _emit(
        args,
        {
            "command": "index",
            "provenance": _provenance(args),
            "values": [[v.real, v.imag] for v in values],
        },
    )
    return 0


def _cmd_pair(args):
    doc = _load_json(args.input)
    t = _require_triple(doc)
    inp = _pairing_input(doc, t.dim, args.group_index)
    res = pairing(
        t, inp, quad_nodes=args.quad_nodes, max_level=args.max_level, tol=args.tol
    )
    _emit(
        args,
        {
            "command": "pair",
            "provenance": _provenance(args),
            "value": [res.value.real, res.value.imag],
            "series_value": [res.series_value.real, res.series_value.imag],
            "quadrature_value": [
                res.quadrature_value.real,
                res.quadrature_value.imag,
            ],
            "truncation_level": res.truncation_level,
            "tail_bound": res.tail_bound,
            "connes_value": [res.connes_value.real, res.connes_value.imag],
        },
    )
    return 0


def _cmd_jlo(args):
    doc = _load_json(args.input)
    t = _require_triple(doc)
    if "tuple" not in doc:
        raise DimensionMismatch("input JSON is missing key 'tuple'")
    mats = [matrix_from_json(m) for m in doc["tuple"]]
    n = len(mats) - 1
    if args.method == "exact":
        val = jlo_component(t, n, mats, args.group_index)
        err = 0.0
    else:
        from .expectations import heat_expectation
        from .triples import derivative

        verts = [mats[0]] + [derivative(t, m) for m in mats[1:]]
        ev = heat_expectation(
            t, verts, args.group_index, method="quadrature", seed=args.seed
        )
        val, err = ev.value, ev.estimated_error
    _emit(
        args,
        {
            "command": "jlo",
            "provenance": _provenance(args),
            "level": n,
            "method": args.method,
            "value": [val.real, val.imag],
            "estimated_error": err,
        },
    )
    return 0


def _cmd_sweep(args):
    doc = _load_json(args.input)
    t = _require_triple(doc)
    if "q" not in doc:
        raise DimensionMismatch("input JSON is missing key 'q' (linear family)")
    q = matrix_from_json(doc["q"])
    fam = linear_family(t, q)
    rep = fam.validate_at(0.0)
    if not rep.passed:
        raise ValidationFailure(
            "family fails validation:\n" + "\n".join(str(c) for c in rep.failures),
            report=rep,
        )
    inp = _pairing_input(doc, t.dim, args.group_index)
    grid = _parse_grid(args.lambda_grid)
    tab = sweep_invariant(fam, inp, grid, quad_nodes=args.quad_nodes, tol=args.tol)
    if args.format == "csv":
        _emit_csv(args, tab.to_csv_rows())
    else:
        _emit(
            args,
            {
                "command": "sweep",
                "provenance": _provenance(args),
                "table": tab.to_jsonable(),
            },
        )
    return 0


def _cmd_beta_scan(args):
    doc = _load_json(args.input)
    t = _require_triple(doc)
    inp = _pairing_input(doc, t.dim, args.group_index)
    betas = _parse_list(args.beta_list)
    tab = beta_independence(t, inp, betas, quad_nodes=args.quad_nodes, tol=args.tol)
    if args.format == "csv":
        _emit_csv(args, tab.to_csv_rows())
    else:
        _emit(
            args,
            {
                "command": "beta-scan",
                "provenance": _provenance(args),
                "table": tab.to_jsonable(),
            },
        )
    return 0


def _cmd_endpoint(args):
    doc = _load_json(args.input)
    t = _require_triple(doc)
    for key in ("q", "regularizer"):
        if key not in doc:
            raise DimensionMismatch(f"input JSON is missing key {key!r}")
    fam = linear_family(
        t, matrix_from_json(doc["q"]), regularizer=matrix_from_json(doc["regularizer"])
    )
    inp = _pairing_input(doc, t.dim, args.group_index)
    tab = endpoint_grid(
        fam,
        _parse_grid(args.eps_grid),
        _parse_grid(args.lambda_grid),
        inp,
        quad_nodes=args.quad_nodes,
        tol=args.tol,
    )
    if args.format == "csv":
        _emit_csv(args, tab.to_csv_rows())
    else:
        _emit(
            args,
            {
                "command": "endpoint",
                "provenance": _provenance(args),
                "table": tab.to_jsonable(),
            },
        )
    return 0


def _require_split(doc: dict) -> SplitTriple:
    s = split_from_json(doc.get("split", doc))
    rep = validate_split(s)
    if not rep.passed:
        raise ValidationFailure(
            "split triple fails validation:\n"
            + "\n".join(str(c) for c in rep.failures),
            report=rep,
        )
    return s


def _cmd_split_pair(args):
    doc = _load_json(args.input)
    s = _require_split(doc)
    inp = _pairing_input(doc, s.dim, args.group_index)
    res = split_pairing(
        s, inp, quad_nodes=args.quad_nodes, max_level=args.max_level, tol=args.tol
    )
    _emit(
        args,
        {
            "command": "split-pair",
            "provenance": _provenance(args),
            "value": [res.value.real, res.value.imag],
            "series_value": [res.series_value.real, res.series_value.imag],
            "quadrature_value": [
                res.quadrature_value.real,
                res.quadrature_value.imag,
            ],
            "truncation_level": res.truncation_level,
            "tail_bound": res.tail_bound,
        },
    )
    return 0


def _cmd_coupling_sweep(args):
    doc = _load_json(args.input)
    s = _require_split(doc)
    if "q2_tilde" not in doc:
        raise DimensionMismatch("input JSON is missing key 'q2_tilde'")
    qt2 = matrix_from_json(doc["q2_tilde"])
    q1, q2, gam, grp, tol = s.Q1, s.Q2, s.gamma, list(s.group), s.tol

    def family(lam: float) -> SplitTriple:
        return SplitTriple(
            dim=s.dim,
            Q1=q1,
            Q2=np.cos(lam) * q2 + np.sin(lam) * qt2,
            gamma=gam,
            group=grp,
            tol=tol,
        )

    inp = _pairing_input(doc, s.dim, args.group_index)
    tab = coupling_sweep(
        family,
        inp,
        _parse_grid(args.lambda_grid),
        mode=args.mode,
        quad_nodes=args.quad_nodes,
        tol=args.tol,
    )
    if args.format == "csv":
        _emit_csv(args, tab.to_csv_rows())
    else:
        _emit(
            args,
            {
                "command": "coupling-sweep",
                "provenance": _provenance(args),
                "table": tab.to_jsonable(),
            },
        )
    return 0


def _cmd_selftest(args):
    report = run_selftest(seed=args.seed)
    payload = {
        "command": "selftest",
        "provenance": _provenance(args),
        "report": report,
    }
    if args.output:
        Path(args.output).write_text(dumps_canonical(payload) + "\n")
    print(format_table(report))
    return 0 if report["passed"] else 1


_COMMANDS = {
    "validate": _cmd_validate,
    "index": _cmd_index,
    "pair": _cmd_pair,
    "jlo": _cmd_jlo,
    "sweep": _cmd_sweep,
    "beta-scan": _cmd_beta_scan,
    "endpoint": _cmd_endpoint,
    "split-pair": _cmd_split_pair,
    "coupling-sweep": _cmd_coupling_sweep,
    "selftest": _cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="heatchern",
        description="heat-kernel characters, pairings, and invariance sweeps",
    )
    p.add_argument("command", choices=sorted(_COMMANDS))
    p.add_argument("--input", help="input JSON path")
    p.add_argument("--output", help="output path (default: stdout)")
    p.add_argument("--quad-nodes", type=int, default=64, dest="quad_nodes")
    p.add_argument("--max-level", type=int, default=32, dest="max_level")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--group-index", type=int, default=0, dest="group_index")
    p.add_argument("--lambda-grid", default="0:1:11", dest="lambda_grid")
    p.add_argument("--eps-grid", default="0:0.5:6", dest="eps_grid")
    p.add_argument("--beta-list", default="0.5,1,2", dest="beta_list")
    p.add_argument("--method", choices=["exact", "quadrature"], default="exact")
    p.add_argument("--mode", choices=["coupling", "q1_commuting"], default="coupling")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cmd = _COMMANDS[args.command]
    needs_input = args.command != "selftest"
    try:
        if needs_input:
            if not args.input:
                raise FileNotFoundError("--input is required for this command")
            if not Path(args.input).exists():
                raise FileNotFoundError(f"input file {args.input!r} not found")
        return cmd(args)
    except _VALIDATION_ERRORS as exc:
        _print_error(args, exc)
        return 1
    except _NUMERIC_ERRORS as exc:
        _print_error(args, exc)
        return 2
    except (OSError, json.JSONDecodeError, KeyError, DimensionMismatch, ValueError) as exc:
        _print_error(args, exc)
        return 3


def _print_error(args, exc):
    obj = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    text = dumps_canonical(obj)
    if args.output:
        try:
            Path(args.output).write_text(text + "\n")
        except OSError:
            pass
    print(text, file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
