"""Command-line front end driven by a JSON problem file.

Exit codes: 0 success, 1 hypothesis or constraint violation, 2 solver
non-convergence, 3 I/O or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import boundary_norms, classify_limits, existence_check
from .errors import DivergenceError, HypothesisViolation, InvalidProblem, SchemaError
from .problem import ProblemSpec, nonlinearity_from_dict, number_field
from .solver import SolverConfig, solve
from .timescale import GridFunction, TimeScale, delta_antiderivative, delta_integral
from .timescale import nabla_antiderivative, nabla_integral

EXIT_OK, EXIT_HYPOTHESIS, EXIT_NONCONVERGED, EXIT_IO = 0, 1, 2, 3

SUBCOMMANDS = ("solve", "check-existence", "classify", "quadrature-demo")

_num = {"type": "number"}
_num_or_null = {"type": ["number", "null"]}
_bool_or_null = {"type": ["boolean", "null"]}
_num_list = {"type": "array", "items": _num}

PROVENANCE_SCHEMA = {
    "type": "object",
    "required": ["subcommand", "problem_path", "format", "overrides", "problem", "version"],
}

SOLVE_SCHEMA = {
    "type": "object",
    "required": ["t", "u", "converged", "iterations", "residual_sup", "boundary", "cone", "provenance"],
    "properties": {
        "t": _num_list,
        "u": _num_list,
        "converged": {"type": "boolean"},
        "iterations": {"type": "integer", "minimum": 1},
        "history": _num_list,
        "residual_sup": _num,
        "boundary": {
            "type": "object",
            "required": ["r1", "r2"],
            "properties": {"r1": _num, "r2": _num},
        },
        "cone": {
            "type": "object",
            "required": ["nonneg", "concave", "harnack", "rho_cone"],
            "properties": {
                "nonneg": {"type": "boolean"},
                "concave": {"type": "boolean"},
                "harnack": {"type": "boolean"},
                "rho_cone": _num,
            },
        },
        "clamped": {"type": "integer", "minimum": 0},
        "outside_bracket": _bool_or_null,
        "provenance": PROVENANCE_SCHEMA,
    },
}

EXISTENCE_SCHEMA = {
    "type": "object",
    "required": [
        "a", "b", "A1", "B1", "H2_holds", "H3_holds", "H2_chain_holds", "H3_chain_holds",
        "chain_a", "chain_b", "lambda_star", "samples", "provenance",
    ],
    "properties": {
        "a": _num,
        "b": _num,
        "A1": _num_or_null,
        "B1": _num,
        "H2_holds": _bool_or_null,
        "H3_holds": {"type": "boolean"},
        "chain_a": _num_or_null,
        "chain_b": _num,
        "lambda_star": _num_or_null,
        "samples": {
            "type": "object",
            "required": ["n", "seed", "max_norm_G_on_a", "min_norm_G_on_b"],
        },
        "provenance": PROVENANCE_SCHEMA,
    },
}

CLASSIFY_SCHEMA = {
    "type": "object",
    "required": ["f0", "finf", "corollary_applies", "provenance"],
    "properties": {
        "f0": {"enum": ["zero", "finite", "infinite", "inconclusive"]},
        "finf": {"enum": ["zero", "finite", "infinite", "inconclusive"]},
        "corollary_applies": {"type": "boolean"},
        "provenance": PROVENANCE_SCHEMA,
    },
}

QUADRATURE_SCHEMA = {
    "type": "object",
    "required": ["t", "mu", "nu", "delta_integral", "nabla_integral", "provenance"],
    "properties": {"t": _num_list, "mu": _num_list, "nu": _num_list},
}

ERROR_SCHEMA = {
    "type": "object",
    "required": ["error", "exit_code"],
    "properties": {
        "error": {
            "type": "object",
            "required": ["type", "message", "pointer"],
            "properties": {"type": {"type": "string"}, "message": {"type": "string"}},
        },
        "exit_code": {"enum": [1, 2, 3]},
    },
}

OUTPUT_SCHEMAS = {
    "solve": SOLVE_SCHEMA,
    "check-existence": EXISTENCE_SCHEMA,
    "classify": CLASSIFY_SCHEMA,
    "quadrature-demo": QUADRATURE_SCHEMA,
}


class ProblemFileError(Exception):
    """The problem file could not be read or parsed."""

    def __init__(self, message, pointer=""):
        super().__init__(message)
        self.pointer = pointer


@dataclass
class LoadedProblem:
    spec: ProblemSpec
    solver: SolverConfig
    # norm levels for the existence check, None when absent
    a: float | None = None
    b: float | None = None


@dataclass
class RunConfig:
    subcommand: str
    problem_path: str
    output_path: str | None = None  # None writes to standard output
    format: str = "json"
    overrides: dict = field(default_factory=dict)
    samples: int = 200


def _prefix(exc: InvalidProblem, where: str):
    exc.pointer = where + exc.pointer
    return exc


def parse_problem(doc) -> LoadedProblem:
    """Validate a decoded problem document."""
    if not isinstance(doc, dict):
        raise SchemaError("problem document must be a JSON object", "")
    if "timescale" not in doc:
        raise SchemaError("missing field 'timescale'", "/timescale")
    try:
        ts = TimeScale.from_dict(doc["timescale"])
    except InvalidProblem as exc:
        raise _prefix(exc, "/timescale")
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"malformed time scale: {exc}", "/timescale") from None
    vals = {key: number_field(doc, key, "") for key in ("p", "k", "lambda", "beta", "eta")}
    if "f" not in doc:
        raise SchemaError("missing field 'f'", "/f")
    f = nonlinearity_from_dict(doc["f"])
    eta = vals["eta"]
    if ts.contains(eta) and 0 < eta < ts.t_max:
        ts = TimeScale(ts.components, ts.h_max, knots=(eta,))
    spec = ProblemSpec(vals["p"], vals["k"], vals["lambda"], vals["beta"], eta, ts, f)

    sol = doc.get("solver", {})
    if not isinstance(sol, dict):
        raise SchemaError("'solver' must be an object", "/solver")
    kw = {}
    for key in (fld.name for fld in fields(SolverConfig)):
        if key in sol:
            v = number_field(sol, key, "/solver")
            kw[key] = int(v) if key in ("max_iter", "seed") else v
            if key in ("max_iter", "seed") and v != int(v):
                raise SchemaError(f"'{key}' must be an integer", f"/solver/{key}")
    cfg = SolverConfig(**kw)

    ex = doc.get("existence", {})
    if not isinstance(ex, dict):
        raise SchemaError("'existence' must be an object", "/existence")
    a = number_field(ex, "a", "/existence") if "a" in ex else None
    b = number_field(ex, "b", "/existence") if "b" in ex else None
    for name, v in (("a", a), ("b", b)):
        if v is not None and not v > 0:
            raise InvalidProblem(f"norm level {name} must be > 0", f"/existence/{name}")
    return LoadedProblem(spec, cfg, a, b)


def load_problem(path) -> LoadedProblem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ProblemFileError(f"cannot read problem file: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"invalid JSON: {exc}") from None
    return parse_problem(doc)


def apply_overrides(lp: LoadedProblem, ov: dict) -> LoadedProblem:
    spec, cfg, a, b = lp.spec, lp.solver, lp.a, lp.b
    if ov.get("lambda") is not None:
        spec = spec.with_lambda(ov["lambda"])
    cfg_kw = {k: ov[k] for k in ("tol", "max_iter", "seed") if ov.get(k) is not None}
    if cfg_kw:
        cfg = replace(cfg, **cfg_kw)
    a = ov["a"] if ov.get("a") is not None else a
    b = ov["b"] if ov.get("b") is not None else b
    for name, v in (("a", a), ("b", b)):
        if v is not None and not v > 0:
            raise InvalidProblem(f"norm level {name} must be > 0", f"/existence/{name}")
    return LoadedProblem(spec, cfg, a, b)


# output ----------------------------------------------------------------------


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _emit(text: str, path):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _provenance(cfg: RunConfig, lp: LoadedProblem | None) -> dict:
    prov = {
        "subcommand": cfg.subcommand,
        "problem_path": str(cfg.problem_path),
        "format": cfg.format,
        "overrides": {k: v for k, v in cfg.overrides.items() if v is not None},
        "problem": None,
        "version": __version__,
    }
    if lp is not None:
        prov["problem"] = lp.spec.to_dict()
        prov["solver"] = asdict(lp.solver)
        prov["existence"] = {"a": lp.a, "b": lp.b}
    return prov


def _solve_doc(lp: LoadedProblem):
    bracket = (lp.a, lp.b) if lp.a is not None and lp.b is not None else None
    rep = solve(lp.spec, lp.solver, bracket=bracket)
    doc = {
        "t": rep.solution.t.tolist(),
        "u": rep.solution.values.tolist(),
        "converged": rep.converged,
        "iterations": rep.iterations,
        "history": rep.history,
        "residual_sup": rep.residual_sup,
        "boundary": {"r1": rep.boundary[0], "r2": rep.boundary[1]},
        "cone": rep.cone.to_dict(),
        "clamped": rep.clamped,
        "outside_bracket": rep.outside_bracket,
        "notes": rep.notes,
    }
    table = (("t", "u"), zip(doc["t"], doc["u"]))
    extra = {"history": (("iteration", "step"), enumerate(rep.history, start=1))}
    code = EXIT_OK if rep.converged else EXIT_NONCONVERGED
    return doc, table, extra, code


def _existence_doc(lp: LoadedProblem, samples: int):
    if lp.a is None or lp.b is None:
        raise SchemaError("check-existence needs norm levels a and b", "/existence")
    rep = existence_check(lp.spec, lp.a, lp.b)
    seed = lp.solver.seed
    na = boundary_norms(lp.spec, lp.a, samples, seed)
    nb = boundary_norms(lp.spec, lp.b, samples, seed + 1)
    doc = rep.to_dict()
    doc["samples"] = {
        "n": samples,
        "seed": seed,
        "max_norm_G_on_a": float(na.max()),
        "min_norm_G_on_b": float(nb.min()),
    }
    flat = [(k, v) for k, v in doc.items() if not isinstance(v, (dict, list))]
    flat += [(f"samples.{k}", v) for k, v in doc["samples"].items()]
    return doc, (("key", "value"), flat), {}, EXIT_OK


def _classify_doc(lp: LoadedProblem):
    rep = classify_limits(lp.spec)
    doc = rep.to_dict()
    flat = [(k, doc[k]) for k in ("f0", "finf", "corollary_applies")]
    return doc, (("key", "value"), flat), {}, EXIT_OK


def _quadrature_doc(lp: LoadedProblem):
    ts = lp.spec.timescale
    grid = ts.grid
    one = GridFunction(grid, np.ones(len(grid)))
    ident = GridFunction(grid, grid.points)
    T = ts.t_max
    doc = {
        "t": grid.points.tolist(),
        "mu": grid.mu.tolist(),
        "nu": grid.nu.tolist(),
        "delta_integral": {"one": delta_integral(one, 0.0, T), "t": delta_integral(ident, 0.0, T)},
        "nabla_integral": {"one": nabla_integral(one, 0.0, T), "t": nabla_integral(ident, 0.0, T)},
    }
    cols = zip(
        doc["t"], doc["mu"], doc["nu"],
        delta_antiderivative(ident).values.tolist(),
        nabla_antiderivative(ident).values.tolist(),
    )
    return doc, (("t", "mu", "nu", "delta_int_t", "nabla_int_t"), cols), {}, EXIT_OK


def _error_doc(exc, code, cfg, lp):
    return {
        "error": {
            "type": type(exc).__name__,
            "message": str(exc.args[0]) if exc.args else str(exc),
            "pointer": getattr(exc, "pointer", ""),
            "iteration": getattr(exc, "iteration", None),
        },
        "exit_code": code,
        "provenance": _provenance(cfg, lp),
    }


def run(cfg: RunConfig) -> int:
    lp = None
    try:
        if cfg.subcommand not in SUBCOMMANDS:
            raise SchemaError(f"unknown subcommand {cfg.subcommand!r}")
        if cfg.format not in ("json", "csv"):
            raise SchemaError(f"unknown format {cfg.format!r}")
        lp = apply_overrides(load_problem(cfg.problem_path), cfg.overrides)
        if cfg.subcommand == "solve":
            doc, table, extra, code = _solve_doc(lp)
        elif cfg.subcommand == "check-existence":
            doc, table, extra, code = _existence_doc(lp, cfg.samples)
        elif cfg.subcommand == "classify":
            doc, table, extra, code = _classify_doc(lp)
        else:
            doc, table, extra, code = _quadrature_doc(lp)
    except (ProblemFileError, SchemaError) as exc:
        return _fail(exc, EXIT_IO, cfg, lp)
    except (InvalidProblem, HypothesisViolation) as exc:
        return _fail(exc, EXIT_HYPOTHESIS, cfg, lp)
    except DivergenceError as exc:
        return _fail(exc, EXIT_NONCONVERGED, cfg, lp)

    doc["provenance"] = _provenance(cfg, lp)
    try:
        if cfg.format == "json":
            _emit(json.dumps(_clean(doc), indent=1) + "\n", cfg.output_path)
        else:
            _emit(_csv_text(*table), cfg.output_path)
            if cfg.output_path is not None:
                out = Path(cfg.output_path)
                for name, (header, rows) in extra.items():
                    side = out.with_name(f"{out.stem}.{name}{out.suffix or '.csv'}")
                    side.write_text(_csv_text(header, rows))
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


def _fail(exc, code, cfg, lp) -> int:
    print(f"error: {exc}", file=sys.stderr)
    try:
        _emit(json.dumps(_clean(_error_doc(exc, code, cfg, lp)), indent=1) + "\n", cfg.output_path)
    except OSError:
        pass
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nlplap",
        description="Nonlocal p-Laplacian boundary value problems on time scales.",
    )
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--problem", required=True, metavar="PATH")
    ap.add_argument("--out", metavar="PATH", help="output file (default: standard output)")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--lambda", dest="lam", type=float, metavar="X")
    ap.add_argument("--tol", type=float, metavar="X")
    ap.add_argument("--max-iter", type=int, metavar="N")
    ap.add_argument("--seed", type=int, metavar="N")
    ap.add_argument("--a", type=float, metavar="X")
    ap.add_argument("--b", type=float, metavar="X")
    ap.add_argument("--samples", type=int, default=200, metavar="N",
                    help="boundary samples for check-existence (default 200)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        subcommand=args.subcommand,
        problem_path=args.problem,
        output_path=args.out,
        format=args.format,
        overrides={
            "lambda": args.lam,
            "tol": args.tol,
            "max_iter": args.max_iter,
            "seed": args.seed,
            "a": args.a,
            "b": args.b,
        },
        samples=args.samples,
    )
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
