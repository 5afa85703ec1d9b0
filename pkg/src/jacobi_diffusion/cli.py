"""Command-line front end: ``jacobi-diffusion <command> [options]``.

Coefficients are given as ``--a --b --sigma [--d]`` or as
``--alpha --beta --sigma [--d]``. Tables go out as CSV (header fixed per
command) or JSON; every JSON document carries ``schema_version``.

Exit codes: 0 success, 1 regime violation or failed verification,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import warnings
from pathlib import Path
from typing import Sequence

import numpy as np

from .eigenfun import eta, eta_prime, xi, xi_prime
from .errors import GuardError, JacobiError, ParameterError, RegimeError
from .hitting import hit_prob_0, hit_prob_d, lambda_hitting_0, lambda_hitting_d
from .inequalities import hardy_constant
from .model import JacobiCoeffs, classify
from .sde import SdeField, simulate_path
from .spectral import jacobi_Q_table, semigroup_apply

SCHEMA_VERSION = 1
DEFAULT_SEED = 42
DEFAULT_DT = 1e-3
DEFAULT_GRID = 256
OUTPUT_ENV = "JACOBI_OUTPUT_DIR"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# -- argument plumbing ----------------------------------------------------------


def _coeff_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("coefficients")
    g.add_argument("--a", type=float, help="drift constant a")
    g.add_argument("--b", type=float, help="drift slope b")
    g.add_argument("--alpha", type=float, help="boundary exponent at d (instead of --a/--b)")
    g.add_argument("--beta", type=float, help="boundary exponent at 0 (instead of --a/--b)")
    g.add_argument("--sigma", type=float, required=True, help="diffusion scale")
    g.add_argument("--d", type=float, default=1.0, help="interval length (default 1)")


def _output_args(p: argparse.ArgumentParser, fmt: bool = True) -> None:
    p.add_argument("--output", "-o", help=f"write to this file (relative paths resolve against ${OUTPUT_ENV})")
    if fmt:
        p.add_argument("--format", choices=("csv", "json"), default="csv")


def _coeffs(ns) -> JacobiCoeffs:
    by_ab = ns.a is not None or ns.b is not None
    by_shape = ns.alpha is not None or ns.beta is not None
    if by_ab == by_shape:
        raise ParameterError("give either --a and --b, or --alpha and --beta")
    if by_ab:
        if ns.a is None or ns.b is None:
            raise ParameterError("--a and --b must be given together")
        return JacobiCoeffs(ns.a, ns.b, ns.sigma, ns.d)
    if ns.alpha is None or ns.beta is None:
        raise ParameterError("--alpha and --beta must be given together")
    return JacobiCoeffs.from_shape(ns.alpha, ns.beta, ns.sigma, ns.d)


def _grid(coeffs: JacobiCoeffs, n: int, eps: float) -> np.ndarray:
    if n < 1:
        raise ParameterError("--grid must be at least 1")
    if not 0 < eps < 0.5:
        raise ParameterError("--eps must lie in (0, 0.5)")
    if n == 1:
        return np.array([0.5 * coeffs.d])
    return np.linspace(eps * coeffs.d, (1.0 - eps) * coeffs.d, n)


def _resolve(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUTPUT_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    p = _resolve(output)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text, encoding="utf-8")


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return repr(float(v))


def _table(columns: list[str], rows: list[list], fmt: str) -> str:
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION, "columns": columns, "rows": rows}
        return json.dumps(doc, default=float) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _json(doc: dict) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, **doc}, indent=2, sort_keys=True, default=str) + "\n"


def _coeff_doc(c: JacobiCoeffs) -> dict:
    return {"a": c.a, "b": c.b, "sigma": c.sigma, "d": c.d, "alpha": c.alpha, "beta": c.beta}


# -- commands -------------------------------------------------------------------


def cmd_classify(ns) -> int:
    c = _coeffs(ns)
    doc = {"coefficients": _coeff_doc(c), **classify(c.shape).to_dict()}
    doc["alpha"], doc["beta"] = c.alpha, c.beta
    _emit(_json(doc), ns.output)
    return EXIT_OK


def cmd_eigfun(ns) -> int:
    c = _coeffs(ns)
    x = _grid(c, ns.grid, ns.eps)
    fn, fp = (xi, xi_prime) if ns.which == "xi" else (eta, eta_prime)
    vals = np.atleast_1d(fn(c, ns.lam, x))
    cols = ["x", "value"]
    rows = [[float(a), float(v)] for a, v in zip(x, vals)]
    if ns.derivative:
        der = np.atleast_1d(fp(c, ns.lam, x))
        cols.append("derivative")
        for r, v in zip(rows, der):
            r.append(float(v))
    _emit(_table(cols, rows, ns.format), ns.output)
    return EXIT_OK


def _named_function(name: str, c: JacobiCoeffs):
    if name == "one":
        return lambda x: np.ones_like(np.asarray(x, dtype=float))
    if name == "x":
        return lambda x: np.asarray(x, dtype=float)
    if name == "x2":
        return lambda x: np.asarray(x, dtype=float) ** 2
    if name in ("q1", "q2", "q3"):
        n = int(name[1])
        return lambda x: jacobi_Q_table(c, n, x)[n]
    raise ParameterError(f"unknown function {name!r} (use one, x, x2, q1, q2, q3)")


def cmd_semigroup(ns) -> int:
    c = _coeffs(ns)
    x = _grid(c, ns.grid, ns.eps)
    f = _named_function(ns.f, c)
    if any(t < 0 for t in ns.t):
        raise ParameterError("times must be nonnegative")
    cols = ["x"] + [f"t={t:g}" for t in ns.t]
    table = [x]
    for t in ns.t:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            table.append(np.atleast_1d(semigroup_apply(c, t, f, x, N=ns.order)))
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    rows = [list(map(float, r)) for r in zip(*table)]
    _emit(_table(cols, rows, ns.format), ns.output)
    return EXIT_OK


def cmd_hitting(ns) -> int:
    c = _coeffs(ns)
    x = _grid(c, ns.grid, ns.eps)
    to_d = ns.boundary == "d"
    if ns.alpha_band:
        e = c.alpha if to_d else c.beta
        name = "alpha" if to_d else "beta"
        if not -1 < e < 0:
            raise RegimeError(f"{name}={e:g} is outside (-1, 0), where hitting this boundary is nontrivial")
    if ns.lam is not None:
        fn = lambda_hitting_d if to_d else lambda_hitting_0
        vals = np.atleast_1d(fn(c, ns.lam, x))
        rows = [[float(a), float(v)] for a, v in zip(x, vals)]
        _emit(_table(["x", "laplace_transform"], rows, ns.format), ns.output)
        return EXIT_OK
    fn = hit_prob_d if to_d else hit_prob_0
    rows = []
    for v in x:
        r = fn(c, float(v))
        rows.append([float(v), r.probability, r.note.value])
    _emit(_table(["x", "probability", "note"], rows, ns.format), ns.output)
    return EXIT_OK


def cmd_hardy(ns) -> int:
    c = _coeffs(ns)
    spec = hardy_constant(c, ns.r, ns.s)
    doc = {
        "coefficients": _coeff_doc(c),
        "r": spec.r,
        "s": spec.s,
        "admissible_case": spec.admissible_case.value,
        "admissible": spec.admissible,
        "constant": spec.constant,
    }
    _emit(_json(doc), ns.output)
    return EXIT_OK


def cmd_simulate(ns) -> int:
    c = _coeffs(ns)
    field = SdeField(c)
    if ns.paths < 1:
        raise ParameterError("--paths must be at least 1")
    records = [simulate_path(field, ns.x0, ns.T, ns.dt, (ns.seed, i)) for i in range(ns.paths)]
    if ns.dump:
        out_dir = _resolve(ns.dump)
        out_dir.mkdir(parents=True, exist_ok=True)
        for r in records:
            r.dump(out_dir / f"path_{r.seed_path_id[1]:06d}")
    mins = [r.zeta_min_time for r in records]
    maxs = [r.zeta_max_time for r in records]
    doc = {
        "coefficients": _coeff_doc(c),
        "x0": ns.x0,
        "T": ns.T,
        "dt": ns.dt,
        "seed": ns.seed,
        "n_paths": ns.paths,
        "fraction_min_lifetime": sum(m is not None for m in mins) / ns.paths,
        "fraction_max_lifetime": sum(m is not None for m in maxs) / ns.paths,
        "paths": [r.summary() for r in records],
    }
    _emit(_json(doc), ns.output)
    return EXIT_OK


def cmd_verify(ns) -> int:
    from .verify import run_suite

    kwargs = {}
    if ns.quick and ns.suite == "hitting":
        kwargs = {"n_paths": 2000, "dts": (4e-3, 2e-3, 1e-3)}
    report = run_suite(ns.suite, **kwargs)
    _emit(_json(report.to_dict()), ns.output)
    if not report.passed:
        print(f"verification failed: {', '.join(report.failing())}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="jacobi-diffusion", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("classify", help="boundary classification as JSON")
    _coeff_args(q)
    _output_args(q, fmt=False)
    q.set_defaults(func=cmd_classify)

    def grid_args(q):
        q.add_argument("--grid", type=int, default=DEFAULT_GRID, help="number of x points")
        q.add_argument("--eps", type=float, default=1e-3, help="grid spans [eps d, (1 - eps) d]")

    q = sub.add_parser("eigfun", help="tabulate xi or eta")
    _coeff_args(q)
    q.add_argument("--lambda", dest="lam", type=float, required=True)
    q.add_argument("--which", choices=("xi", "eta"), default="xi")
    q.add_argument("--derivative", action="store_true", help="add a derivative column")
    grid_args(q)
    _output_args(q)
    q.set_defaults(func=cmd_eigfun)

    q = sub.add_parser("semigroup", help="tabulate T_t f for named f")
    _coeff_args(q)
    q.add_argument("--t", type=float, nargs="+", required=True)
    q.add_argument("--f", default="one", help="one, x, x2, q1, q2 or q3")
    q.add_argument("--order", type=int, default=None, help="truncation order N")
    grid_args(q)
    _output_args(q)
    q.set_defaults(func=cmd_semigroup)

    q = sub.add_parser("hitting", help="hitting probabilities of a boundary")
    _coeff_args(q)
    q.add_argument("--boundary", choices=("d", "0"), default="d")
    q.add_argument("--alpha-band", action="store_true",
                   help="fail unless the exponent of the boundary lies in (-1, 0)")
    q.add_argument("--lambda", dest="lam", type=float, default=None, help="Laplace variable instead of probability")
    grid_args(q)
    _output_args(q)
    q.set_defaults(func=cmd_hitting)

    q = sub.add_parser("hardy", help="Hardy admissibility and constant")
    _coeff_args(q)
    q.add_argument("--r", type=float, required=True)
    q.add_argument("--s", type=float, required=True)
    _output_args(q, fmt=False)
    q.set_defaults(func=cmd_hardy)

    q = sub.add_parser("simulate", help="Euler-Maruyama paths")
    _coeff_args(q)
    q.add_argument("--x0", type=float, required=True)
    q.add_argument("--T", type=float, required=True)
    q.add_argument("--dt", type=float, default=DEFAULT_DT)
    q.add_argument("--paths", type=int, default=1)
    q.add_argument("--seed", type=int, default=DEFAULT_SEED)
    q.add_argument("--dump", help="directory for per-path CSV + JSON files")
    _output_args(q, fmt=False)
    q.set_defaults(func=cmd_simulate)

    q = sub.add_parser("verify", help="run a named verification suite")
    q.add_argument("suite", choices=("eigen", "gauss", "spectral", "hitting", "conserve", "ergodic",
                                     "hardy", "uniqueness", "duality"))
    q.add_argument("--quick", action="store_true", help="smaller Monte Carlo budget")
    _output_args(q, fmt=False)
    q.set_defaults(func=cmd_verify)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except (RegimeError, GuardError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ParameterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except JacobiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
