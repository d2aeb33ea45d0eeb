"""Command-line entry point: ``fwlab {spectrum,verify,transform,wavefunction}``.

Exit codes: 0 ok, 1 verification failed, 2 usage, 3 I/O, 4 domain error
(inadmissible quantum numbers, level outside the interior).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .landau import (
    ModelParams,
    analytic_spectrum,
    build_dirac_hamiltonian,
    default_M,
    dirac_eigenstate,
    fw_wavefunction,
)
from .operators import fw_unitary
from .verification import all_passed, run_suite

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_IO, EXIT_DOMAIN = 0, 1, 2, 3, 4
SUBCOMMANDS = ("spectrum", "verify", "transform", "wavefunction")
TOLERANCE_ENV = "FWLAB_TOLERANCE_SCALE"


@dataclass
class RunConfig:
    subcommand: str
    params: ModelParams
    output_path: str = "-"
    format: str = "csv"
    rho_max: float | None = None
    points: int = 4000
    n: int | None = None
    lam: int | None = None
    M: float | None = None
    extra: dict = field(default_factory=dict)


class DomainError(ValueError):
    pass


def _positive_float(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return v


def _half_integer(text):
    v = float(text)
    if not math.isfinite(v) or (2 * v) % 2 != 1:
        raise argparse.ArgumentTypeError(f"M must be a half-integer, got {text}")
    return v


def _lam(text):
    v = int(text)
    if v not in (1, -1):
        raise argparse.ArgumentTypeError("lambda must be +1 or -1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fwlab", description="Exact Foldy-Wouthuysen transformation laboratory")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", metavar="{" + ",".join(SUBCOMMANDS) + "}")
    sub.required = True

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=float, default=1.0, help="mass (default 1)")
    common.add_argument("--e", type=float, default=1.0, help="charge (default 1)")
    common.add_argument("--H", type=float, default=0.1, help="magnetic field along +z (default 0.1)")
    common.add_argument("--mu-prime", type=float, default=0.001, help="anomalous magnetic moment (default 1e-3)")
    common.add_argument("--n-max", type=int, default=64, help="highest Landau level kept (default 64)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default="-", help="output file, '-' for stdout")

    state = argparse.ArgumentParser(add_help=False)
    state.add_argument("--n", type=int, default=0, help="Landau index")
    state.add_argument("--lambda", dest="lam", type=_lam, default=1, help="spin projection, +1 or -1")

    sub.add_parser("spectrum", parents=[common], help="analytic positive-energy levels")
    p = sub.add_parser("verify", parents=[common], help="run the residual suite")
    p.add_argument("--spin-operator", choices=("pi", "sigma"), default="pi",
                   help="'sigma' replaces Pi_z by Sigma_z in the AMM term (negative control)")
    p.add_argument("--perturbation", type=float, default=0.0,
                   help="max-norm of a random Hermitian perturbation (negative control)")
    p.add_argument("--seed", type=int, default=None)
    sub.add_parser("transform", parents=[common, state], help="Dirac eigenstate and its FW image")
    p = sub.add_parser("wavefunction", parents=[common, state], help="radial FW eigenfunction samples")
    p.add_argument("--M", type=_half_integer, default=None, help="total angular momentum projection")
    p.add_argument("--rho-max", type=_positive_float, default=None, help="outer radius (default 12 b)")
    p.add_argument("--points", type=int, default=4000)
    return parser


def parse_args(argv=None) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        params = ModelParams(ns.m, ns.e, ns.H, ns.mu_prime, ns.n_max)
    except ValueError as exc:
        parser.error(str(exc))
    cfg = RunConfig(ns.subcommand, params, ns.out, ns.format)
    if ns.subcommand in ("transform", "wavefunction"):
        cfg.n, cfg.lam = ns.n, ns.lam
    if ns.subcommand == "wavefunction":
        if ns.points < 3:
            parser.error("--points must be at least 3")
        cfg.M, cfg.rho_max, cfg.points = ns.M, ns.rho_max, ns.points
    if ns.subcommand == "verify":
        cfg.extra = {"spin_operator": ns.spin_operator, "perturbation": ns.perturbation}
        if ns.seed is not None:
            cfg.extra["seed"] = ns.seed
    return cfg


def _num(x):
    """Shortest round-trip text for a binary64 value."""
    x = float(x)
    return repr(x) if math.isfinite(x) else str(x)


def _jsonable(v):
    if isinstance(v, (bool, str)) or v is None:
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    raise TypeError(f"cannot serialise {type(v)}")


def _csv_cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return _num(v)
    if isinstance(v, dict):
        return ";".join(f"{k}={x}" for k, x in v.items())
    return str(v)


def render(meta: dict, columns: list[str], rows: list[list], fmt: str) -> str:
    if fmt == "json":
        payload = {"meta": _jsonable(meta), "rows": [_jsonable(dict(zip(columns, r))) for r in rows]}
        return json.dumps(payload, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}: {json.dumps(_jsonable(v))}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_csv_cell(v) for v in r])
    return buf.getvalue()


def write_output(text: str, path: str):
    if path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".fwlab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _meta(cfg: RunConfig, **extra) -> dict:
    return {"program": f"fwlab {__version__}", "subcommand": cfg.subcommand, "params": cfg.params.as_dict(), **extra}


def tolerance_scale_from_env() -> float:
    raw = os.environ.get(TOLERANCE_ENV)
    if raw is None or raw == "":
        return 1.0
    scale = float(raw)
    if not (scale > 0 and math.isfinite(scale)):
        raise ValueError(f"{TOLERANCE_ENV} must be a positive number, got {raw!r}")
    return scale


def _spectrum(cfg):
    cols = ["n", "lambda", "M", "eps0", "E0", "E_total"]
    rows = [[r.n, r.lam, r.M, r.eps0, r.E0, r.E_total] for r in analytic_spectrum(cfg.params)]
    return EXIT_OK, render(_meta(cfg), cols, rows, cfg.format)


def _verify(cfg):
    scale = tolerance_scale_from_env()
    reports = run_suite(cfg.params, tolerance_scale=scale, **cfg.extra)
    cols = ["check_name", "max_residual", "tolerance", "passed", "context"]
    rows = [[r.check_name, r.max_residual, r.tolerance, r.passed, dict(sorted(r.context.items()))] for r in reports]
    ok = all_passed(reports)
    meta = _meta(cfg, tolerance_scale=scale, all_passed=ok, **cfg.extra)
    return (EXIT_OK if ok else EXIT_FAILED), render(meta, cols, rows, cfg.format)


def _transform(cfg):
    p = cfg.params
    try:
        state, rec = dirac_eigenstate(p, cfg.n, cfg.lam)
    except (ValueError, LookupError) as exc:
        raise DomainError(str(exc)) from exc
    psi = state.coeffs
    fw = fw_unitary(build_dirac_hamiltonian(p)) @ psi
    factor = math.sqrt(2 * rec.eps0 / (rec.eps0 + p.m))
    pred = (factor * psi.reshape(-1, 4) * np.array([1, 1, 0, 0])).ravel()
    diff = float(np.linalg.norm(fw - pred))
    cols = ["n", "s", "dirac_re", "dirac_im", "fw_re", "fw_im", "predicted_re", "predicted_im"]
    rows = [[k // 4, k % 4, psi[k].real, psi[k].imag, fw[k].real, fw[k].imag, pred[k].real, pred[k].imag]
            for k in range(p.dim)]
    meta = _meta(cfg, state={"n": rec.n, "lambda": rec.lam, "eps0": rec.eps0, "E0": rec.E0, "E_total": rec.E_total},
                 upper_factor=factor, difference_norm=diff)
    return EXIT_OK, render(meta, cols, rows, cfg.format)


def _wavefunction(cfg):
    p = cfg.params
    M = cfg.M if cfg.M is not None else default_M(p, cfg.n, cfg.lam)
    rho_max = cfg.rho_max if cfg.rho_max is not None else 12.0 * p.magnetic_length
    grid = np.linspace(rho_max / cfg.points, rho_max, cfg.points)
    try:
        wf = fw_wavefunction(p, cfg.n, cfg.lam, M, grid)
    except ValueError as exc:
        raise DomainError(str(exc)) from exc
    meta = _meta(cfg, state={"n": wf.n, "lambda": wf.lam, "M": wf.M, "n_rho": wf.n_rho, "m_l": wf.m_l,
                             "ell": wf.radial.ell_abs, "b": wf.radial.b,
                             "spinor": [int(abs(c)) for c in wf.spinor]})
    rows = [[r, v] for r, v in zip(wf.rho, wf.values)]
    return EXIT_OK, render(meta, ["rho", "R"], rows, cfg.format)


_HANDLERS = {"spectrum": _spectrum, "verify": _verify, "transform": _transform, "wavefunction": _wavefunction}


def run(cfg: RunConfig) -> int:
    try:
        status, text = _HANDLERS[cfg.subcommand](cfg)
    except DomainError as exc:
        print(f"fwlab: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        # bad FWLAB_TOLERANCE_SCALE
        print(f"fwlab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        write_output(text, cfg.output_path)
    except OSError as exc:
        print(f"fwlab: cannot write {cfg.output_path}: {exc}", file=sys.stderr)
        return EXIT_IO
    return status


def main(argv=None) -> int:
    return run(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
