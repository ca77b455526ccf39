"""Command-line driver.

Usage::

    relast solve-linear --config run.cfg [--out DIR] [--quiet]
    relast solve-nonlinear --config run.cfg
    relast convergence --config mms.cfg
    relast korn --config run.cfg
    relast validate [--seed N]
    relast mesh --config run.cfg
    relast run --config run.cfg          # dispatch on solver.mode
    relast keys                          # list configuration keys

Exit status: 0 on success, 1 on a solver failure (or a failing
validation check), 2 on an input error.
"""

import argparse
import logging
import os
import sys
import time

import numpy as np

from .config import describe_keys, parse_config
from .constitutive import MaterialModel
from .errors import InputError, RelastError
from .fem import assemble, solve_cg
from .fileio import (csv_text, diagnostics_text, fmt, read_mesh, write_convergence,
                     write_csv, write_fields, write_mesh, write_report)
from .forces import ForceModel, profile_field
from .geometry import IdentityMap, LinearMap, PolarEmbedding, make_metric
from .mesh import generate_mesh

log = logging.getLogger("relast")

EXIT_OK, EXIT_SOLVER, EXIT_INPUT = 0, 1, 2


# ---------------------------------------------------------------------------
# building blocks from a config
# ---------------------------------------------------------------------------

def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read config {path!r}: {exc.strerror}") from None
    cfg = parse_config(text)
    object.__setattr__(cfg, "base_dir", os.path.dirname(os.path.abspath(path)))
    return cfg


def build_mesh(cfg):
    if cfg.mesh is not None:
        path = cfg.mesh
        if not os.path.isabs(path):
            path = os.path.join(getattr(cfg, "base_dir", os.getcwd()), path)
        mesh = read_mesh(path)
        if mesh.dim != cfg.dim:
            raise InputError(f"mesh dimension {mesh.dim} differs from {cfg.dim}", key="domain.mesh")
        return mesh
    return generate_mesh(cfg.box, cfg.resolution, cfg.gamma2)


def build_model(cfg):
    try:
        return make_metric(cfg.metric, cfg.dim, **cfg.params())
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc), key="target.metric") from None


def build_phi0(cfg):
    d = cfg.dim
    if cfg.phi0 == "identity":
        return IdentityMap(d)
    if cfg.phi0 == "linear":
        return LinearMap(np.reshape(cfg.matrix, (d, d)), cfg.offset)
    return PolarEmbedding()


def build_material(cfg):
    return MaterialModel(cfg.lam, cfg.mu)


def build_forces(cfg, with_body=True):
    d = cfg.dim
    body = None
    if with_body:
        if cfg.body is not None:
            body = profile_field("constant", 1.0, cfg.body, d)
        elif cfg.profile != "none":
            body = profile_field(cfg.profile, cfg.amplitude, cfg.direction, d)
    f1 = None if cfg.f1 is None else np.reshape(cfg.f1, (d, d))
    f2 = None if cfg.f2 is None else np.reshape(cfg.f2, (d, d, d))
    traction = None if cfg.traction is None else np.asarray(cfg.traction, dtype=float)
    return ForceModel(d, body, f1, f2, traction)


def _out_dir(cfg, args):
    out = args.out if args.out is not None else (cfg.output if cfg is not None else "out")
    os.makedirs(out, exist_ok=True)
    return out


def _say(args, text):
    if not args.quiet:
        print(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_mesh(cfg, args):
    mesh = build_mesh(cfg)
    out = _out_dir(cfg, args)
    path = os.path.join(out, "mesh.txt")
    write_mesh(mesh, path)
    _say(args, f"mesh: {mesh.n_nodes} nodes, {mesh.n_elements} elements, "
               f"{mesh.n_facets} boundary facets -> {path}")
    return EXIT_OK


def cmd_solve_linear(cfg, args):
    mesh = build_mesh(cfg)
    model, phi0 = build_model(cfg), build_phi0(cfg)
    sys_ = assemble(mesh, build_material(cfg), model, phi0, build_forces(cfg))
    xi, iterations = solve_cg(sys_, cfg.tol, cfg.maxiter)
    out = _out_dir(cfg, args)
    write_fields(mesh, {"displacement": xi.values}, os.path.join(out, "fields.vtk"))
    record = {"dofs": sys_.n_dofs, "cg_iterations": iterations,
              "max_displacement": float(np.max(np.abs(xi.values))) if xi.values.size else 0.0,
              "symmetric": sys_.is_symmetric()}
    with open(os.path.join(out, "summary.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(diagnostics_text(record))
    _say(args, diagnostics_text(record).rstrip())
    return EXIT_OK


def cmd_solve_nonlinear(cfg, args):
    from .errors import ContractionFailureError
    from .nonlinear import NonlinearProblem, chord_newton_solve, smallness_report
    mesh = build_mesh(cfg)
    if cfg.traction is not None:
        raise InputError("tractions are not supported by the nonlinear problem", key="forces.traction")
    p = NonlinearProblem(mesh, build_model(cfg), build_phi0(cfg), build_material(cfg),
                         build_forces(cfg))
    out = _out_dir(cfg, args)
    rng = np.random.default_rng(cfg.seed)
    diag = smallness_report(p, rng)
    try:
        rep = chord_newton_solve(p, cfg.tol, cfg.maxiter)
    except ContractionFailureError as exc:
        rep = exc.report
        if rep is not None:
            rep.diagnostics = diag
            write_report(rep, out)
        print(f"relast: contraction failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    rep.diagnostics = diag
    write_report(rep, out)
    y = p.deformation(p.restrict(rep.xi.values)).values
    write_fields(mesh, {"displacement": rep.xi.values, "deformation": y},
                 os.path.join(out, "fields.vtk"))
    _say(args, csv_text(("iteration", "residual_norm", "step_norm", "ratio", "energy", "min_det"),
                        rep.rows()).rstrip())
    _say(args, f"converged ({rep.reason}) in {rep.iterations} rows; "
               f"epsilon1 estimate {fmt(diag['epsilon1'])}, load {fmt(diag['load_norm'])}")
    return EXIT_OK


def cmd_convergence(cfg, args):
    from .mms import ManufacturedProblem, convergence_study, sine_field
    if cfg.box is None:
        raise InputError("the convergence study needs a box domain", key="domain.box")
    if cfg.gamma2:
        raise InputError("manufactured studies clamp the whole boundary", key="domain.gamma2")
    exact, grad = sine_field(cfg.box, cfg.exact_direction)
    fm = build_forces(cfg, with_body=False)
    prob = ManufacturedProblem(list(cfg.box), build_model(cfg), build_phi0(cfg),
                               build_material(cfg), exact, grad, fm.f1, fm.f2)
    table = convergence_study(prob, cfg.levels, min(cfg.tol, 1e-12))
    out = _out_dir(cfg, args)
    path = os.path.join(out, "convergence.csv")
    write_convergence(table, path)
    _say(args, csv_text(("h", "l2_error", "h1_error", "l2_rate", "h1_rate"), table.rows()).rstrip())
    return EXIT_OK


def cmd_korn(cfg, args):
    from .spectral import korn_estimate, poincare_and_ricci_bound
    mesh = build_mesh(cfg)
    model, phi0 = build_model(cfg), build_phi0(cfg)
    k = korn_estimate(mesh, model, phi0)
    record = {"label": "ESTIMATE", "C_K": k.C_K, "C_Kstar": k.C_Kstar,
              "lambda_K": k.lam_K, "lambda_Kstar": k.lam_Kstar, "sweeps": list(k.iterations)}
    if np.all(mesh.facet_tags == "gamma1"):
        pb = poincare_and_ricci_bound(mesh, model, phi0)
        record.update({"C_P": pb.C_P, "ric_inf_norm": pb.ric_inf_norm,
                       "C_K_bound": pb.C_K_bound if pb.applicable else "not applicable"})
    out = _out_dir(cfg, args)
    with open(os.path.join(out, "korn.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(diagnostics_text(record))
    _say(args, diagnostics_text(record).rstrip())
    return EXIT_OK


def cmd_validate(cfg, args):
    from .identities import validation_suite
    seed = args.seed if args.seed is not None else (cfg.seed if cfg is not None else 0)
    start = time.perf_counter()
    rows = validation_suite(seed)
    elapsed = time.perf_counter() - start
    width = max(len(r.name) for r in rows)
    _say(args, f"{'check':{width}s}  cases  worst        tol      result")
    for r in rows:
        _say(args, f"{r.name:{width}s}  {r.cases:5d}  {r.worst:.3e}  {r.tol:.0e}  "
                   f"{'PASS' if r.passed else 'FAIL'}")
    ok = all(r.passed for r in rows)
    _say(args, f"{sum(r.passed for r in rows)}/{len(rows)} checks passed in {elapsed:.1f} s")
    if args.out is not None or cfg is not None:
        out = _out_dir(cfg, args)
        write_csv(os.path.join(out, "validate.csv"), ("check", "cases", "worst", "tol", "passed"),
                  [(r.name, r.cases, r.worst, r.tol, r.passed) for r in rows])
    return EXIT_OK if ok else EXIT_SOLVER


COMMANDS = {
    "solve-linear": cmd_solve_linear,
    "solve-nonlinear": cmd_solve_nonlinear,
    "convergence": cmd_convergence,
    "korn": cmd_korn,
    "validate": cmd_validate,
    "mesh": cmd_mesh,
}
MODE_COMMANDS = {"linear": "solve-linear", "nonlinear": "solve-nonlinear",
                 "convergence": "convergence", "korn": "korn", "validate": "validate"}


def build_parser():
    parser = argparse.ArgumentParser(prog="relast", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(COMMANDS) + ["run"]:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="configuration file")
        sp.add_argument("--out", help="output directory (overrides output.directory)")
        sp.add_argument("--quiet", action="store_true", help="suppress progress output")
        if name == "validate":
            sp.add_argument("--seed", type=int, default=None)
    sub.add_parser("keys", help="list configuration keys")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.command == "keys":
        print(describe_keys())
        return EXIT_OK
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = None
        if args.config is not None:
            cfg = load_config(args.config)
        elif args.command != "validate":
            raise InputError(f"{args.command} needs --config")
        command = args.command
        if command == "run":
            command = MODE_COMMANDS[cfg.mode]
            if command == "validate":
                args.seed = None
        return COMMANDS[command](cfg, args)
    except InputError as exc:
        print(f"relast: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RelastError as exc:
        if isinstance(exc, ValueError):
            print(f"relast: input error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        print(f"relast: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
