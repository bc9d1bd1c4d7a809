"""Command-line entry point.

Subcommands: ``forward``, ``invert``, ``roundtrip``, ``verify``, ``support``.
Exit codes: 0 success, 2 validation failure, 3 solver failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import estimates, io, marchenko, pipeline, scattering
from .config import DEFAULT_TOLERANCES, RunConfig, config_from_dict
from .errors import HalflineError, SolverError, ValidationError
from .reports import Check, Report

log = logging.getLogger("halfline")

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--out-dir", type=Path, default=Path("."), help="directory for output files")
    common.add_argument("--no-levinson-strict", action="store_true",
                        help="treat index/Levinson failures as warnings")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = argparse.ArgumentParser(prog="halfline", description="Half-line inverse scattering pipeline",
                                epilog="Tolerances: --tol.<name> VALUE for any of " + ", ".join(DEFAULT_TOLERANCES))
    sub = p.add_subparsers(dest="command", required=True)
    f = sub.add_parser("forward", parents=[common], help="potential -> Jost data and scattering data")
    f.add_argument("potential", type=Path)
    i = sub.add_parser("invert", parents=[common], help="scattering data -> F, kernel, potential")
    i.add_argument("scattering", type=Path)
    i.add_argument("--kernel-csv", action="store_true", help="also write the kernel as x,y,A triples")
    r = sub.add_parser("roundtrip", parents=[common], help="potential -> ... -> recovered potential, with errors")
    r.add_argument("potential", type=Path)
    v = sub.add_parser("verify", parents=[common], help="run every applicable diagnostic")
    v.add_argument("--scattering", type=Path)
    v.add_argument("--F", dest="f_file", type=Path)
    v.add_argument("--kernel", type=Path)
    v.add_argument("--support", type=float, help="support radius a to test")
    s = sub.add_parser("support", parents=[common], help="compact-support test of F (or of a potential's F)")
    s.add_argument("input", type=Path, help="F file or potential file")
    s.add_argument("--support", type=float, required=True, help="support radius a")
    return p


def _split_tolerances(argv: Sequence[str]) -> tuple[list, dict]:
    rest, tols = [], {}
    skip = False
    for k in range(len(argv)):
        if skip:
            skip = False
            continue
        a = argv[k]
        if a.startswith("--tol."):
            name, eq, val = a[len("--tol."):].partition("=")
            if not eq:
                if k + 1 >= len(argv):
                    raise ValidationError(f"{a} needs a value")
                val = argv[k + 1]
                skip = True
            if name not in DEFAULT_TOLERANCES:
                raise ValidationError(f"unknown tolerance '{name}'")
            try:
                tols[name] = float(val)
            except ValueError as exc:
                raise ValidationError(f"--tol.{name}: {exc}") from exc
        else:
            rest.append(a)
    return rest, tols


def _config(args, tols: dict) -> RunConfig:
    cfg = RunConfig()
    if args.config is not None:
        cfg = config_from_dict(io.read_json(args.config))
    if tols:
        cfg = cfg.with_tolerances(**tols)
    return cfg


def _states_table(pairs) -> str:
    lines = ["  j  k_j                     s_j"]
    for j, (k, s) in enumerate(pairs, start=1):
        lines.append(f"  {j:<2d} {k:<23.17g} {s:.17g}")
    return "\n".join(lines) if pairs else "  (no bound states)"


def cmd_forward(args, cfg: RunConfig) -> int:
    p = io.read_potential(args.potential)
    cfg = _match_potential(cfg, p)
    res = pipeline.run_forward(p, cfg)
    io.write_json(io.jost_to_dict(res.jost), args.out_dir / "jost.json")
    io.write_json(io.scattering_to_dict(res.data), args.out_dir / "scattering.json")
    print(f"J = {res.data.J}, kappa = {res.data.index_kappa}")
    print(_states_table(res.data.bound_states))
    print(res.report.table())
    return EXIT_OK


def _match_potential(cfg: RunConfig, p) -> RunConfig:
    if abs(p.x_max - cfg.x_max) > 1e-9 or abs(p.grid.h - cfg.h) > 1e-12:
        d = cfg.to_dict()
        d.update(x_max=p.x_max, h=p.grid.h)
        return RunConfig(**d)
    return cfg


def cmd_invert(args, cfg: RunConfig) -> int:
    sd = io.read_scattering(args.scattering)
    try:
        inv = pipeline.run_inversion(sd, cfg, levinson_strict=not args.no_levinson_strict)
    except pipeline.ReportedValidationError as exc:
        print(exc.report.table())
        raise
    out = args.out_dir
    io.write_json(io.F_to_dict(inv.F), out / "F.json")
    io.write_json(io.kernel_to_dict(inv.kernel), out / "kernel.json")
    if getattr(args, "kernel_csv", False):
        io.write_kernel_csv(inv.kernel, out / "kernel.csv")
    io.write_json(io.potential_to_dict(inv.potential), out / "potential.json")
    print(inv.validation.table())
    print(f"x0 = {inv.profile.x0}")
    print(inv.bounds.table())
    return EXIT_OK


def cmd_roundtrip(args, cfg: RunConfig) -> int:
    p = io.read_potential(args.potential)
    res = pipeline.run_roundtrip(p, cfg, levinson_strict=not args.no_levinson_strict)
    err = res["errors"]
    reports = [res["forward"].report, res["inversion"].bounds, res["l2"], res["F_decay"]]
    if "support" in res:
        reports.append(res["support"])
    doc = {"errors": err, "kernel_threshold": res["kernel_threshold"],
           "kernel_to_F_updates": list(res["kernel_to_F"].updates),
           "reports": [r.to_dict() for r in reports]}
    io.write_json(doc, args.out_dir / "roundtrip.json")
    print(f"||q - q_hat||_1 / ||q||_1 = {err['q_rel_L1']:.6g}")
    print(f"max |q - q_hat|           = {err['q_max']:.6g}")
    print(f"max |F - F_hat|           = {err['F_hat_max']:.6g}")
    print(f"max |S - S_hat|           = {err['S_hat_max']:.6g}")
    print(f"max bound-data error      = {err['bound_data_max']:.6g}  (J = {err['J']}, J_hat = {err['J_hat']})")
    for r in reports:
        print(r.table())
    return EXIT_OK


def _verify_F(F, cfg: RunConfig, reports: list, support: Optional[float]):
    t = cfg.tol
    reports.append(estimates.check_F_decay(F, exponent_limit=t("decay_exponent")))
    try:
        x0 = marchenko.contraction_threshold(F)
        reports.append(Report("contraction threshold", (Check("x0", x0, "sigma_1F(2 x0) < 1", True),)))
    except SolverError as exc:
        reports.append(Report("contraction threshold", (Check("x0", None, "sigma_1F(2 x0) < 1", False,
                                                              note=str(exc)),)))
        return
    A = marchenko.solve_marchenko_all(F, marchenko.MarchenkoSolveOptions(tol_solve=t("solve")))
    ep = estimates.estimate_profile(F, A)
    bounds, _ = estimates.check_two_sided_bounds(ep, c_max=t("bound_constant_max"), rel_floor=t("ratio_floor"))
    reports.append(bounds)
    if support is not None:
        reports.append(estimates.check_compact_support(F, support, tol=t("support"), delta=t("support_margin")))


def cmd_verify(args, cfg: RunConfig) -> int:
    if args.scattering is None and args.f_file is None and args.kernel is None:
        raise ValidationError("verify needs at least one of --scattering, --F, --kernel")
    t = cfg.tol
    reports: list = []
    if args.scattering is not None:
        sd = io.read_scattering(args.scattering)
        rep, sd = pipeline.check_scattering(sd, cfg)
        reports.append(rep)
        exact_ok = all(rep.check(n).verdict for n in scattering.CONDITION_A_EXACT)
        if exact_ok:
            F = scattering.build_F(sd, cfg.F_grid, tol_imag=t("imag_residue"))
            _verify_F(F, cfg, reports, args.support)
    if args.f_file is not None:
        _verify_F(io.read_F(args.f_file), cfg, reports, args.support)
    if args.kernel is not None:
        A = io.read_kernel(args.kernel)
        ep = estimates.profile_A(A)
        q = marchenko.recover_potential(A)
        checks = [Check("sigma_A(0)", float(ep.sigma_A[0]), None, True),
                  Check("sigma_1A(0)", float(ep.sigma_1A[0]), None, True)]
        try:
            x0, C = marchenko.kernel_threshold(A)
            checks.append(Check("kernel_x0", x0, "2 C int sigma < 1", True, note=f"C = {C:.6g}"))
        except SolverError as exc:
            checks.append(Check("kernel_x0", None, "2 C int sigma < 1", False, note=str(exc)))
        reports.append(Report("kernel", tuple(checks)))
        reports.append(pipeline.l11_report(q, cfg))
    io.write_json({"reports": [r.to_dict() for r in reports]}, args.out_dir / "verify.json")
    for r in reports:
        print(r.table())
    return EXIT_OK


def cmd_support(args, cfg: RunConfig) -> int:
    doc = io.read_json(args.input)
    if "f_s" in doc:
        rep = estimates.check_compact_support(io.F_from_dict(doc, str(args.input)), args.support,
                                              tol=cfg.tol("support"), delta=cfg.tol("support_margin"))
    else:
        p = io.potential_from_dict(doc, str(args.input))
        cfg = _match_potential(cfg, p)
        fw = pipeline.run_forward(p, cfg)
        inv = pipeline.run_inversion(fw.data, cfg, levinson_strict=not args.no_levinson_strict)
        rep = pipeline.potential_support_check(inv, args.support, cfg)
    io.write_json(rep.to_dict(), args.out_dir / "support.json")
    print(rep.table())
    print(f"a_hat = {rep.details['a_hat']:.6g}")
    return EXIT_OK


COMMANDS = {"forward": cmd_forward, "invert": cmd_invert, "roundtrip": cmd_roundtrip,
            "verify": cmd_verify, "support": cmd_support}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        rest, tols = _split_tolerances(argv)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    args = _parser().parse_args(rest)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args, tols)
        return COMMANDS[args.command](args, cfg)
    except io.DataIOError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except HalflineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
