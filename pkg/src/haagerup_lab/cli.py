"""Command-line front end.

Exit codes: 0 when every check passed, 1 when a mathematical property check
failed (the report carries the witness), 2 on input or resource errors.
Reports are JSON; profiles and tables are CSV. Outputs are written
atomically (temp file + rename).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import defaults, io
from .actions import (
    action_from_json,
    action_to_json,
    domain_ball,
    properness_profile,
    tree_cocycle,
    verify_cocycle,
    verify_isometry,
)
from .construction import construct_and_certify, mixing_decay
from .embedding import escape_profile, gns_embed, is_escaping
from .errors import InputError, LabError, PropertyViolation, ResourceError
from .groups import GroupSpec, ball
from .kernels import (
    CndFunction,
    Kernel,
    QuadConfig,
    cnd_test,
    exp_kernel_test,
    frullani_constant,
    frullani_power,
    power_transform,
)
from .measure import LpVector, gauge_report, mazur_map, mazur_modulus_estimate

OK, FAILED, BAD_INPUT = 0, 1, 2


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _emit(args, report: dict) -> None:
    report = {"config": _config(args), **report}
    if args.out:
        io.write_json(args.out, report)
    else:
        sys.stdout.write(io.dumps(report))


def _emit_csv(args, header, rows) -> None:
    if args.out:
        io.write_csv(args.out, header, rows)
    else:
        sys.stdout.write(io.csv_text(header, rows))


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",)}
    cfg["defaults"] = defaults.DEFAULTS
    return cfg


def _load_kernel(path) -> Kernel:
    return Kernel.from_json(io.read_json(path))


# Subcommands


def cmd_cnd_test(args):
    rep = cnd_test(_load_kernel(args.kernel), args.tol)
    _emit(args, {"report": rep.to_json(), "passed": rep.verdict})
    return OK if rep.verdict else FAILED


def cmd_power(args):
    K = _load_kernel(args.kernel)
    out = power_transform(K, args.alpha, allow_identity=args.allow_identity)
    before, after = cnd_test(K, args.tol), cnd_test(out, args.tol)
    if args.kernel_out:
        io.write_json(args.kernel_out, out.to_json())
    passed = after.verdict or not before.verdict
    _emit(
        args,
        {"input": before.to_json(), "output": after.to_json(), "kernel": out.to_json(), "passed": passed},
    )
    return OK if passed else FAILED


def cmd_exp_test(args):
    K = _load_kernel(args.kernel)
    rows = exp_kernel_test(K, args.t, args.tol)
    body = [
        {
            "t": r["t"],
            "one_minus_exp": r["one_minus_exp"].to_json(),
            "exp_min_eigenvalue": r["exp_min_eigenvalue"],
            "psd_floor": r["psd_floor"],
            "passed": r["passed"],
        }
        for r in rows
    ]
    passed = all(r["passed"] for r in rows)
    _emit(args, {"rows": body, "passed": passed})
    return OK if passed else FAILED


def cmd_frullani(args):
    quad = QuadConfig(args.eps, args.horizon, args.nodes)
    value = frullani_power(args.x, args.alpha, quad)
    rel = abs(value - args.x**args.alpha) / args.x**args.alpha
    passed = rel <= args.rtol
    _emit(
        args,
        {
            "value": value,
            "exact": args.x**args.alpha,
            "relative_error": rel,
            "c_alpha": frullani_constant(args.alpha),
            "passed": passed,
        },
    )
    return OK if passed else FAILED


def cmd_mazur(args):
    if args.modulus:
        if args.p_from is None:
            raise InputError("--modulus needs --p-from")
        table = mazur_modulus_estimate(args.p_from, args.p_to, args.samples, args.seed, args.atoms)
        if args.format == "csv":
            _emit_csv(args, ["input_dist", "output_dist"], zip(table["input_dist"].tolist(), table["output_dist"].tolist()))
        else:
            _emit(args, {k: v for k, v in table.items()})
        return OK
    if not args.vector:
        raise InputError("mazur needs --vector or --modulus")
    v = LpVector.from_json(io.read_json(args.vector))
    p_from = args.p_from if args.p_from is not None else v.p
    w = mazur_map(v.with_p(p_from), p_from, args.p_to)
    before = float(np.dot(v.space.weights, np.abs(v.values) ** p_from))
    after = float(np.dot(w.space.weights, np.abs(w.values) ** args.p_to))
    passed = abs(before - after) <= 1e-12 * max(1.0, abs(before))
    _emit(
        args,
        {
            "vector": w.to_json(),
            "gauge_in": gauge_report(v.with_p(p_from)),
            "gauge_out": gauge_report(w),
            "power_sum_in": before,
            "power_sum_out": after,
            "passed": passed,
        },
    )
    return OK if passed else FAILED


def cmd_gns(args):
    try:
        emb = gns_embed(_load_kernel(args.kernel), args.tol)
    except PropertyViolation as exc:
        witness = exc.witness.to_json() if hasattr(exc.witness, "to_json") else exc.witness
        _emit(args, {"error": str(exc), "witness": witness, "passed": False})
        return FAILED
    _emit(args, {"embedding": emb.to_json(), "passed": True})
    return OK


_PSI = {
    "word-length": lambda g: float(g.word_length()),
    "zero": lambda g: 0.0,
}


def cmd_escape(args):
    spec = GroupSpec.parse(args.group)
    if args.psi not in _PSI:
        raise InputError(f"unknown psi {args.psi!r}; choose from {sorted(_PSI)}")
    b = ball(spec, args.radius)
    psi = CndFunction.from_ball(b, _PSI[args.psi])
    rows = escape_profile(psi, range(0, args.radius + 1))
    if args.format == "json":
        _emit(args, {"profile": rows, "escaping": is_escaping(rows[1:]), "passed": True})
    else:
        _emit_csv(args, ["radius", "min_psi"], rows)
    return OK


def cmd_tree_action(args):
    act = tree_cocycle(args.rank, args.p, args.radius)
    data = action_to_json(act)
    if args.out:
        io.write_json(args.out, data)
    else:
        sys.stdout.write(io.dumps(data))
    return OK


def cmd_verify(args):
    act = action_from_json(io.read_json(args.action))
    b = domain_ball(act) if args.radius is None else ball(act.spec, args.radius)
    iso = verify_isometry(act.rep, act.p, b, args.isometry_tol, args.seed)
    coc = verify_cocycle(act, b, args.cocycle_tol)
    passed = iso["passed"] and coc["passed"]
    _emit(args, {"radius": b.radius, "checks": [iso, coc], "passed": passed})
    return OK if passed else FAILED


def cmd_profile(args):
    act = action_from_json(io.read_json(args.action))
    prof = properness_profile(act, args.radius)
    if args.format == "json":
        _emit(
            args,
            {
                "radii": prof.radii,
                "min_gauge": prof.minima,
                "convention": prof.convention,
                "strictly_increasing": prof.strictly_increasing(),
                "passed": prof.strictly_increasing(),
            },
        )
        return OK if prof.strictly_increasing() else FAILED
    _emit_csv(args, ["radius", "min_gauge"], prof.rows())
    return OK


def cmd_construct(args):
    report = construct_and_certify(
        args.group,
        args.p,
        args.radius,
        eps=tuple(args.eps),
        schedule=args.schedule,
        cnd_tol=args.tol,
        seed=args.seed,
    )
    if args.csv_dir:
        from pathlib import Path

        d = Path(args.csv_dir)
        prop = next(c for c in report["checks"] if c["check"] == "properness")
        io.write_csv(d / "profile.csv", ["radius", "min_gauge"], zip(prop["radii"], prop["min_gauge"]))
        if GroupSpec.parse(args.group) == GroupSpec.parse("Z"):
            rows = []
            for blk in report["schedule"]:
                n = blk["n"]
                for s, val in mixing_decay(n, range(0, min(n, 64) + 2)).items():
                    rows.append((n, s[0], f"{val.numerator}/{val.denominator}", float(val)))
            io.write_csv(d / "decay.csv", ["n", "shift", "inner_exact", "inner"], rows)
    _emit(args, report)
    return OK if report["passed"] else FAILED


def cmd_suite(args):
    from .suite import run_suite

    report, timings = run_suite(args.seed, args.mutation, not args.no_determinism)
    for name, res in report["criteria"].items():
        status = "PASS" if res["passed"] else "FAIL"
        print(f"{status}  {name:<24s} {timings[name]:8.3f}s", file=sys.stderr)
    out = args.out
    if out is None and io.scratch_dir() is not None:
        out = io.scratch_dir() / "suite_report.json"
    if out:
        io.write_json(out, report)
    else:
        sys.stdout.write(io.dumps(report))
    return OK if report["passed"] else FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="haagerup-lab",
        description="CND kernels, Mazur maps and affine isometric actions on finite L_p spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.set_defaults(func=func)
        p.add_argument("--out", help="output path (default: stdout)")
        return p

    p = add("cnd-test", cmd_cnd_test, "Test a kernel for conditional negative definiteness.")
    p.add_argument("--kernel", required=True)
    p.add_argument("--tol", type=float, default=defaults.CND_TOL)

    p = add("power", cmd_power, "Entrywise power K^alpha, 0 < alpha < 1, with CND tests.")
    p.add_argument("--kernel", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--allow-identity", action="store_true", help="accept alpha = 1 as the identity")
    p.add_argument("--kernel-out")
    p.add_argument("--tol", type=float, default=defaults.CND_TOL)

    p = add("exp-test", cmd_exp_test, "Check 1 - exp(-tK) is CND and exp(-tK) is PSD.")
    p.add_argument("--kernel", required=True)
    p.add_argument("--t", type=_floats, default=[0.1, 1.0, 10.0])
    p.add_argument("--tol", type=float, default=defaults.CND_TOL)

    p = add(
        "frullani",
        cmd_frullani,
        "x^alpha from c_alpha * int_0^inf (1 - e^{-tx}) t^{-alpha-1} dt, c_alpha = alpha/Gamma(1-alpha). "
        "Log-spaced composite Simpson on [eps, horizon/x] with first-order head and tail corrections.",
    )
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--eps", type=float, default=defaults.FRULLANI_EPS)
    p.add_argument("--horizon", type=float, default=defaults.FRULLANI_HORIZON)
    p.add_argument("--nodes", type=int, default=defaults.FRULLANI_NODES)
    p.add_argument("--rtol", type=float, default=defaults.FRULLANI_RTOL)

    p = add("mazur", cmd_mazur, "Mazur map of a vector, or an empirical modulus table.")
    p.add_argument("--vector")
    p.add_argument("--p-from", type=float)
    p.add_argument("--p-to", type=float, required=True)
    p.add_argument("--modulus", action="store_true")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--atoms", type=int, default=32)
    p.add_argument("--seed", type=int, default=defaults.DEFAULT_SEED)
    p.add_argument("--format", choices=["json", "csv"], default="csv")

    p = add("gns", cmd_gns, "Euclidean embedding realizing a CND kernel as squared distances.")
    p.add_argument("--kernel", required=True)
    p.add_argument("--tol", type=float, default=defaults.CND_TOL)

    p = add("escape", cmd_escape, "Sphere minima of a function on a Cayley ball.")
    p.add_argument("--group", required=True)
    p.add_argument("--psi", default="word-length")
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--format", choices=["json", "csv"], default="csv")

    p = add("tree-action", cmd_tree_action, "Edge cocycle of a free group on its Cayley tree.")
    p.add_argument("--rank", type=int, default=2)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--radius", type=int, required=True)

    p = add("verify", cmd_verify, "Verify isometry and the cocycle identity of an action bundle.")
    p.add_argument("--action", required=True)
    p.add_argument("--radius", type=int)
    p.add_argument("--isometry-tol", type=float, default=defaults.ISOMETRY_TOL)
    p.add_argument("--cocycle-tol", type=float, default=defaults.COCYCLE_TOL)
    p.add_argument("--seed", type=int, default=defaults.DEFAULT_SEED)

    p = add("profile", cmd_profile, "Properness profile: minimum cocycle gauge per sphere.")
    p.add_argument("--action", required=True)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--format", choices=["json", "csv"], default="csv")

    p = add("construct", cmd_construct, "Build and certify the shift cocycle on Z or Z^d.")
    p.add_argument("--group", default="Z")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--eps", type=_floats, default=[0.1, 0.05, 0.02])
    p.add_argument("--schedule", type=_ints, help="explicit odd window lengths")
    p.add_argument("--tol", type=float, default=defaults.CND_TOL)
    p.add_argument("--seed", type=int, default=defaults.DEFAULT_SEED)
    p.add_argument("--csv-dir", help="directory for profile.csv and decay.csv")

    p = add("suite", cmd_suite, "Run the acceptance battery.")
    p.add_argument("--seed", type=int, default=defaults.DEFAULT_SEED)
    p.add_argument("--mutation", choices=["mazur-sign-flip"])
    p.add_argument("--no-determinism", action="store_true", help="skip the second identical run")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ResourceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT
    except PropertyViolation as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return FAILED
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
