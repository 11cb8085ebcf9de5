"""Command-line front end.

Exit codes: 0 success, 2 bad input, 3 solver failure, 4 certification failed.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dynamic import (clear_dynamic_matrix, clear_dynamic_matrix_sequential, clear_dynamic_prorata,
                      clear_dynamic_prorata_sequential, scenario_compare)
from .graph import globally_reachable, has_globally_reachable_sink_node, strong_components
from .io import (InstanceFormatError, dump_json, load_schedule, parse_instance, resolve_path,
                 schedule_to_dict)
from .lp import SolverOptions
from .network import (MATRIX, PRORATA, DynamicInstance, InvalidInstanceError, StaticInstance,
                      default_set, loss, loss_closed_form, relative_liabilities)
from .static import SolverError, clear_matrix, clear_prorata_fda, clear_prorata_lp, static_report
from .validation import certify_schedule, check_absolute_priority, check_admissible, check_payment_acyclicity

log = logging.getLogger("dynclear")

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_CERT = 0, 2, 3, 4


def _cents(v):
    # rounding first keeps round-off like -1e-15 from printing as -0.00
    return round(float(v), 2) + 0.0


def _fmt_matrix(M, indent="  "):
    M = np.atleast_2d(np.round(M, 2)) + 0.0
    return "\n".join(indent + " ".join(f"{v:9.2f}" for v in row) for row in M)


def _checks_dict(report):
    return {k: {"passed": c.passed, "violation": c.violation,
                "locator": list(c.locator) if c.locator is not None else None,
                "detail": c.detail}
            for k, c in report.checks.items()}


def _base_doc(args, inst):
    doc = {"command": args.command, "instance": str(args.instance), "n": inst.n}
    if not args.no_timestamp:
        doc["created"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return doc


def _emit(args, doc, text, schedule=None):
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        dump_json(doc, out / "report.json")
        (out / "report.txt").write_text(text + "\n")
        if schedule is not None:
            dump_json(schedule_to_dict(schedule), out / "schedule.json")
        log.info("wrote report to %s", out)


def _cmd_clear_static(args, inst):
    if isinstance(inst, DynamicInstance):
        log.info("dynamic instance given; clearing period 0 on its own")
        inst = inst.period(0)
    opts = SolverOptions()
    if args.method == "fda":
        res = clear_prorata_fda(inst)
        if not res.converged:
            raise SolverError("iteration_limit", "fictitious default iteration did not converge")
        payments = res.payments
        rep = static_report(inst, payments, PRORATA, args.tol)
        rep.extra["fda_iterations"] = res.iterations
    elif args.mode == MATRIX:
        payments, rep = clear_matrix(inst, opts, args.tol)
    else:
        payments, rep = clear_prorata_lp(inst, opts, args.tol)
    cert = rep.extra["checks"]
    doc = _base_doc(args, inst)
    doc.update(mode=args.mode, method=args.method, loss=rep.loss, total_unpaid=rep.total_unpaid,
               objective=rep.objective, default_set=rep.default_set, payments=np.asarray(payments).tolist(),
               residual=rep.residual.tolist(), worths=rep.worths.tolist(),
               certifications=_checks_dict(cert), solver_status=rep.solver_status)
    lines = [f"static clearing ({args.mode}, {args.method})",
             "payments:", _fmt_matrix(payments),
             f"total unpaid: {rep.total_unpaid:.2f}",
             f"default set: {rep.default_set}",
             "worths: " + " ".join(f"{_cents(w):.2f}" for w in rep.worths),
             "certifications: " + ", ".join(f"{k}={'ok' if c else 'FAIL'}" for k, c in cert.checks.items())]
    _emit(args, doc, "\n".join(lines))
    return EXIT_OK if cert.passed else EXIT_CERT


def _dynamic_instance(args, inst):
    if isinstance(inst, StaticInstance):
        inst = inst.as_dynamic()
    changes = {}
    if args.alpha is not None:
        changes["alpha"] = args.alpha
    if args.eta is not None:
        changes["eta"] = args.eta
    if args.horizon is not None:
        if args.horizon > inst.horizon:
            log.info("padding inflows with %d zero periods", args.horizon - inst.horizon)
        changes["horizon"] = args.horizon
    return inst.replace(**changes) if changes else inst


def _schedule_lines(schedule):
    lines = []
    for t in range(schedule.horizon):
        lines.append(f"t={t}:")
        lines.append(_fmt_matrix(schedule.payments[t]))
    return lines


def _cmd_clear_dynamic(args, inst):
    inst = _dynamic_instance(args, inst)
    opts = SolverOptions()
    table = {
        (MATRIX, "full"): clear_dynamic_matrix,
        (MATRIX, "sequential"): clear_dynamic_matrix_sequential,
        (PRORATA, "full"): clear_dynamic_prorata,
        (PRORATA, "sequential"): clear_dynamic_prorata_sequential,
    }
    if args.method == "fda":
        sched, rep = clear_dynamic_prorata_sequential(inst, opts, method="fda")
    else:
        sched, rep = table[(args.mode, args.method)](inst, opts)
    cert = rep.extra["checks"]
    doc = _base_doc(args, inst)
    doc.update(mode=args.mode, method=args.method, alpha=inst.alpha, eta=inst.eta,
               horizon=inst.horizon, loss=rep.loss, cost_eta=rep.cost_eta,
               objective=rep.objective, total_unpaid=rep.total_unpaid,
               default_set=rep.default_set, payments=sched.payments.tolist(),
               residual=np.asarray(rep.residual).tolist(), worths=rep.worths.tolist(),
               certifications=_checks_dict(cert), solver_status=rep.solver_status)
    lines = [f"dynamic clearing ({args.mode}, {args.method}), T={inst.horizon}, alpha={inst.alpha}, eta={inst.eta}",
             "payments:"] + _schedule_lines(sched) + [
             "residual debt at T:", _fmt_matrix(rep.residual),
             f"loss L: {rep.loss:.2f}" + (f"   cost J: {rep.cost_eta:.2f}" if rep.cost_eta is not None else ""),
             f"total unpaid at T: {rep.total_unpaid:.2f}",
             f"default set: {rep.default_set}",
             "certifications: " + ", ".join(f"{k}={'ok' if c else 'FAIL'}" for k, c in cert.checks.items())]
    _emit(args, doc, "\n".join(lines), sched)
    return EXIT_OK if cert.passed else EXIT_CERT


def _cmd_validate(args, inst):
    sched = load_schedule(args.schedule, inst)
    cert = certify_schedule(sched, args.tol)
    adm = check_admissible(sched, args.tol)
    pri = check_absolute_priority(sched)
    L = loss(sched, eta=0.0, check=False)
    tol = sched.tolerance() if args.tol is None else args.tol
    residual = np.clip(sched.residual, 0.0, None)
    defaults = default_set(residual, tol, sched.instance.external_node)
    doc = _base_doc(args, sched.instance)
    doc.update(mode=sched.mode, horizon=sched.horizon, alpha=sched.instance.alpha,
               loss=L, loss_closed_form=loss_closed_form(sched, eta=0.0),
               total_unpaid=float(residual.sum()), default_set=defaults,
               certifications=_checks_dict(cert), admissibility=_checks_dict(adm),
               priority=_checks_dict(pri))
    if sched.mode == MATRIX:
        doc["acyclicity"] = _checks_dict(check_payment_acyclicity(sched))
    lines = [f"validated {sched.mode} schedule, T={sched.horizon}, alpha={sched.instance.alpha}",
             f"loss L: {L:.2f}", f"total unpaid at T: {float(residual.sum()):.2f}",
             f"default set: {defaults}"]
    for name, c in cert.checks.items():
        where = f" at {c.locator}" if c.locator is not None and not c else ""
        lines.append(f"  {name:<12} {'ok' if c else 'FAIL'}  (max violation {c.violation:.3g}{where})")
    _emit(args, doc, "\n".join(lines))
    return EXIT_OK if cert.passed else EXIT_CERT


def _cmd_analyze(args, inst):
    A = relative_liabilities(inst.liabilities)
    cond = strong_components(A)
    comps = []
    lines = ["strong components of the pro-rata graph:"]
    for comp in cond.components:
        flags = [f for f, on in (("sink", comp.is_sink), ("source", comp.is_source),
                                 ("isolated", comp.is_isolated), ("trivial", comp.is_trivial)) if on]
        comps.append({"nodes": list(comp.nodes), "sink": comp.is_sink, "source": comp.is_source,
                      "isolated": comp.is_isolated, "trivial": comp.is_trivial})
        lines.append(f"  {list(comp.nodes)}  {' '.join(flags)}")
    reach = {str(list(c.nodes)): globally_reachable(A, c.nodes) for c in cond.sinks}
    unique_sink = has_globally_reachable_sink_node(A)
    lines.append("sink components globally reachable: " +
                 ", ".join(f"{k}={v}" for k, v in reach.items()))
    lines.append(f"unique globally reachable sink node: {unique_sink}")
    doc = _base_doc(args, inst)
    doc.update(components=comps, sinks_globally_reachable=reach, unique_reachable_sink_node=unique_sink)
    _emit(args, doc, "\n".join(lines))
    return EXIT_OK


def _cmd_compare(args, inst):
    inst = _dynamic_instance(args, inst)
    comp = scenario_compare(inst)
    doc = _base_doc(args, inst)
    doc.update(alpha=inst.alpha, horizon=inst.horizon, eta=inst.eta, rows=comp.rows)
    _emit(args, doc, comp.table())
    failed = [r["method"] for r in comp.rows if not r["certified"]]
    return EXIT_CERT if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None,
                        help="tolerance for certificates and default detection")
    common.add_argument("--out", metavar="PATH", help="directory for report.json/report.txt/schedule.json")
    common.add_argument("--no-timestamp", action="store_true", help="omit the creation time from reports")
    common.add_argument("-v", "--verbose", action="store_true")

    dyn = argparse.ArgumentParser(add_help=False)
    dyn.add_argument("--alpha", type=float, help="interest factor on carried-over debt (>= 1)")
    dyn.add_argument("--eta", type=float, help="terminal-debt penalty weight in [0, 1)")
    dyn.add_argument("--horizon", type=int, help="number of periods (pads inflows with zeros)")

    parser = argparse.ArgumentParser(prog="dynclear", description="Clearing payments in financial networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    clear = sub.add_parser("clear", help="compute clearing payments")
    csub = clear.add_subparsers(dest="kind", required=True)
    st = csub.add_parser("static", parents=[common], help="single-period clearing")
    st.add_argument("--mode", choices=[MATRIX, PRORATA], default=MATRIX)
    st.add_argument("--method", choices=["full", "fda"], default="full")
    st.add_argument("instance")
    st.set_defaults(func=_cmd_clear_static)
    dy = csub.add_parser("dynamic", parents=[common, dyn], help="multi-period clearing")
    dy.add_argument("--mode", choices=[MATRIX, PRORATA], default=MATRIX)
    dy.add_argument("--method", choices=["full", "sequential", "fda"], default="full")
    dy.add_argument("instance")
    dy.set_defaults(func=_cmd_clear_dynamic)

    va = sub.add_parser("validate", parents=[common], help="certify a payment schedule")
    va.add_argument("instance")
    va.add_argument("--schedule", required=True)
    va.set_defaults(func=_cmd_validate)

    an = sub.add_parser("analyze-graph", parents=[common], help="strong components and sinks")
    an.add_argument("instance")
    an.set_defaults(func=_cmd_analyze)

    co = sub.add_parser("compare", parents=[common, dyn], help="run every method side by side")
    co.add_argument("instance")
    co.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "clear":
        args.command = f"clear {args.kind}"
        if args.method == "fda" and args.mode != PRORATA:
            parser.error("--method fda requires --mode prorata")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        resolve_path(args.instance)
        inst = parse_instance(args.instance)
        return args.func(args, inst)
    except (InstanceFormatError, InvalidInstanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
