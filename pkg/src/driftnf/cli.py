"""Command line front end: normalize, check, estimate, compare.

Exit codes: 0 ok, 2 condition failure, 3 resonance/pole, 4 parse error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

from . import bounds, dynamics
from .errors import (ExactResonance, PoleEncountered, PoleInsideDomain,
                     PotentialMismatch, ProblemParseError, ResonantDomain)
from .literals import format_rational, format_series
from .problem import load_problem
from .transform import NormalFormBuilder

EXIT_OK = 0
EXIT_CONDITION = 2
EXIT_RESONANCE = 3
EXIT_PARSE = 4


def result_to_dict(result):
    """JSON-ready dictionary with every coefficient as an exact string."""
    def veclit(series_list):
        return [format_series(s, sugar=False) for s in series_list]

    return {
        "order": result.order,
        "modes_cutoff": result.modes_cutoff,
        "generating_functions": [format_series(s, sugar=False) for s in result.psis],
        "alpha": {f"{j},{p}": veclit(v) for (j, p), v in sorted(result.alphas.items())},
        "beta": {f"{j},{p}": veclit(v) for (j, p), v in sorted(result.betas.items())},
        "eta": {f"{j},{p}": [format_rational(c) for c in v]
                for (j, p), v in sorted(result.eta.items())},
        "omega_corrections": {f"{j},{p}": [format_rational(c) for c in v]
                              for (j, p), v in sorted(result.omega_corrections.items())},
        "maps": {
            "gamma_x": veclit(result.gamma_x), "gamma_y": veclit(result.gamma_y),
            "delta_x": veclit(result.delta_x), "delta_y": veclit(result.delta_y),
            "phi_x": veclit(result.phi_x), "phi_y": veclit(result.phi_y),
            "t_shift": veclit(result.t_shift),
            "x_fwd_shift": veclit(result.x_fwd_shift),
        },
        "remainders": {
            "f_next_order": veclit(result.f_remainder),
            "g_next_order": veclit(result.g_remainder),
            "f_high_modes": veclit(result.f_high_modes),
            "g_high_modes": veclit(result.g_high_modes),
        },
        "term_counts": result.term_counts,
    }


def render_report(result):
    lines = [f"normal form of order {result.order} (Fourier cutoff K = {result.modes_cutoff})",
             "", "normalized frequency:"]
    for i, s in enumerate(result.omega_d_series()):
        lines.append(f"  Omega_d[{i}] = {format_series(s)}")
    lines.append("")
    lines.append("drift:")
    eta = result.eta_series()
    for i, s in enumerate(eta):
        lines.append(f"  eta[{i}] = {format_series(s) if not s.is_zero() else '0'}")
    lines.append("")
    lines.append("generating functions:")
    for n, s in enumerate(result.psis, start=1):
        lines.append(f"  psi_{n}0 = {format_series(s)}")
    lines.append("")
    lines.append(f"term counts (informational): {result.term_counts}")
    return "\n".join(lines) + "\n"


def _build(problem, N, K):
    builder = NormalFormBuilder(problem.spec(), N, K)
    for n in range(1, N + 1):
        builder.conservative_order(n)
    for n in range(1, N + 1):
        builder.dissipative_order(n)
    return builder


def _outdir(args):
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def cmd_normalize(args):
    problem = load_problem(args.problem)
    N = args.order if args.order is not None else problem.run.get("N", 2)
    K = args.modes if args.modes is not None else (
        problem.domain.K if problem.domain else problem.run.get("K", 20))
    if N == 0:
        print("order 0: identity transformation, Omega_d = omega")
        return EXIT_OK
    builder = _build(problem, N, K)
    result = builder.finalize()
    out = _outdir(args)
    stem = os.path.join(out, problem.name)
    with open(stem + "_normalform.json", "w") as fh:
        json.dump(result_to_dict(result), fh, indent=2)
    report = render_report(result)
    with open(stem + "_report.txt", "w") as fh:
        fh.write(report)
    print(report, end="")
    print(f"wrote {stem}_normalform.json and {stem}_report.txt")
    return EXIT_OK


def cmd_check(args):
    problem = load_problem(args.problem)
    if problem.domain is None:
        raise ProblemParseError("check requires a domain block")
    N = args.order if args.order is not None else problem.run.get("N", 2)
    builder = _build(problem, N, problem.domain.K)
    result = builder.finalize()
    eps = args.eps if args.eps is not None else None
    mu = args.mu if args.mu is not None else None
    report = bounds.check_conditions(problem.domain, result, eps=eps, mu=mu)
    out = _outdir(args)
    stem = os.path.join(out, problem.name)
    with open(stem + "_conditions.json", "w") as fh:
        fh.write(report.to_json())
    print(f"non-resonance constant a = {report.a:.6g}")
    for c in report.conditions:
        caps = []
        if c.eps_max is not None:
            caps.append(f"eps <= {c.eps_max:.4g}")
        if c.mu_max is not None:
            caps.append(f"|mu| <= {c.mu_max:.4g}")
        status = "ok " if c.passed else "FAIL"
        print(f"  [{status}] {c.name:6s} lhs = {c.lhs:.4g}  ({', '.join(caps)})")
    print(f"overall caps: eps <= {report.eps_cap:.4g} (binding {report.eps_binding}), "
          f"|mu| <= {report.mu_cap:.4g} (binding {report.mu_binding})")
    print(f"wrote {stem}_conditions.json")
    if not report.all_passed:
        print("requested parameters violate a condition", file=sys.stderr)
        return EXIT_CONDITION
    return EXIT_OK


def _parse_orders(text):
    if ":" in text:
        lo, hi = text.split(":")
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",") if s]


def cmd_estimate(args):
    problem = load_problem(args.problem)
    if problem.domain is None:
        raise ProblemParseError("estimate requires a domain block")
    orders = _parse_orders(args.orders)
    if not orders:
        print("empty order range: nothing to do")
        return EXIT_OK
    params = problem.domain
    if args.modes is not None:
        params.K = args.modes
    if params.a is None:
        params.a = bounds.nonres_constant(problem.omega, params.y0, params.r0, params.K)
    builder = _build(problem, max(orders), params.K)
    if args.tau is not None:
        mode, tau0 = "fix-tau0", args.tau
    else:
        mode, tau0 = "fix-K", None
    reports = bounds.make_tables(builder, params, orders, mode=mode, tau0=tau0)
    if mode == "fix-tau0":
        for n, rep in reports.items():
            needed = max(builder.max_rhs_mode_by_order.get(m, 0)
                         for m in range(1, n + 1))
            if rep.K < needed:
                print(f"warning: derived K={rep.K} at N={n} is below the largest "
                      f"generated Fourier order {needed}; rebuild with the "
                      "smaller cutoff for exact results", file=sys.stderr)
    out = _outdir(args)
    tag = "fixK" if mode == "fix-K" else "fixtau"
    stem = os.path.join(out, f"{problem.name}_table_{tag}")
    with open(stem + ".csv", "w") as fh:
        fh.write(bounds.tables_to_csv(reports))
    with open(stem + ".json", "w") as fh:
        fh.write(bounds.tables_to_json(reports))
    print(bounds.tables_to_csv(reports), end="")
    print(f"wrote {stem}.csv and {stem}.json")
    return EXIT_OK


def cmd_compare(args):
    problem = load_problem(args.problem)
    run = problem.run
    orders = _parse_orders(args.orders) if args.orders else [run.get("N", 2)]
    eps = args.eps if args.eps is not None else run.get("eps", 1e-3)
    mu = args.mu if args.mu is not None else run.get("mu", 1e-3)
    Y0 = run.get("Y0", problem.domain.y0 if problem.domain else 1.0)
    X0 = run.get("X0", 0.0)
    dt = args.dt if args.dt is not None else run.get("dt", 1e-2)
    T = args.time if args.time is not None else run.get("T", 1e4 * math.pi)
    stride = run.get("stride", 100)
    K = problem.domain.K if problem.domain else run.get("K", 20)

    builder = _build(problem, max(orders), K)
    results = {n: builder.finalize(order=n) for n in orders}
    spec = problem.spec()
    top = results[max(orders)]
    solutions = {n: dynamics.AnalyticSolution(r, Y0, X0, eps, mu, initial_in="normal")
                 for n, r in results.items()}
    s0 = solutions[max(orders)].state(0.0)

    out = _outdir(args)
    stem = os.path.join(out, problem.name)
    if T <= 0:
        path = stem + "_errors.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x_num", "y_num"] + [f"err_N{n}" for n in orders])
        print(f"wrote {path} (empty horizon)")
        return EXIT_OK

    traj = dynamics.rk4_fast(spec, top.eta, eps, mu,
                             dynamics.State(s0.x, s0.y, 0.0), dt, T,
                             stride=stride, track_energy=args.energy)
    errs = {n: dynamics.error_curve(traj, sol) for n, sol in solutions.items()}
    header = ["t", "x_num", "y_num"] + [f"err_N{n}" for n in orders]
    energy_report = None
    if args.energy:
        energy_report = dynamics.energy_track(traj, spec, top.eta, eps, mu)
        header.append("H")
    path = stem + "_errors.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(len(traj)):
            row = [f"{traj.times[i]:.6f}", f"{traj.xs[i,0]:.12g}", f"{traj.ys[i,0]:.12g}"]
            row += [f"{errs[n][i]:.6e}" for n in orders]
            if energy_report is not None:
                row.append(f"{energy_report.energies[i]:.12g}")
            w.writerow(row)
    print(f"wrote {path}")
    if energy_report is not None:
        print(f"energy oscillation period ~ {energy_report.period:.4g}, "
              f"secular slope {energy_report.secular_slope:.3e}")
    if args.drift is not None:
        dtraj = dynamics.rk4_fast(spec, top.eta, eps, mu,
                                  dynamics.State(s0.x, s0.y, 0.0), dt, args.drift,
                                  stride=max(stride, 100))
        print(f"action drift over T = {args.drift:g}: {dynamics.drift_measure(dtraj):.6e}")
    return EXIT_OK


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="driftnf",
        description="normal forms and stability estimates for dissipative "
                    "nearly-integrable vector fields")
    ap.add_argument("--out", help="output directory (default: current)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", help="construct the normal form")
    p.add_argument("problem")
    p.add_argument("--order", type=int, help="normalization order N")
    p.add_argument("--modes", type=int, help="Fourier cutoff K")
    p.add_argument("--dump-canonical", action="store_true")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("check", help="evaluate the smallness conditions")
    p.add_argument("problem")
    p.add_argument("--order", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--dump-canonical", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("estimate", help="stability constants versus order")
    p.add_argument("problem")
    p.add_argument("--orders", default="2:5", help="range like 2:5 or list 2,3")
    p.add_argument("--modes", type=int, help="fixed Fourier cutoff K")
    p.add_argument("--tau", type=float, help="fix tau0 and derive K")
    p.add_argument("--dump-canonical", action="store_true")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("compare", help="numerical versus analytic solution")
    p.add_argument("problem")
    p.add_argument("--orders", help="normal form orders, e.g. 1,3,5")
    p.add_argument("--eps", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--time", type=float, help="integration horizon T")
    p.add_argument("--drift", type=float, help="also measure drift over this horizon")
    p.add_argument("--energy", action="store_true", help="track the energy")
    p.add_argument("--dump-canonical", action="store_true")
    p.set_defaults(func=cmd_compare)

    args = ap.parse_args(argv)
    try:
        if getattr(args, "dump_canonical", False):
            problem = load_problem(args.problem)
            out = _outdir(args)
            path = os.path.join(out, problem.name + ".canonical.problem")
            with open(path, "w") as fh:
                fh.write(problem.dump_canonical())
            print(f"wrote {path}")
        return args.func(args)
    except ProblemParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (ExactResonance, ResonantDomain, PoleInsideDomain, PoleEncountered) as e:
        print(f"resonance/pole: {e}", file=sys.stderr)
        return EXIT_RESONANCE
    except PotentialMismatch as e:
        print(f"internal consistency failure: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
