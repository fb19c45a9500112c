"""Command-line pipeline: scenario -> model -> frontier -> bargaining -> reports.

Every subcommand persists its outputs next to a run manifest listing the
exact configuration, the seed (when randomness is involved), the tool
version, every emitted file, and wall times.  Re-running with identical
inputs reproduces every artifact byte-for-byte except the wall-time fields.

Exit codes: 0 success, 1 domain error (bad data, infeasible model, missing
artifact), 2 usage error (unknown flags or subcommands).
"""

import argparse
import json
import math
import os
import subprocess
import sys
import time
from fractions import Fraction

from . import __version__
from .core import EvshareError, check_assignment, evaluate
from . import bargaining as _bargaining
from . import charging as _charging
from . import frontier as _frontier
from . import oracle as _oracle
from . import scenario as _scenario
from . import solver as _solver

SOLVER_ENV = "EVSHARE_SOLVER"


class CliError(EvshareError):
    """Domain-level failure of a CLI stage."""


# ---------------------------------------------------------------------------
# Small shared helpers.


def _read(path):
    if not os.path.exists(path):
        raise CliError(f"missing artifact: {path}")
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _write(path, text):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)


def _json_text(data):
    return json.dumps(data, indent=2) + "\n"


def _load_instance(path):
    return _charging.instance_from_json(_read(path))


def _stem(path):
    return os.path.splitext(os.path.basename(path))[0]


def _eps_text(value):
    frac = Fraction(str(value))
    if frac.denominator == 1:
        return str(frac.numerator)
    return repr(float(frac))


def _manifest(path, command, config, outputs, wall_times, seed=None):
    data = {
        "tool": "evshare",
        "version": __version__,
        "command": command,
        "config": config,
        "seed": seed,
        "outputs": outputs,
        "wall_times": wall_times,
    }
    _write(path, _json_text(data))


def _assignment_values(assignment):
    return {vid: value for vid, value in assignment.rendering() if value != 0}


# ---------------------------------------------------------------------------
# generate


def _cmd_generate(args):
    started = time.perf_counter()
    config = _scenario.ScenarioConfig(
        ev_distribution=args.ev_dist,
        charger_layout=args.charger_layout,
        n_evs=args.n_evs,
        n_chargers=args.n_chargers,
        area_km=args.area,
        seed=args.seed,
        horizon=args.horizon,
        rental_fee_sek=args.rental_fee,
        vot_sek_per_hour=args.vot,
        travel_sek_per_km=args.travel,
        collab_discount=args.collab_discount,
        charge_rate_kw=args.charge_rate,
        window_length_h=args.window,
        earliest_start_range=tuple(args.earliest),
        demand_intervals=tuple(args.demand),
        price_scale=args.price_scale,
    )
    prices = _scenario.load_price_series(_read(args.prices)) if args.prices else None
    instance = _scenario.generate_scenario(config, prices)
    out_path = os.path.join(args.out_dir, f"{instance.name}.json")
    _write(out_path, _charging.instance_to_json(instance))
    manifest_path = os.path.join(args.out_dir, f"{instance.name}-manifest.json")
    _manifest(
        manifest_path, "generate",
        {
            "ev_dist": args.ev_dist, "charger_layout": args.charger_layout,
            "n_evs": args.n_evs, "n_chargers": args.n_chargers,
            "horizon": args.horizon, "area": args.area,
            "rental_fee": args.rental_fee, "vot": args.vot,
            "travel": args.travel, "collab_discount": args.collab_discount,
            "charge_rate": args.charge_rate, "window": args.window,
            "earliest": list(args.earliest), "demand": list(args.demand),
            "price_scale": args.price_scale,
            "prices": args.prices,
        },
        {"instance": out_path},
        {"total_s": round(time.perf_counter() - started, 6)},
        seed=args.seed,
    )
    print(f"wrote {out_path}")
    return 0


# ---------------------------------------------------------------------------
# frontier


def _frontier_paths(out_dir, stem, method, eps_text):
    base = os.path.join(out_dir, f"{stem}-{method}-eps{eps_text}")
    return {
        "frontier_csv": f"{base}-frontier.csv",
        "stats_csv": f"{base}-stats.csv",
        "assignments_json": f"{base}-assignments.json",
        "manifest": f"{base}-manifest.json",
    }


def _cmd_frontier(args):
    started = time.perf_counter()
    instance = _load_instance(args.instance)
    participation = _charging.noncollab_point(instance)
    program = _charging.build_charging_program(instance)
    config = _solver.SolverConfig(node_limit=args.node_limit)
    epsilon = "0" if args.method == "bbox" else args.epsilon
    result = _frontier.run_method(program, participation, args.method,
                                  epsilon, config)

    out_dir = args.out_dir or os.path.dirname(os.path.abspath(args.instance))
    eps_text = _eps_text(epsilon)
    paths = _frontier_paths(out_dir, _stem(args.instance), args.method, eps_text)

    _write(paths["frontier_csv"], _frontier.frontier_to_csv(result))
    _write(paths["stats_csv"], _frontier.stats_to_csv([_frontier.stats_row(result)]))
    refs = _frontier.assignment_refs(result)
    points_payload = {}
    for ref, (point, assignment) in zip(refs, result.points):
        points_payload[ref] = {
            "z1": point.z1,
            "z2": point.z2,
            "values": _assignment_values(assignment),
        }
    _write(paths["assignments_json"], _json_text({
        "instance": instance.name,
        "method": result.method,
        "epsilon": eps_text,
        "status": result.status,
        "participation": {"z1_non": participation.z1_non,
                          "z2_non": participation.z2_non},
        "points": points_payload,
    }))
    _manifest(
        paths["manifest"], "frontier",
        {"instance": args.instance, "method": args.method,
         "epsilon": eps_text, "node_limit": args.node_limit},
        {key: paths[key] for key in ("frontier_csv", "stats_csv", "assignments_json")},
        {"total_s": round(time.perf_counter() - started, 6),
         "search_s": round(result.wall_time, 6)},
    )
    print(f"{result.method} eps={eps_text}: {len(result.points)} points "
          f"({result.status}), {result.solver_calls} solver calls")
    print(f"wrote {paths['frontier_csv']}")
    return 0


# ---------------------------------------------------------------------------
# bargain


def _parse_alpha(text):
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    return Fraction(text)


def _cmd_bargain(args):
    started = time.perf_counter()
    method, _, rows = _frontier.frontier_from_csv(_read(args.frontier))
    if not rows:
        raise CliError(f"frontier {args.frontier} holds no points; "
                       "collaboration is not mutually beneficial")
    instance = _load_instance(args.instance)
    participation = _charging.noncollab_point(instance)
    disagreement = _frontier.CriterionPoint(participation.z1_non,
                                            participation.z2_non)
    points = [point for point, _ in rows]
    # Every method retains both frontier endpoints, so the per-objective
    # minima over the CSV equal the true ideal point.
    ideal = _frontier.CriterionPoint(min(p.z1 for p in points),
                                     min(p.z2 for p in points))
    refs = _bargaining.ReferencePoints(ideal, disagreement)

    if args.mode == "gnb":
        selected = _bargaining.gnb_select(points, disagreement, Fraction(args.pi))
        parameter = {"pi": args.pi}
    else:
        alpha = _parse_alpha(args.alpha)
        selected = _bargaining.distance_select(points, refs, alpha)
        parameter = {"alpha": args.alpha}

    ref = next(r for point, r in rows if point == selected)
    base = args.frontier
    if base.endswith("-frontier.csv"):
        base = base[:-len("-frontier.csv")]
    else:
        base = os.path.splitext(base)[0]
    out_path = args.out or f"{base}-bargain.json"
    _write(out_path, _json_text({
        "instance": instance.name,
        "frontier": args.frontier,
        "frontier_method": method,
        "mode": args.mode,
        **parameter,
        "ideal": {"z1": ideal.z1, "z2": ideal.z2},
        "disagreement": {"z1": disagreement.z1, "z2": disagreement.z2},
        "selected": {"z1": selected.z1, "z2": selected.z2, "assignment_ref": ref},
    }))
    _manifest(
        f"{os.path.splitext(out_path)[0]}-manifest.json", "bargain",
        {"frontier": args.frontier, "instance": args.instance,
         "mode": args.mode, **parameter},
        {"bargain_json": out_path},
        {"total_s": round(time.perf_counter() - started, 6)},
    )
    print(f"selected ({selected.z1}, {selected.z2}) ref={ref}")
    print(f"wrote {out_path}")
    return 0


# ---------------------------------------------------------------------------
# oracle


def _cmd_oracle(args):
    started = time.perf_counter()
    instance = _load_instance(args.instance)
    budget = _oracle.OracleBudget(args.budget)
    noncollab = _oracle.noncollab_costs(instance, budget)
    exact = _oracle.charging_frontier(instance, participation=noncollab,
                                      budget=budget)
    ordered = sorted(exact.items(), key=lambda item: item[0].as_tuple())

    out_dir = args.out_dir or os.path.dirname(os.path.abspath(args.instance))
    base = os.path.join(out_dir, f"{_stem(args.instance)}-oracle")
    csv_path = f"{base}.csv"
    assignments_path = f"{base}-assignments.json"

    import csv as _csv
    import io as _io
    buffer = _io.StringIO()
    writer = _csv.writer(buffer, lineterminator="\n")
    writer.writerow(_frontier.FRONTIER_HEADER)
    points_payload = {}
    for index, (point, assignment) in enumerate(ordered):
        ref = f"oracle-{index}"
        writer.writerow(["oracle", "0", index, point.z1, point.z2, ref])
        points_payload[ref] = {
            "z1": point.z1,
            "z2": point.z2,
            "values": _assignment_values(assignment),
        }
    _write(csv_path, buffer.getvalue())
    _write(assignments_path, _json_text({
        "instance": instance.name,
        "method": "oracle",
        "noncollab": {"z1_non": noncollab[0], "z2_non": noncollab[1]},
        "points": points_payload,
    }))
    _manifest(
        f"{base}-manifest.json", "oracle",
        {"instance": args.instance, "budget": args.budget},
        {"oracle_csv": csv_path, "assignments_json": assignments_path},
        {"total_s": round(time.perf_counter() - started, 6)},
    )
    print(f"oracle: {len(ordered)} points, noncollab={noncollab}")
    print(f"wrote {csv_path}")
    return 0


# ---------------------------------------------------------------------------
# report


def _find_runs(batch_dir):
    """Map (stem, method, eps_text) -> artifact paths for a batch directory."""
    runs = {}
    for name in sorted(os.listdir(batch_dir)):
        if not name.endswith("-frontier.csv"):
            continue
        trimmed = name[:-len("-frontier.csv")]
        pieces = trimmed.rsplit("-", 2)
        if len(pieces) != 3 or not pieces[2].startswith("eps"):
            continue
        stem, method, eps_piece = pieces
        eps_text = eps_piece[len("eps"):]
        runs[(stem, method, eps_text)] = {
            "frontier_csv": os.path.join(batch_dir, name),
            "stats_csv": os.path.join(batch_dir, f"{trimmed}-stats.csv"),
        }
    return runs


def _cmd_report(args):
    started = time.perf_counter()
    runs = _find_runs(args.batch)
    if not runs:
        raise CliError(f"no frontier artifacts (*-frontier.csv) found in {args.batch}")

    parsed = {}
    for key, paths in runs.items():
        _, _, rows = _frontier.frontier_from_csv(_read(paths["frontier_csv"]))
        stats = _frontier.stats_from_csv(_read(paths["stats_csv"]))
        if len(stats) != 1:
            raise CliError(f"{paths['stats_csv']}: expected exactly one stats row")
        parsed[key] = {"points": [p for p, _ in rows], "stats": stats[0]}

    baselines = {}
    for key in sorted(parsed):
        if key[1] == "bbox":
            baselines.setdefault(key[0], key)

    groups = {}
    for (stem, method, eps_text), run in sorted(parsed.items()):
        groups.setdefault((method, eps_text), []).append((stem, run))

    out_rows = []
    for (method, eps_text), members in sorted(groups.items()):
        ndps, cpus, gaps, ctss = [], [], [], []
        for stem, run in members:
            ndps.append(len(run["points"]))
            cpus.append(run["stats"]["wall_ms"])
            base_key = baselines.get(stem)
            if method != "bbox" and base_key is not None:
                base = parsed[base_key]
                exact_points = base["points"]
                if exact_points and run["points"]:
                    gaps.append(_frontier.gap_metric(
                        exact_points, run["points"],
                        exact_points[0], exact_points[-1]))
                base_ms = base["stats"]["wall_ms"]
                if base_ms > 0:
                    ctss.append(_frontier.cts_metric(base_ms, run["stats"]["wall_ms"]))
        out_rows.append({
            "method": method,
            "epsilon": eps_text,
            "cases": len(members),
            "ndp_mean": sum(ndps) / len(ndps),
            "cpu_ms_mean": sum(cpus) / len(cpus),
            "gap_pct_mean": sum(gaps) / len(gaps) if gaps else None,
            "cts_pct_mean": sum(ctss) / len(ctss) if ctss else None,
        })

    import csv as _csv
    import io as _io
    buffer = _io.StringIO()
    writer = _csv.writer(buffer, lineterminator="\n")
    writer.writerow(["method", "epsilon", "cases", "ndp_mean", "cpu_ms_mean",
                     "gap_pct_mean", "cts_pct_mean"])
    for row in out_rows:
        writer.writerow([
            row["method"], row["epsilon"], row["cases"],
            f"{row['ndp_mean']:.2f}", f"{row['cpu_ms_mean']:.1f}",
            "" if row["gap_pct_mean"] is None else f"{row['gap_pct_mean']:.2f}",
            "" if row["cts_pct_mean"] is None else f"{row['cts_pct_mean']:.1f}",
        ])
    out_path = args.out or os.path.join(args.batch, "report.csv")
    _write(out_path, buffer.getvalue())
    _manifest(
        f"{os.path.splitext(out_path)[0]}-manifest.json", "report",
        {"batch": args.batch},
        {"report_csv": out_path},
        {"total_s": round(time.perf_counter() - started, 6)},
    )
    print(f"wrote {out_path} ({len(out_rows)} aggregate rows over {len(parsed)} runs)")
    return 0


# ---------------------------------------------------------------------------
# export-lp / import-solution


def _cmd_export_lp(args):
    started = time.perf_counter()
    instance = _load_instance(args.instance)
    program = _charging.build_charging_program(instance)
    out_path = args.out or os.path.join(
        os.path.dirname(os.path.abspath(args.instance)),
        f"{_stem(args.instance)}-obj{args.objective}.lp")
    _write(out_path, _solver.export_lp(program, args.objective))
    outputs = {"lp": out_path}

    if args.run:
        executable = os.environ.get(SOLVER_ENV)
        if not executable:
            raise CliError(f"--run requires the {SOLVER_ENV} environment variable "
                           "to name an external solver executable")
        solution_path = f"{os.path.splitext(out_path)[0]}.sol"
        completed = subprocess.run([executable, out_path, solution_path],
                                   capture_output=True, text=True)
        if completed.returncode != 0:
            raise CliError(f"external solver failed ({completed.returncode}): "
                           f"{completed.stderr.strip()}")
        outputs["solution"] = solution_path
        code = _check_imported_solution(instance, program, solution_path)
        if code != 0:
            return code

    _manifest(
        f"{os.path.splitext(out_path)[0]}-manifest.json", "export-lp",
        {"instance": args.instance, "objective": args.objective, "run": args.run},
        outputs,
        {"total_s": round(time.perf_counter() - started, 6)},
    )
    print(f"wrote {out_path}")
    return 0


def _check_imported_solution(instance, program, solution_path):
    assignment = _solver.parse_external_solution(_read(solution_path), program)
    violated = check_assignment(program, assignment)
    if violated:
        raise CliError(f"solution violates {len(violated)} constraints, "
                       f"first: {violated[0]}")
    schedule = _charging.decode_schedule(assignment, instance, program)
    problems = _charging.validate_schedule(schedule, instance)
    if problems:
        raise CliError("decoded schedule invalid: " + "; ".join(problems))
    z1 = evaluate(program.objective1, assignment)
    z2 = evaluate(program.objective2, assignment)
    print(f"solution feasible: z1={z1} z2={z2}")
    return 0


def _cmd_import_solution(args):
    instance = _load_instance(args.instance)
    program = _charging.build_charging_program(instance)
    return _check_imported_solution(instance, program, args.solution)


# ---------------------------------------------------------------------------
# validate


def _cmd_validate(args):
    instance = _load_instance(args.instance)
    schedule = _charging.schedule_from_json(_read(args.schedule), instance)
    problems = _charging.validate_schedule(schedule, instance)
    if problems:
        for problem in problems:
            print(problem)
        return 1
    print("schedule valid")
    return 0


# ---------------------------------------------------------------------------
# Parser wiring.


def build_parser():
    parser = argparse.ArgumentParser(
        prog="evshare",
        description="Bi-objective EV-charging collaboration toolkit.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a seeded scenario instance")
    p.add_argument("--ev-dist", choices=("uniform", "clustered"), required=True)
    p.add_argument("--charger-layout", choices=("uniform", "centralized"),
                   required=True)
    p.add_argument("--n-evs", type=int, required=True)
    p.add_argument("--n-chargers", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--horizon", type=int, default=24)
    p.add_argument("--area", type=float, default=10.0)
    p.add_argument("--rental-fee", type=int, default=1500)
    p.add_argument("--vot", type=int, default=300)
    p.add_argument("--travel", type=float, default=6.0)
    p.add_argument("--collab-discount", type=float, default=0.5)
    p.add_argument("--charge-rate", type=int, default=50)
    p.add_argument("--window", type=int, default=4)
    p.add_argument("--earliest", type=int, nargs=2, default=(1, 20),
                   metavar=("LO", "HI"))
    p.add_argument("--demand", type=int, nargs=2, default=(1, 3),
                   metavar=("LO", "HI"))
    p.add_argument("--price-scale", type=float, default=1.0)
    p.add_argument("--prices", help="hour,price CSV overriding the default tariff")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("frontier", help="compute a frontier for an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--method", choices=_frontier.METHODS, required=True)
    p.add_argument("--epsilon", default="0",
                   help="closeness tolerance percentage (e.g. 3)")
    p.add_argument("--node-limit", type=int, default=None)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=_cmd_frontier)

    p = sub.add_parser("bargain", help="select an agreement point from a frontier")
    p.add_argument("--frontier", required=True, help="frontier CSV path")
    p.add_argument("--instance", required=True)
    p.add_argument("--mode", choices=("gnb", "dist"), required=True)
    p.add_argument("--pi", default="0.5", help="bargaining strength of company 1")
    p.add_argument("--alpha", default="2", help="norm exponent, or 'inf'")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_bargain)

    p = sub.add_parser("oracle", help="exhaustively enumerate the exact frontier")
    p.add_argument("--instance", required=True)
    p.add_argument("--budget", type=int, default=_oracle.OracleBudget().max_candidates)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("report", help="aggregate a batch of frontier runs")
    p.add_argument("--batch", required=True, help="directory of frontier artifacts")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("export-lp", help="write the model in LP format")
    p.add_argument("--instance", required=True)
    p.add_argument("--objective", type=int, choices=(1, 2), required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--run", action="store_true",
                   help=f"also run the solver named by ${SOLVER_ENV} and "
                        "validate its solution")
    p.set_defaults(func=_cmd_export_lp)

    p = sub.add_parser("import-solution",
                       help="validate an external solver's solution listing")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.set_defaults(func=_cmd_import_solution)

    p = sub.add_parser("validate", help="check a schedule JSON against an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--schedule", required=True)
    p.set_defaults(func=_cmd_validate)

    return parser


def run_cli(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:   # argparse already printed usage or help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except EvshareError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: missing artifact: {exc.filename or exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
