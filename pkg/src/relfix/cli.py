"""Command-line front end.

Exit codes: 0 when the reported verdict holds, 1 when a check fails,
a hypothesis is violated or oracle and solver disagree, 2 for invalid
input, unreadable files and usage errors.
"""

import argparse
import csv
import json
import sys
from dataclasses import fields

from . import jsonio
from .chains import find_monotonic_chain
from .contraction import HypothesisReport, check_local_radial_contraction
from .errors import RelfixError
from .oracle import DROPS, GeneratorParams, brute_force_check, counterexample_mine, random_instance
from .paths import build_orbit_instance, check_path_contraction, paths_from_json, orbit_tail_bound
from .picard import RealInstance, check_hypotheses, solve_real, solve_t3, solve_t5
from .space import (
    TAU_ABS,
    instance_from_json,
    instance_to_json,
    validate_metric,
    validate_relation,
)

OK, FAILED, INVALID = 0, 1, 2
NAMES = {3: "existence", 5: "uniqueness"}


class InputError(Exception):
    pass


def num(x):
    return "None" if x is None else jsonio.fmt_float(float(x))


def _read_json(path):
    try:
        return jsonio.load(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def _load_any(path):
    obj = _read_json(path)
    if isinstance(obj, dict) and obj.get("backend") == "real":
        return RealInstance.from_json(obj)
    return instance_from_json(obj)


def _load_valid(path):
    inst = _load_any(path)
    if isinstance(inst, RealInstance):
        return inst
    metric = validate_metric(inst.space)
    relation = validate_relation(inst.relation, limit=1)
    if not metric.ok:
        axiom, idx = metric.violations[0]
        raise InputError(f"{path}: metric violates {axiom} at {list(idx)}")
    if not relation.ok:
        raise InputError(f"{path}: relation is not transitive at {list(relation.violations[0])}")
    return inst


def _emit(args, payload, summary):
    target = getattr(args, "json", None)
    text = jsonio.dumps(payload)
    if target == "-":
        sys.stdout.write(text)
        return
    if target:
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(text)
    for line in summary:
        print(line)


def _report_lines(report):
    lines = []
    for key, c in report.conditions.items():
        extra = f"  witness {list(c.witness)}" if c.witness is not None else ""
        lines.append(f"  ({key}) {'holds' if c.verdict else 'FAILS'}{extra}")
    lines.append(f"  overall: {'all hypotheses hold' if report.overall else 'certificate invalid'}")
    return lines


# --- subcommands ------------------------------------------------------------------

def cmd_validate(args):
    inst = _load_any(args.instance)
    if isinstance(inst, RealInstance):
        _emit(args, {"valid": True, "backend": "real"}, ["real-backend instance parsed"])
        return OK
    metric = validate_metric(inst.space)
    relation = validate_relation(inst.relation)
    payload = {
        "valid": metric.ok and relation.ok,
        "metric": {"ok": metric.ok,
                   "violations": [{"axiom": a, "indices": list(i)} for a, i in metric.violations]},
        "relation": {"ok": relation.ok, "violations": [list(t) for t in relation.violations],
                     "reflexive": relation.reflexive, "antisymmetric": relation.antisymmetric},
        "points": inst.n,
    }
    lines = [f"{inst.n} points"]
    if metric.ok:
        lines.append("metric: ok")
    for axiom, idx in metric.violations:
        lines.append(f"metric: {axiom} violated at {list(idx)}")
    if relation.ok:
        kind = "partial order" if relation.reflexive and relation.antisymmetric else "not a partial order"
        lines.append(f"relation: transitive ({kind})")
    for t in relation.violations[:20]:
        lines.append(f"relation: transitivity violated at {list(t)}")
    _emit(args, payload, lines)
    return OK if payload["valid"] else FAILED


def cmd_chain(args):
    inst = _load_valid(args.instance)
    chain = find_monotonic_chain(inst, args.from_, args.to, args.epsilon)
    eps = inst.epsilon if args.epsilon is None else args.epsilon
    if chain is None:
        _emit(args, {"found": False, "from": args.from_, "to": args.to, "epsilon": eps},
              [f"no {num(eps)}-monotonic chain joins {args.from_} and {args.to}"])
        return FAILED
    steps = ", ".join(num(s) for s in chain.step_dists)
    _emit(args, {"found": True, "chain": chain.to_json()},
          [f"{chain.direction} chain {list(chain.vertices)} (m={chain.m})", f"steps: {steps}"])
    return OK


def cmd_check(args):
    inst = _load_valid(args.instance)
    if isinstance(inst, RealInstance):
        if inst.box is None or inst.k is None:
            raise InputError("real-backend check needs 'box' and 'k' in the instance")
        radius = inst.epsilon if inst.epsilon is not None else float("inf")
        d = check_local_radial_contraction(inst.map, inst.box, radius, inst.k,
                                           args.samples, args.seed, inst.norm)
        report = HypothesisReport(3, {"d": d})
    else:
        report = check_hypotheses(inst, args.theorem)
    _emit(args, report.to_json(), [f"{NAMES[report.theorem]} hypotheses:"] + _report_lines(report))
    return OK if report.overall else FAILED


def _write_trace(path, trace):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "point", "step_dist", "step_bound", "tail_bound"])
        for n, point, step, sb, tb in trace.csv_rows():
            if isinstance(point, tuple):
                point = " ".join(num(v) for v in point)
            w.writerow([n, point] + ["" if v is None else num(v) for v in (step, sb, tb)])


def cmd_solve(args):
    inst = _load_valid(args.instance)
    if isinstance(inst, RealInstance):
        from .picard import StopRule

        result = solve_real(inst, StopRule(args.atol, args.n_max), seed=args.seed)
        if args.trace:
            _write_trace(args.trace, result.trace)
        ok = result.reached and result.residual <= args.atol and (
            result.certificate is None or result.certificate.overall)
        lines = [f"status: {result.trace.status.value} after {result.iterations} iterations",
                 f"x* = ({', '.join(num(v) for v in result.trace.iterates[-1])})",
                 f"residual: {num(result.residual)}"]
        _emit(args, result.to_json(), lines)
        return OK if ok else FAILED

    if args.theorem == 5:
        res = solve_t5(inst, raise_on_e=False)
        if args.trace:
            _write_trace(args.trace, res.t3.trace)
        ok = res.unique and res.certificate.overall and all(p.ok for p in res.propagation)
        lines = [f"unique fixed point: {res.common_limit}" if res.unique
                 else f"no common limit; disagreement {list(res.disagreement)}"]
        lines += ["uniqueness hypotheses:"] + _report_lines(res.certificate)
        _emit(args, res.to_json(), lines)
        return OK if ok else FAILED

    res = solve_t3(inst)
    if args.trace:
        _write_trace(args.trace, res.trace)
    if res.reached:
        lines = [f"x* = point {res.xstar} after {res.iterations} iterations",
                 f"residual: {num(res.residual)}"]
    else:
        lines = [f"no fixed point reached: {res.trace.status.value}"
                 + (f" (period {res.trace.period})" if res.trace.period else "")]
    if res.chain is not None:
        lines.append(f"chain m={res.chain.m}: {list(res.chain.vertices)}; n0={res.trace.n0}")
    lines += ["existence hypotheses:"] + _report_lines(res.certificate)
    _emit(args, res.to_json(), lines)
    return OK if res.reached and res.certificate.overall else FAILED


def cmd_paths_contraction(args):
    cfg = paths_from_json(_read_json(args.paths))
    res = check_path_contraction(cfg["map"], cfg["gamma0"], cfg["k"], cfg["refinement"])
    d = res.details
    lines = [f"l(gamma) = {num(d['length'])}, l(f(gamma)) = {num(d['image_length'])}, "
             f"k l(gamma) = {num(d['k_length'])}",
             f"endpoint distance = {num(d['endpoint_distance'])}",
             "both inequalities hold" if res.verdict else "inequality violated"]
    _emit(args, res.to_json(), lines)
    return OK if res.verdict else FAILED


def cmd_paths_orbit(args):
    cfg = paths_from_json(_read_json(args.paths))
    if cfg["epsilon"] is None:
        raise InputError("paths file needs 'epsilon' for the orbit instance")
    bundle = build_orbit_instance(cfg["gamma0"], cfg["map"], cfg["N"], cfg["epsilon"],
                                  cfg["k"], cfg["refinement"])
    inst_json = instance_to_json(bundle.instance)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(jsonio.dumps(inst_json))
    excess = bundle.ambient_dists - bundle.d0_dists
    dominated = bool((excess <= TAU_ABS).all())
    l0 = bundle.lengths[0]
    worst_tail = max(
        (bundle.ambient_dists[n, m] - orbit_tail_bound(l0, cfg["k"], n)
         for n in range(len(bundle.points)) for m in range(n + 1, len(bundle.points))),
        default=float("-inf"),
    )
    payload = {"instance": inst_json, "n_effective": bundle.n_effective,
               "lengths": list(bundle.lengths), "ambient_le_d0": dominated,
               "tail_bound_ok": bool(worst_tail < 0)}
    lines = [f"orbit points: {bundle.n_effective + 1}", f"l(gamma0) = {num(l0)}",
             f"ambient d <= d0: {dominated}", f"tail bound dominates: {worst_tail < 0}"]
    if args.output:
        lines.append(f"instance written to {args.output}")
    _emit(args, payload, lines)
    return OK if dominated else FAILED


def cmd_oracle_verify(args):
    inst = _load_valid(args.instance)
    verdict = brute_force_check(inst)
    lines = [f"fixed points: {sorted(verdict.fixed_points)}",
             "solver agrees with brute force" if verdict.agrees_with_solver
             else f"DISAGREEMENT: {verdict.mismatches}",
             "conclusions hold wherever the hypotheses do" if verdict.theorem_holds
             else "CONCLUSION VIOLATED UNDER VALID HYPOTHESES"]
    _emit(args, verdict.to_json(), lines)
    return OK if verdict.agrees_with_solver and verdict.theorem_holds else FAILED


PARAM_TYPES = {f.name: f.type for f in fields(GeneratorParams)}


def _parse_params(items, seed):
    values = {"seed": seed}
    for item in items or []:
        if "=" not in item:
            raise InputError(f"--params expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        key = key.replace("-", "_")
        if key not in PARAM_TYPES or key == "seed":
            raise InputError(f"unknown generator parameter {key!r}")
        kind = PARAM_TYPES[key]
        if kind in (int, "int"):
            values[key] = int(raw)
        elif kind in (float, "float"):
            values[key] = float(raw)
        elif kind in (bool, "bool"):
            values[key] = raw.lower() in ("1", "true", "yes")
        else:
            values[key] = raw
    try:
        return GeneratorParams(**values)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_oracle_mine(args):
    params = _parse_params(args.params, args.seed)
    report = counterexample_mine(params, args.drop, args.budget, args.workers)
    if report.found:
        lines = [f"counterexample at seed {report.seed} ({report.witness['kind']})"]
    else:
        lines = [f"exhausted {report.budget} seeds without a counterexample"]
    _emit(args, report.to_json(), lines)
    expected = not report.found if args.drop == "none" else report.found
    return OK if expected else FAILED


def cmd_gen(args):
    try:
        params = GeneratorParams(seed=args.seed, n=args.n, relation_density=args.density,
                                 target_k=args.k, metric_mode=args.metric_mode,
                                 map_mode=args.map_mode, relation_mode=args.relation_mode,
                                 epsilon_mode=args.epsilon_mode)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    inst_json = instance_to_json(random_instance(params))
    text = jsonio.dumps(inst_json)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"instance with {args.n} points written to {args.output}")
    else:
        sys.stdout.write(text)
    return OK


# --- parser -------------------------------------------------------------------------

def _json_flag(p):
    p.add_argument("--json", nargs="?", const="-", metavar="PATH",
                   help="write the JSON report to PATH (stdout when PATH is omitted)")


def build_parser():
    parser = argparse.ArgumentParser(prog="relfix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check metric axioms and transitivity")
    p.add_argument("instance")
    _json_flag(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("chain", help="find an epsilon-monotonic chain")
    p.add_argument("instance")
    p.add_argument("--from", dest="from_", type=int, required=True)
    p.add_argument("--to", type=int, required=True)
    p.add_argument("--epsilon", type=float)
    _json_flag(p)
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("check", help="report existence (3) or uniqueness (5) hypotheses")
    p.add_argument("instance")
    p.add_argument("--theorem", type=int, choices=(3, 5), default=3)
    p.add_argument("--samples", type=int, default=1000, help="real backend only")
    p.add_argument("--seed", type=int, default=0, help="real backend sampling seed")
    _json_flag(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", help="certified Picard iteration")
    p.add_argument("instance")
    p.add_argument("--theorem", type=int, choices=(3, 5), default=3)
    p.add_argument("--trace", metavar="CSV")
    p.add_argument("--atol", type=float, default=1e-12, help="real backend stop tolerance")
    p.add_argument("--n-max", type=int, default=10**6, help="real backend iteration cap")
    p.add_argument("--seed", type=int, default=0, help="real backend sampling seed")
    _json_flag(p)
    p.set_defaults(func=cmd_solve)

    paths = sub.add_parser("paths", help="path-length and orbit-metric tools")
    psub = paths.add_subparsers(dest="paths_command", required=True)
    p = psub.add_parser("contraction", aliases=["prop6"],
                         help="check that f shortens the path and its endpoint gap")
    p.add_argument("paths")
    _json_flag(p)
    p.set_defaults(func=cmd_paths_contraction)
    p = psub.add_parser("orbit", help="build the ordered orbit instance")
    p.add_argument("paths")
    p.add_argument("-o", "--output")
    _json_flag(p)
    p.set_defaults(func=cmd_paths_orbit)

    oracle = sub.add_parser("oracle", help="brute-force verification and mining")
    osub = oracle.add_subparsers(dest="oracle_command", required=True)
    p = osub.add_parser("verify", help="compare solver with brute force")
    p.add_argument("instance")
    _json_flag(p)
    p.set_defaults(func=cmd_oracle_verify)
    p = osub.add_parser("mine", help="search for counterexamples with a hypothesis dropped")
    p.add_argument("--drop", choices=DROPS, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--params", nargs="*", metavar="KEY=VALUE")
    _json_flag(p)
    p.set_defaults(func=cmd_oracle_mine)

    p = sub.add_parser("gen", help="generate a seeded random instance")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--k", type=float, default=0.5)
    p.add_argument("--metric-mode", default="embedding-1d")
    p.add_argument("--map-mode", default="monotone-random")
    p.add_argument("--relation-mode", default="index")
    p.add_argument("--epsilon-mode", default="anchor")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)
    return parser


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else INVALID
    try:
        return args.func(args)
    except (InputError, RelfixError, ValueError) as exc:
        print(f"relfix: error: {exc}", file=sys.stderr)
        return INVALID
    except OSError as exc:
        print(f"relfix: error: {exc}", file=sys.stderr)
        return INVALID


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
