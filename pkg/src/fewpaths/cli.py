"""Command-line front end.  Exit codes: 0 ok, 1 usage error, 2 data error."""
from __future__ import annotations

import argparse
import logging
import os
import sys

from . import experiment, flowsim, loadmodel, placement, topology, traffic
from .kpaths import PathError, enumerate_paths

log = logging.getLogger("fewpaths")

DATA_ERRORS = (topology.TopologyError, traffic.TrafficError, PathError, placement.PlanError,
               flowsim.SimError, experiment.ConfigError, OSError, KeyError, ValueError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _emit(text: str, out: str | None, out_dir: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    if out_dir and not os.path.isabs(out):
        os.makedirs(out_dir, exist_ok=True)
        out = os.path.join(out_dir, out)
    with open(out, "w") as fh:
        fh.write(text)
    log.info("wrote %s", out)


def _topo(args):
    return topology.read_topology(args.topo)


def _tm(args, topo):
    with open(args.tm) as fh:
        return traffic.load_matrix(fh.read(), topo)


def cmd_gen_topo(args):
    if args.kind == "xgft":
        if not (args.children and args.parents):
            raise UsageError("xgft needs --children and --parents")
        topo = topology.make_xgft(args.levels, args.children, args.parents)
    else:
        topo = topology.make_irregular(args.nodes, args.degree, args.seed)
    _emit(topology.save_topology(topo), args.output, args.out_dir)


def cmd_gen_traffic(args):
    topo = _topo(args)
    if args.kind == "uniform":
        m = traffic.uniform_matrix(topo)
    elif args.kind == "random":
        m = traffic.random_matrix(topo, args.seed)
    else:
        m = traffic.skewed_matrix(topo, args.hot_fraction, args.hot_share, args.seed)
    _emit(traffic.save_matrix(m, topo), args.output, args.out_dir)


def cmd_perturb(args):
    with open(args.input) as fh:
        text = fh.read()
    if args.topo:
        topo = _topo(args)
        m = traffic.load_matrix(text, topo)
    else:
        # without a topology the node names themselves serve as keys
        names = sorted({n for row in text.splitlines()[1:] if row.strip() for n in row.split(",")[:2]})
        topo = topology.Topology(tuple(names), (), tuple(range(len(names))))
        m = traffic.load_matrix(text, topo)
    m = traffic.perturb_matrix(m, args.lo, args.hi, args.seed)
    _emit(traffic.save_matrix(m, topo), args.output, args.out_dir)


def cmd_paths(args):
    topo = _topo(args)
    theta = placement.parse_theta(args.theta)
    paths = enumerate_paths(topo, topo.index(args.src), topo.index(args.dst), theta, args.max)
    _emit("".join(f"{p.label(topo)} {p.length!r}\n" for p in paths), args.output, args.out_dir)


def _planner_spec(args, k=None):
    return {
        "k": k if k is not None else getattr(args, "k", 1),
        "theta": args.theta,
        "cost": args.cost,
        "exponent": args.exponent,
        "adaptive": args.adaptive_k,
        "strict": args.strict,
        "finetune": args.finetune,
        "max_rounds": args.max_rounds,
        "seed": args.seed,
    }


def cmd_plan(args):
    topo = _topo(args)
    m = _tm(args, topo)
    plan = experiment.make_plan(topo, m, _planner_spec(args))
    log.info("max utilization %.6g", plan.max_utilization())
    _emit(plan.to_json(topo), args.output, args.out_dir)


def _write_report(rep, args):
    _emit(rep.to_csv(), args.output, args.out_dir)
    if args.output:
        stem, _ = os.path.splitext(args.output)
        _emit(rep.to_curve(), stem + ".curve.dat", args.out_dir)
    log.info("max utilization %.6g", rep.max_utilization)


def cmd_ecmp(args):
    topo = _topo(args)
    _write_report(loadmodel.report(loadmodel.ecmp_loads(topo, _tm(args, topo))), args)


def cmd_evaluate(args):
    topo = _topo(args)
    m = _tm(args, topo)
    with open(args.plan) as fh:
        plan = placement.MultipathPlan.from_json(fh.read(), topo)
    _write_report(loadmodel.report(loadmodel.plan_loads(topo, m, plan)), args)


def cmd_sweep_k(args):
    topo = _topo(args)
    m = _tm(args, topo)
    _emit(experiment.sweep_k(topo, m, args.k_values, _planner_spec(args)), args.output, args.out_dir)


def cmd_simulate(args):
    topo = _topo(args)
    m = _tm(args, topo)
    if args.plan:
        with open(args.plan) as fh:
            policy = flowsim.PlanPolicy(placement.MultipathPlan.from_json(fh.read(), topo))
    elif args.policy == "ecmp":
        policy = flowsim.EcmpPolicy(topo)
    else:
        raise UsageError("simulate needs --plan or --policy ecmp")
    flows = flowsim.generate_flows(m, args.mean_holding, args.flow_rate, args.horizon, args.seed)
    trace = flowsim.simulate(topo, policy, flows, args.seed)
    avg = trace.window_average_max(*flowsim.measurement_window(args.horizon))
    _emit(trace.to_csv() + f"# window_avg_max {avg!r}\n", args.output, args.out_dir)
    log.info("%d flows, window-averaged max link load %.6g", len(flows), avg)


def cmd_experiment(args):
    cfg = experiment.ExperimentConfig.load(args.config)
    written = experiment.run_experiment(cfg, args.out_dir)
    for kind, path in written.items():
        log.info("%s: %s", kind, path)


def build_parser() -> argparse.ArgumentParser:
    def globals_(default):
        # subcommands use SUPPRESS so they do not clobber values given before the subcommand
        g = _Parser(add_help=False)
        g.add_argument("--seed", type=int, default=default(0))
        g.add_argument("--out-dir", default=default(None))
        g.add_argument("--quiet", action="store_true", default=default(False))
        return g

    common = globals_(lambda _: argparse.SUPPRESS)
    parser = _Parser(prog="fewpaths", description="Few-path multipath planning and evaluation.",
                     parents=[globals_(lambda v: v)])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_, out=True):
        p = sub.add_parser(name, help=help_, parents=[common])
        p.set_defaults(func=func)
        if out:
            p.add_argument("-o", "--output", default=None)
        return p

    def planner_opts(p):
        p.add_argument("--theta", default="0.25", help="stretch bound, e.g. 0, 0.25, 25%%, inf")
        p.add_argument("--cost", choices=["max", "sum", "convex"], default="max")
        p.add_argument("--exponent", type=float, default=2.0)
        p.add_argument("--adaptive-k", action="store_true")
        p.add_argument("--strict", action="store_true", help="adaptive-k keeps a path only on strict improvement")
        p.add_argument("--finetune", action="store_true")
        p.add_argument("--max-rounds", type=int, default=100)

    p = add("gen-topo", cmd_gen_topo, "generate a topology file")
    p.add_argument("--kind", choices=["xgft", "irregular"], required=True)
    p.add_argument("--levels", type=int, default=2)
    p.add_argument("--children", type=_ints)
    p.add_argument("--parents", type=_ints)
    p.add_argument("--nodes", type=int, default=25)
    p.add_argument("--degree", type=float, default=3.5)

    p = add("gen-traffic", cmd_gen_traffic, "generate a traffic matrix CSV")
    p.add_argument("--kind", choices=["uniform", "random", "skewed"], required=True)
    p.add_argument("--topo", required=True)
    p.add_argument("--hot-fraction", type=float, default=0.2)
    p.add_argument("--hot-share", type=float, default=0.8)

    p = add("perturb", cmd_perturb, "scale each demand by U(lo, hi)")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--topo")
    p.add_argument("--lo", type=float, default=0.5)
    p.add_argument("--hi", type=float, default=1.5)

    p = add("paths", cmd_paths, "list candidate paths between two nodes")
    p.add_argument("--topo", required=True)
    p.add_argument("--src", required=True)
    p.add_argument("--dst", required=True)
    p.add_argument("--theta", default="0.25")
    p.add_argument("--max", type=int, default=50)

    p = add("plan", cmd_plan, "select paths for every flow")
    p.add_argument("--topo", required=True)
    p.add_argument("--tm", required=True)
    p.add_argument("--k", type=int, default=4)
    planner_opts(p)

    p = add("ecmp", cmd_ecmp, "fluid ECMP link loads")
    p.add_argument("--topo", required=True)
    p.add_argument("--tm", required=True)

    p = add("evaluate", cmd_evaluate, "link loads of a saved plan")
    p.add_argument("--topo", required=True)
    p.add_argument("--tm", required=True)
    p.add_argument("--plan", required=True)

    p = add("sweep-k", cmd_sweep_k, "max utilization for several k")
    p.add_argument("--topo", required=True)
    p.add_argument("--tm", required=True)
    p.add_argument("--k-values", type=_ints, default=[1, 2, 3, 4, 6, 8])
    planner_opts(p)

    p = add("simulate", cmd_simulate, "flow-level simulation")
    p.add_argument("--topo", required=True)
    p.add_argument("--tm", required=True)
    p.add_argument("--plan")
    p.add_argument("--policy", choices=["ecmp"])
    p.add_argument("--mean-holding", type=float, default=10.0)
    p.add_argument("--flow-rate", type=float, default=None)
    p.add_argument("--horizon", type=float, default=100.0)

    p = add("experiment", cmd_experiment, "run a JSON-configured scenario end to end", out=False)
    p.add_argument("config")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"fewpaths: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"fewpaths: error: {exc}", file=sys.stderr)
        return 1
    except DATA_ERRORS as exc:
        print(f"fewpaths: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
