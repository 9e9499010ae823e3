"""Flow-level simulation: max link load over time under the plan and under ECMP."""
import argparse

from common import add_instance_args, instance
from fewpaths import EcmpPolicy, PlanPolicy, generate_flows, measurement_window, plan_fixed_k, simulate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    add_instance_args(ap)
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--theta", type=float, default=0.0)
    ap.add_argument("--horizon", type=float, default=100.0)
    ap.add_argument("--flow-rate", type=float, default=None)
    args = ap.parse_args()
    topo, m = instance(args)
    plan = plan_fixed_k(topo, m, args.k, args.theta, seed=args.seed)
    flows = generate_flows(m, flow_rate=args.flow_rate, horizon=args.horizon, seed=args.seed)
    window = measurement_window(args.horizon)
    print("policy,time,max_link_load")
    for label, policy in (("plan", PlanPolicy(plan)), ("ecmp", EcmpPolicy(topo))):
        trace = simulate(topo, policy, flows, args.seed)
        for t, v in zip(trace.times, trace.max_load):
            print(f"{label},{t:.6g},{v:.6g}")
        print(f"# {label} window_avg_max {trace.window_average_max(*window):.6g} ({len(flows)} flows)")


if __name__ == "__main__":
    main()
