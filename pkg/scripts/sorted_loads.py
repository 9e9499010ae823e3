"""Sorted link-utilization curves for ECMP and a k-path plan on one topology.

    python scripts/sorted_loads.py --topo xgft --traffic random --k 4 --theta 0.25 > curves.csv
"""
import argparse

from common import add_instance_args, instance
from fewpaths import ecmp_loads, plan_fixed_k, plan_loads, report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    add_instance_args(ap)
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--theta", type=float, default=0.25)
    args = ap.parse_args()
    topo, m = instance(args)
    plan = plan_fixed_k(topo, m, args.k, args.theta, seed=args.seed)
    ecmp = report(ecmp_loads(topo, m)).sorted_utilizations
    ours = report(plan_loads(topo, m, plan)).sorted_utilizations
    print("rank,ecmp,plan")
    for i, (a, b) in enumerate(zip(ecmp, ours), 1):
        print(f"{i},{a:.6g},{b:.6g}")


if __name__ == "__main__":
    main()
