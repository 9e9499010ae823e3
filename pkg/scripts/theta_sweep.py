"""Max utilization for several stretch bounds against the ECMP baseline."""
import argparse

from common import add_instance_args, instance
from fewpaths import ecmp_loads, parse_theta, plan_fixed_k


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    add_instance_args(ap)
    ap.add_argument("--thetas", default="0,0.1,0.25,0.5,1,inf")
    ap.add_argument("--k", type=int, default=4)
    args = ap.parse_args()
    topo, m = instance(args)
    print(f"# ecmp {ecmp_loads(topo, m).max_utilization():.6g}")
    print("theta,max_utilization")
    for text in args.thetas.split(","):
        theta = parse_theta(text)
        plan = plan_fixed_k(topo, m, args.k, theta, seed=args.seed)
        print(f"{text},{plan.max_utilization():.6g}")


if __name__ == "__main__":
    main()
