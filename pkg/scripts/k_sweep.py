"""Max utilization as a function of k, one column per seed."""
import argparse

from common import add_instance_args, instance
from fewpaths import plan_fixed_k


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    add_instance_args(ap)
    ap.add_argument("--k-values", default="1,2,3,4,6,8")
    ap.add_argument("--theta", type=float, default=0.25)
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args()
    ks = [int(x) for x in args.k_values.split(",")]
    rows = {k: [] for k in ks}
    for seed in range(args.seed, args.seed + args.seeds):
        args.seed = seed
        topo, m = instance(args)
        for k in ks:
            rows[k].append(plan_fixed_k(topo, m, k, args.theta, seed=seed).max_utilization())
    print("k," + ",".join(f"seed{s}" for s in range(args.seed - args.seeds + 1, args.seed + 1)))
    for k in ks:
        print(f"{k}," + ",".join(f"{v:.6g}" for v in rows[k]))


if __name__ == "__main__":
    main()
