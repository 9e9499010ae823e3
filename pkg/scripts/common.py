"""Instance selection shared by the experiment scripts."""
from fewpaths import (make_irregular, make_xgft, random_matrix, read_topology, skewed_matrix,
                      uniform_matrix)

TOPOLOGIES = {
    "xgft": lambda seed: make_xgft(2, [5, 10], [5, 5]),
    "xgft-small": lambda seed: make_xgft(2, [3, 6], [3, 3]),
    "irregular": lambda seed: make_irregular(25, 3.5, seed),
}


def add_instance_args(ap):
    ap.add_argument("--topo", default="xgft",
                    help=f"one of {', '.join(TOPOLOGIES)} or a topology file")
    ap.add_argument("--traffic", choices=["uniform", "random", "skewed"], default="random")
    ap.add_argument("--seed", type=int, default=0)


def instance(args):
    make = TOPOLOGIES.get(args.topo)
    topo = make(args.seed) if make else read_topology(args.topo)
    if args.traffic == "uniform":
        m = uniform_matrix(topo)
    elif args.traffic == "random":
        m = random_matrix(topo, args.seed)
    else:
        m = skewed_matrix(topo, seed=args.seed)
    return topo, m
