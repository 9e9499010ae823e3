"""Select a few end-to-end paths per source-destination pair so an even
traffic split balances link load about as well as ECMP."""
from .flowsim import (EcmpPolicy, FlowEvent, PlanPolicy, SimTrace, generate_flows, measurement_window,
                      simulate)
from .kpaths import Path, ShortestPathTree, enumerate_paths, shortest_tree, sidetrack_cost
from .loadmodel import LoadLedger, LoadReport, ecmp_loads, plan_loads, report
from .placement import (CostFunction, MultipathPlan, finetune, oracle_best_plan, parse_theta,
                        path_cost, plan_adaptive_k, plan_fixed_k)
from .topology import (Link, Topology, load_topology, make_irregular, make_xgft,
                       read_topology, save_topology, write_topology)
from .traffic import (TrafficMatrix, perturb_matrix, random_matrix, skewed_matrix,
                      uniform_matrix)

__version__ = "0.1.0"
