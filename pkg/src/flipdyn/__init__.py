"""Distributed flip dynamics for sampling proper k-colorings.

Simulation of the synchronous cluster-flip chain (directly and as a LOCAL
message-passing protocol), its path coupling, and exact small-instance
verification of the quantitative bounds used to analyse it.
"""

from flipdyn.graph import Graph, GraphError, build_graph, generate, read_edge_list, write_edge_list
from flipdyn.coloring import (
    AdjacentPair,
    Coloring,
    Configuration,
    ExtremalClass,
    available_colors,
    classify,
    configuration_at,
    gamma,
    hamming,
    is_proper,
    weighted_distance,
)
from flipdyn.clusters import (
    TOO_LARGE,
    Cluster,
    ClusterSet,
    cluster_at,
    cluster_distance,
    conflict,
    enumerate_clusters,
    overlap,
)
from flipdyn.schedules import FlipSchedule, cdmpp_schedule, check_aux, check_P1, check_P2, vigoda_schedule
from flipdyn.dynamics import (
    RoundParams,
    RoundTrace,
    distributed_round,
    glauber_step,
    run_chain,
    sequential_flip_step,
)
from flipdyn.exact import (
    BudgetError,
    StateSpace,
    TransitionMatrix,
    blocked_probabilities,
    enumerate_colorings,
    mixing_profile,
    stationary,
    transition_matrix,
    transition_row,
    tv_distance,
)
from flipdyn.phi import phi, phi_scan, phi_value
from flipdyn.coupling import (
    CoupledLaw,
    adjacent_contraction,
    adjacent_pairs,
    agreement_bound,
    coalescence_experiment,
    coupled_law,
    coupled_round,
    coupling_plan,
    dist2_disagreement_mass,
)
from flipdyn.local import ROUND_BUDGET, ProtocolRun, audit_protocol, run_local_round

__version__ = "0.1.0"

__all__ = [
    "adjacent_contraction",
    "adjacent_pairs",
    "AdjacentPair",
    "agreement_bound",
    "audit_protocol",
    "available_colors",
    "blocked_probabilities",
    "BudgetError",
    "build_graph",
    "cdmpp_schedule",
    "check_aux",
    "check_P1",
    "check_P2",
    "classify",
    "Cluster",
    "cluster_at",
    "cluster_distance",
    "ClusterSet",
    "coalescence_experiment",
    "Coloring",
    "Configuration",
    "configuration_at",
    "conflict",
    "coupled_law",
    "coupled_round",
    "CoupledLaw",
    "coupling_plan",
    "dist2_disagreement_mass",
    "distributed_round",
    "enumerate_clusters",
    "enumerate_colorings",
    "ExtremalClass",
    "FlipSchedule",
    "gamma",
    "generate",
    "glauber_step",
    "Graph",
    "GraphError",
    "hamming",
    "is_proper",
    "mixing_profile",
    "overlap",
    "phi",
    "phi_scan",
    "phi_value",
    "ProtocolRun",
    "read_edge_list",
    "ROUND_BUDGET",
    "RoundParams",
    "RoundTrace",
    "run_chain",
    "run_local_round",
    "sequential_flip_step",
    "StateSpace",
    "stationary",
    "TOO_LARGE",
    "transition_matrix",
    "transition_row",
    "TransitionMatrix",
    "tv_distance",
    "vigoda_schedule",
    "weighted_distance",
    "write_edge_list",
]
