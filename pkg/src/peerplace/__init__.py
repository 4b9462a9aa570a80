"""Two-provider peering-point placement game: routing, costs, stability and dynamics."""

from .cost import GameParams, PeeringGame, cost_delta, total_cost, worst_case_congestion
from .dynamics import RunConfig, RunTrace, Schedule, epsilon, run, stationary_stats
from .routing import FlowSummary, PeeringSet, TrafficSpec, exit_assignment, per_node_flows, provider_flows
from .stability import enumerate_pairwise_stable, is_pairwise_stable, is_strongly_pairwise_stable
from .topology import Graph, all_pairs_distances, generate_ba, generate_regular, load_graph, save_graph

__version__ = "0.1.0"
