"""Exact network cost-sharing games: protocols, equilibria and price of anarchy."""

from .costs import CostTable, GameInstance, Player, classify, perturb_for_ties, strictify_concave
from .equilibrium import (best_response_dynamics, brute_force_optimum, enumerate_pne, is_nash,
                          poa_report)
from .graph import Graph, assign_weights, enumerate_paths, topo_sort
from .protocols import make_protocol
from .rat import INF
from .routing import load_vector, opt_path_table, profile_cost

__version__ = "0.1.0"
