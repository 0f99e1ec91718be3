"""Dyadic CART and optimal regression trees (ORT) on d-dimensional lattices."""
from .lattice import (ARBITRARY, HIER, RDP, LatticeArray, Partition, Rect, dyadic_split,
                      hierarchical_split, is_hierarchical, is_rdp)
from .oracle import ALL, enumerate_partitions, exact_penalized_lse, min_pieces
from .polyfit import FitResult, PolyBasis, basis_value, fit_rect, project_partition
from .refine import refine_1d_to_rdp, refine_2d_to_rdp, sparse_to_hierarchical
from .simlab import MseTable, Scenario, run_scenario
from .solver import build_tables, reconstruct, solve
from .variation import (gns_check, higher_order_variation, mean_bound_1d,
                        piecewise_poly_approx, poly_approx_1d, tv, tv_delta_scheme)

__version__ = "0.1.0"
