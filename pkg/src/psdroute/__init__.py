"""Time-vs-cost skyline routes for a personal shopper.

Given a road network, stores with priced products, a shopper and a delivery
location and a shopping list, compute the routes on the lower convex chain
of (shopping time, shopping cost): exactly with :func:`solve_bsl`, or
heuristically with :func:`solve_apx` over a store quad-tree.
"""
from .apx import solve_apx
from .bsl import solve_bsl
from .catalog import Catalog, ShoppingList, Store, load_catalog
from .metrics import gap_report
from .network import RoadNetwork, load_network
from .quadtree import build_quadtree
from .routes import PsdQuery
from .skyline import CostVector, LinearSkyline

__all__ = ["Catalog", "CostVector", "LinearSkyline", "PsdQuery", "RoadNetwork", "ShoppingList",
           "Store", "build_quadtree", "gap_report", "load_catalog", "load_network",
           "solve_apx", "solve_bsl"]
__version__ = "0.1.0"
