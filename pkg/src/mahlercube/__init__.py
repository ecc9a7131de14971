"""Polar duality, flag volumes and contact pairs for the Mahler volume product
near the cube, in exact rational or float arithmetic."""

__version__ = "0.1.0"

from .geometry import (HPolytope, LinearMap, VPolytope, contains, convex_hull, cube,
                       cross_polytope, max_scaled_cube, maximize_linear, polar, polar_h,
                       vertices_from_halfspaces, halfspaces_from_vertices, volume,
                       volume_product)
from .flags import (AlphaWeights, Flag, FlagPoints, build_Q_pair, dual_center,
                    enumerate_faces, enumerate_flags, g_volume, lemma7_gap)
from .contact import (ContactPair, build_operator_A, canonicalize, contact_pair,
                      minimal_parallelepiped)
from .experiments import TrialConfig, run_trials

__all__ = [
    "AlphaWeights", "ContactPair", "Flag", "FlagPoints", "HPolytope", "LinearMap",
    "TrialConfig", "VPolytope", "build_Q_pair", "build_operator_A", "canonicalize",
    "contact_pair", "contains", "convex_hull", "cross_polytope", "cube", "dual_center",
    "enumerate_faces", "enumerate_flags", "g_volume", "halfspaces_from_vertices",
    "lemma7_gap", "max_scaled_cube", "maximize_linear", "minimal_parallelepiped", "polar",
    "polar_h", "run_trials", "vertices_from_halfspaces", "volume", "volume_product",
]
