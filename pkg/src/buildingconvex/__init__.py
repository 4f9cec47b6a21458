"""Convex subsets of small euclidean buildings.

Affine Coxeter complexes, buildings glued from apartment charts, their
retractions and links, and checkers for local and global convexity.
"""
from .atlas import AtlasBuilding, BuildingPoint, Gluing, SectorGerm, validate_atlas
from .canned import a2_counterexample_building, tree_building, tripod_building
from .coxeter import Cell, CoxeterDatum, Wall
from .polytope import PolyhedralSet, Polytope
from .report import ConvexityReport

__version__ = "0.1.0"

__all__ = [
    "AtlasBuilding", "BuildingPoint", "Cell", "ConvexityReport", "CoxeterDatum", "Gluing",
    "PolyhedralSet", "Polytope", "SectorGerm", "Wall", "a2_counterexample_building",
    "tree_building", "tripod_building", "validate_atlas",
]
