"""Cellular homology of moduli spaces of surfaces from parallel slit cells."""
from .cells import Cell, CellSet, ModuliIndex, load_or_enumerate
from .homology import HomologyTable, Ring, homology_groups
from .perm import Tableau, TableauPermutation

__version__ = "0.1.0"

__all__ = [
    "Cell",
    "CellSet",
    "HomologyTable",
    "ModuliIndex",
    "Ring",
    "Tableau",
    "TableauPermutation",
    "homology_groups",
    "load_or_enumerate",
]
