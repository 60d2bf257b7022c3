"""A-infinity categories: storage, relation and functor checkers,
cohomology categories, homotopy transfer, Hochschild cochains, Massey
products.  Sign conventions are fixed once, in the relation checker."""

from .category import AInftyCategory
from .relations import ResidualReport, check_ainfty_relations, check_units

__all__ = [
    "AInftyCategory",
    "ResidualReport",
    "check_ainfty_relations",
    "check_units",
]
