"""Reticular Legendrian unfoldings: normal forms, jet-space checks, stratified fronts and atlases."""

from .bifurcate import BifurcationAtlas, TimeGrid, atlas, flag_singular
from .catalog import (
    GeneratingFamily,
    NormalFormLabel,
    all_entries,
    get_entry,
    instantiate,
    list_entries,
)
from .front import Stratum, brute_force_front, build_chart, full_front, sample_front, strata
from .jetalgebra import (
    CheckReport,
    is_K_determined,
    is_PR_versal,
    is_tPK_infinitesimally_stable,
)
from .polyring import Poly, VarSpace

__version__ = "0.1.0"

__all__ = [
    "BifurcationAtlas", "CheckReport", "GeneratingFamily", "NormalFormLabel", "Poly", "Stratum",
    "TimeGrid", "VarSpace", "all_entries", "atlas", "brute_force_front", "build_chart",
    "flag_singular", "full_front", "get_entry", "instantiate", "is_K_determined", "is_PR_versal",
    "is_tPK_infinitesimally_stable", "list_entries", "sample_front", "strata",
]
