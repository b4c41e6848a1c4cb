"""pglue: recollements of complexes of poset representations over GF(p),
with exact randomized verification of the gluing identities."""

__version__ = "0.1.0"

from .errors import InputError
from .poset import Poset, Stratification, build_poset, chains, sierpinski, validate_stratification
from .rep import Rep, RepMap, hom_space, projective, rep_cokernel, rep_kernel, skyscraper
from .complexes import (
    ChainMap,
    Cx,
    cone,
    cofibrant_replace,
    derived_hom_h0,
    fib,
    homology,
    random_complex,
    truncate_ge,
    truncate_lt,
)
from .recollement import CorruptionConfig, Cut, Recollement
from .gluing import GluedProvider, StandardProvider, arrow_in_E, arrow_in_M, ladder, orthogonality_check
from .intervals import IntervalDiagram, assoc_check, bc_check, iterated_glue
from .perversity import Perversity, is_perverse, perverted_provider

__all__ = [
    "InputError",
    "Poset", "Stratification", "build_poset", "chains", "sierpinski",
    "validate_stratification",
    "Rep", "RepMap", "hom_space", "projective", "rep_cokernel", "rep_kernel",
    "skyscraper",
    "ChainMap", "Cx", "cone", "cofibrant_replace", "derived_hom_h0", "fib",
    "homology", "random_complex", "truncate_ge", "truncate_lt",
    "CorruptionConfig", "Cut", "Recollement",
    "GluedProvider", "StandardProvider", "arrow_in_E", "arrow_in_M", "ladder",
    "orthogonality_check",
    "IntervalDiagram", "assoc_check", "bc_check", "iterated_glue",
    "Perversity", "is_perverse", "perverted_provider",
]
