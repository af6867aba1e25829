"""Spacing statistics of Farey fractions cut out by congruence conditions,
the lifted BCZ section that predicts them, and Erdős–Szüsz–Turán measures
for the same subsets."""

from .farey import (
    DomainError,
    FareyPairState,
    bcz,
    bcz_exact,
    farey_next,
    farey_size,
    farey_start,
    iter_farey,
    totients,
)
from .congruence import (
    ClosureError,
    CosetSubset,
    ModMatrix,
    ResiduePairSet,
    SubsetError,
    check_closure,
    coset_count,
    from_residue_pairs,
    index_gamma,
    mat_mul,
    membership,
    parse_subset,
)

__version__ = "0.1.0"
