"""Regression-based discovery of DNA motifs and distance-constrained motif
pairs from multivariate gene-expression data."""

from motifreg.elements import Composite, Simple, element_order, parse_element
from motifreg.sequence import (
    Promoter,
    PromoterSet,
    canonical_form,
    enumerate_words,
    reverse_complement,
)
from motifreg.scan import count_feature, locate_element, min_pair_distance

__version__ = "0.1.0"

__all__ = [
    "Composite",
    "Simple",
    "Promoter",
    "PromoterSet",
    "canonical_form",
    "count_feature",
    "element_order",
    "enumerate_words",
    "locate_element",
    "min_pair_distance",
    "parse_element",
    "reverse_complement",
]
