from motifreg.validation.enrichment import (
    EnrichmentTable,
    component_alignment,
    fisher_enrichment,
    rank_sum_test,
)
from motifreg.validation.flank import (
    FlankAlignment,
    build_flank_alignment,
    flank_pvalue,
    flank_pvalue_chisq,
    flank_pvalue_lattice,
    information_content,
)
from motifreg.validation.permutation import decouple, permutation_study

__all__ = [
    "EnrichmentTable",
    "FlankAlignment",
    "build_flank_alignment",
    "component_alignment",
    "decouple",
    "fisher_enrichment",
    "flank_pvalue",
    "flank_pvalue_chisq",
    "flank_pvalue_lattice",
    "information_content",
    "permutation_study",
    "rank_sum_test",
]
