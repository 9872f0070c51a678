"""Whole-pipeline permutation null: promoters re-assigned to genes at random."""

from __future__ import annotations

import logging

from motifreg.sequence import Promoter, PromoterSet
from motifreg.validation.rng import derive_seed, permutation

log = logging.getLogger(__name__)


def decouple(promoters: PromoterSet, seed: int) -> PromoterSet:
    """Gene ``g`` keeps its id but receives the promoter of gene ``pi[g]``."""
    pi = permutation(len(promoters), seed)
    return PromoterSet(Promoter(promoters[g].gene_id, promoters[pi[g]].bases) for g in range(len(pi)))


def permutation_study(run_fn, promoters: PromoterSet, n_permutations: int, master_seed: int):
    """Run ``run_fn(promoters)`` on the real pairing and on decoupled replicates.

    Returns ``[("real", result), ("perm01", result), ...]``; a replicate that
    raises is logged and recorded with ``None``.
    """
    if n_permutations < 1:
        raise ValueError("need at least one permutation")
    results = [("real", run_fn(promoters))]
    width = max(2, len(str(n_permutations)))
    for k in range(1, n_permutations + 1):
        label = f"perm{k:0{width}d}"
        seed = derive_seed(master_seed, label)
        try:
            results.append((label, run_fn(decouple(promoters, seed))))
        except Exception as exc:  # keep the study going
            log.error("replicate %s failed: %s", label, exc)
            results.append((label, None))
    return results
