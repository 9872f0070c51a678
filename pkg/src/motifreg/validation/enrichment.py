"""Gene-list enrichment and component-alignment tests."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import gammaln, logsumexp


@dataclass(frozen=True)
class EnrichmentTable:
    n_total: int  # genes in the study
    n_list: int  # genes on the positive list
    tau: int  # genes carrying the element
    overlap: int  # carriers on the list

    def __post_init__(self):
        if not 0 <= self.tau <= self.n_total or not 0 <= self.n_list <= self.n_total:
            raise ValueError(f"inconsistent table {self}")
        if not 0 <= self.overlap <= min(self.n_list, self.tau):
            raise ValueError(f"overlap out of range in {self}")
        if self.tau - self.overlap > self.n_total - self.n_list:
            raise ValueError(f"impossible table {self}")

    @classmethod
    def from_sets(cls, carriers, positives, n_total: int) -> "EnrichmentTable":
        carriers, positives = set(carriers), set(positives)
        return cls(n_total, len(positives), len(carriers), len(carriers & positives))


def _log_choose(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def fisher_enrichment(t: EnrichmentTable) -> float:
    """One-sided Fisher exact p: P(overlap >= observed) under the hypergeometric."""
    n, m, k = t.n_total, t.n_list, t.tau
    if t.overlap == 0:
        return 1.0
    x = np.arange(t.overlap, min(m, k) + 1)
    logp = _log_choose(m, x) + _log_choose(n - m, k - x) - _log_choose(n, k)
    return float(min(1.0, math.exp(logsumexp(logp))))


def rank_sum_test(carrier_scores, other_scores) -> float:
    """Two-sided Wilcoxon rank-sum p-value, normal approximation, tie-corrected.

    No continuity correction.  Returns 1 when every score is tied.
    """
    a = np.asarray(carrier_scores, dtype=np.float64)
    b = np.asarray(other_scores, dtype=np.float64)
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise ValueError("both groups must be nonempty")
    ranks = stats.rankdata(np.concatenate([a, b]))
    u = ranks[:n1].sum() - n1 * (n1 + 1) / 2.0
    n = n1 + n2
    _, tie_counts = np.unique(ranks, return_counts=True)
    tie_term = float(np.sum(tie_counts**3 - tie_counts)) / (n * (n - 1))
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term)
    if var <= 0:
        return 1.0
    z = (u - n1 * n2 / 2.0) / math.sqrt(var)
    return float(min(1.0, 2.0 * stats.norm.sf(abs(z))))


STRONG_EFFECT_P = 1e-3


def component_alignment(feature, scores) -> float:
    """Rank-sum p comparing scores of carriers (feature > 0) against the rest."""
    feature = np.asarray(feature)
    scores = np.asarray(scores, dtype=np.float64)
    carriers = feature > 0
    return rank_sum_test(scores[carriers], scores[~carriers])
