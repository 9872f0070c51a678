"""Greedy stepwise filtering of the exhaustive word list into a dictionary."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from motifreg._ordering import chunked_columns, tie_aware_order
from motifreg.regression import orthonormal_basis, project_out, slope_t_statistics, with_intercept
from motifreg.scan import SequenceIndex

log = logging.getLogger(__name__)

DEFAULT_LENGTHS = (5, 6, 7)


@dataclass
class Dictionary:
    words: list[str] = field(default_factory=list)
    # word -> [(component, round), ...]
    provenance: dict[str, list[tuple[int, int]]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.words)

    def rows(self):
        for w in self.words:
            for comp, rnd in self.provenance[w]:
                yield w, comp, rnd


def candidate_features(index: SequenceIndex, lengths=DEFAULT_LENGTHS) -> tuple[list[str], np.ndarray]:
    """Counts of every canonical word of the given lengths, genes x words."""
    words: list[str] = []
    blocks = []
    for length in sorted(set(lengths)):
        w, counts = index.word_count_matrix(length)
        words.extend(w)
        blocks.append(counts)
    return words, np.hstack(blocks).astype(np.float64)


def build_component_dictionary(
    scores: np.ndarray,
    words: list[str],
    features: np.ndarray,
    batch: int,
    n_jobs: int = 1,
) -> list[tuple[str, int]]:
    """Stepwise filter for one response vector.

    Round ``k`` residualises the response and every candidate on the words
    chosen so far (plus intercept), ranks candidates by the t statistic of
    the univariate slope and adds the ``m`` most significant; ``m`` starts
    at ``batch`` and halves (floor) each round until it reaches zero.

    Returns ``(word, round)`` pairs in entry order.
    """
    if batch < 1:
        raise ValueError(f"batch must be >= 1, got {batch}")
    if not words:
        raise ValueError("no candidate words")
    g = features.shape[0]
    u = np.asarray(scores, dtype=np.float64)
    chosen: list[int] = []
    out: list[tuple[str, int]] = []
    m = batch
    rnd = 1
    while m > 0:
        q = orthonormal_basis(with_intercept(features[:, chosen], g))
        r = project_out(q, u)
        df = g - len(chosen) - 2
        if df < 1:
            log.warning("dictionary: no residual degrees of freedom left at round %d", rnd)
            break

        def block_t(cols, q=q, r=r, df=df):
            return slope_t_statistics(r, project_out(q, cols), df)

        t = chunked_columns(block_t, features, n_jobs)
        t[chosen] = np.nan
        order = tie_aware_order(list(-np.abs(t)), words)
        picked = order[:m]
        if len(picked) < m:
            log.info("dictionary round %d: only %d viable candidates for %d slots", rnd, len(picked), m)
        for i in picked:
            chosen.append(i)
            out.append((words[i], rnd))
        if not picked:
            break
        m //= 2
        rnd += 1
    return out


def merge_dictionaries(per_component: dict[int, list[tuple[str, int]]]) -> Dictionary:
    """Union over components, first-seen order, provenance kept."""
    d = Dictionary()
    for comp in per_component:
        for word, rnd in per_component[comp]:
            if word not in d.provenance:
                d.words.append(word)
                d.provenance[word] = []
            d.provenance[word].append((comp, rnd))
    return d


def build_dictionary(
    basis_scores: np.ndarray,
    components: list[int],
    index: SequenceIndex,
    lengths=DEFAULT_LENGTHS,
    batch: int = 16,
    n_jobs: int = 1,
) -> Dictionary:
    words, features = candidate_features(index, lengths)
    per = {}
    for k, comp in enumerate(components):
        per[comp] = build_component_dictionary(basis_scores[:, k], words, features, batch, n_jobs)
        log.info("component %d: %d dictionary words", comp, len(per[comp]))
    return merge_dictionaries(per)
