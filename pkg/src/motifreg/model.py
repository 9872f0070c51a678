"""Forward selection over an adaptively expanding pool of elements.

The pool starts as the dictionary words.  Every time an element ``e`` of
order below ``o_max`` enters the model, the pairs ``(e, w, delta)`` for all
dictionary words ``w`` and all configured distances join the pool.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from motifreg._ordering import chunked_columns, tie_aware_order
from motifreg.elements import Composite, Element, Simple
from motifreg.regression import candidate_scores, orthonormal_basis, project_out, with_intercept
from motifreg.scan import SequenceIndex

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 50
STOP_RTOL = 1e-12


class CandidatePool:
    """Insertion-ordered element set with a skip list for degenerate columns."""

    def __init__(self, elements=()):
        self.elements: list[Element] = []
        self._keys: dict[str, int] = {}
        self.skipped: dict[str, str] = {}
        for e in elements:
            self.add(e)

    @classmethod
    def from_words(cls, words) -> "CandidatePool":
        return cls(Simple(w) for w in words)

    def add(self, e: Element) -> bool:
        if e.key in self._keys:
            return False
        self._keys[e.key] = len(self.elements)
        self.elements.append(e)
        return True

    def __contains__(self, e: Element) -> bool:
        return e.key in self._keys

    def __len__(self) -> int:
        return len(self.elements)

    def position(self, e: Element) -> int:
        return self._keys[e.key]


def expand_pool(pool: CandidatePool, selected: Element, words, deltas, o_max: int) -> int:
    """Add ``(selected, w, delta)`` pairs; returns how many were new."""
    if selected.order >= o_max:
        return 0
    added = 0
    for w in words:
        for d in deltas:
            added += pool.add(Composite(selected, Simple(w), int(d)))
    return added


@dataclass
class ForwardModel:
    elements: list[Element] = field(default_factory=list)
    losses: list[float] = field(default_factory=list)
    taus: list[int] = field(default_factory=list)
    null_loss: float = float("nan")
    stop_reason: str | None = None
    pool_size: int = 0
    columns: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def design(self, n_genes: int, elements=None) -> np.ndarray:
        elements = self.elements if elements is None else elements
        cols = [self.columns[e.key] for e in elements]
        return with_intercept(np.column_stack(cols) if cols else None, n_genes)


class ForwardBuilder:
    """Holds responses, feature cache and the pool's column matrix."""

    def __init__(self, index: SequenceIndex, scores: np.ndarray, weights: np.ndarray, n_jobs: int = 1):
        self.index = index
        self.scores = np.asarray(scores, dtype=np.float64).reshape(index.n_genes, -1)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.n_jobs = n_jobs
        self._matrix = np.zeros((index.n_genes, 0))
        self._filled = 0

    def column(self, e: Element) -> np.ndarray:
        return self.index.feature(e).astype(np.float64)

    def _sync(self, pool: CandidatePool) -> np.ndarray:
        n = len(pool)
        if n > self._matrix.shape[1]:
            grown = np.zeros((self.index.n_genes, max(n, 2 * self._matrix.shape[1], 64)))
            grown[:, : self._filled] = self._matrix[:, : self._filled]
            self._matrix = grown
        for k in range(self._filled, n):
            self._matrix[:, k] = self.column(pool.elements[k])
        self._filled = n
        return self._matrix[:, :n]

    def residuals(self, model: ForwardModel) -> tuple[np.ndarray, np.ndarray]:
        q = orthonormal_basis(model.design(self.index.n_genes))
        return q, project_out(q, self.scores)

    def forward_step(self, model: ForwardModel, pool: CandidatePool) -> Element | None:
        """Add the pool element with the lowest post-addition weighted loss.

        Returns ``None`` (and sets ``model.stop_reason``) when nothing in the
        pool improves the fit.
        """
        cols = self._sync(pool)
        q, r = self.residuals(model)
        w2 = self.weights**2
        current = float(np.sum(w2 * np.einsum("ij,ij->j", r, r)))
        if np.isnan(model.null_loss):
            model.null_loss = current

        def block_scores(block, q=q, r=r):
            return candidate_scores(project_out(q, block), r, self.weights)

        scores = chunked_columns(block_scores, cols, self.n_jobs)
        for e in model.elements:
            scores[pool.position(e)] = np.nan
        for k in np.flatnonzero(np.isnan(scores)):
            e = pool.elements[k]
            if e.key not in model.columns:
                pool.skipped.setdefault(e.key, "degenerate after residualisation")
        names = [(e.order, str(e)) for e in pool.elements]
        order = tie_aware_order(list(scores), names)
        if not order:
            model.stop_reason = "no viable candidates"
            log.info("forward selection stopped: %s", model.stop_reason)
            return None
        best = order[0]
        if current <= 0 or (current - scores[best]) <= STOP_RTOL * current:
            model.stop_reason = "no candidate improves the weighted loss"
            log.info("forward selection stopped after %d steps: %s", len(model.elements), model.stop_reason)
            return None
        e = pool.elements[best]
        model.elements.append(e)
        model.losses.append(float(scores[best]))
        model.columns[e.key] = cols[:, best].copy()
        model.taus.append(int(np.count_nonzero(cols[:, best])))
        return e


def build_model(
    words,
    deltas,
    budget: int,
    o_max: int,
    scores: np.ndarray,
    weights: np.ndarray,
    index: SequenceIndex,
    n_jobs: int = 1,
) -> ForwardModel:
    """Run up to ``budget`` forward steps, expanding the pool after each."""
    if budget < 1:
        raise ValueError(f"model budget must be >= 1, got {budget}")
    builder = ForwardBuilder(index, scores, weights, n_jobs)
    pool = CandidatePool.from_words(words)
    model = ForwardModel()
    while len(model.elements) < budget:
        e = builder.forward_step(model, pool)
        if e is None:
            break
        n_new = expand_pool(pool, e, words, deltas, o_max)
        log.debug("step %d: %s (loss %.6g), pool +%d -> %d", len(model.elements), e, model.losses[-1], n_new, len(pool))
    model.pool_size = len(pool)
    return model
