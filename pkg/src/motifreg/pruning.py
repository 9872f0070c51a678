"""Backward deletion under a penalised lack-of-fit criterion.

Two criteria are available:

``wgcv``
    weighted generalised cross-validation, each interaction term charged
    an adaptive number of degrees of freedom that grows with the log of
    the promoter length and with how balanced its carrier split is;
``wmbic``
    weighted modified BIC, negated so that lower is better.

All logarithms are natural.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from motifreg._ordering import tie_aware_order
from motifreg.elements import Composite, Element
from motifreg.model import ForwardModel
from motifreg.regression import component_rss, with_intercept

log = logging.getLogger(__name__)

RSS_FLOOR = 1e-300
TAU_TERMS = ("paired", "per_element", "global")


@dataclass(frozen=True)
class PenaltySpec:
    kind: str  # "wgcv" or "wmbic"
    promoter_length: int
    n_genes: int
    # how the carrier-count term is charged for each pair element:
    # "paired":      ln tau + ln(G - tau) - ln G   (matches the knot penalty gamma)
    # "per_element": ln tau - ln G
    # "global":      ln tau, with a single ln G credited once per model
    tau_term: str = "paired"

    def __post_init__(self):
        if self.kind not in ("wgcv", "wmbic"):
            raise ValueError(f"unknown lack-of-fit {self.kind!r}")
        if self.promoter_length <= 1:
            raise ValueError("promoter length must exceed 1")
        if self.tau_term not in TAU_TERMS:
            raise ValueError(f"unknown tau_term {self.tau_term!r}")


def knot_penalty_gamma(tau: int, promoter_length: int, n_genes: int) -> float:
    """Degrees of freedom charged for one interaction's distance parameter."""
    if not 0 < tau < n_genes:
        raise ValueError(f"tau must be in (0, {n_genes}), got {tau}")
    g = n_genes
    return 2.0 * (math.log(promoter_length) + math.log(tau) + math.log(g - tau) - math.log(g)) / math.log(g)


def _design(elements, columns, n_genes) -> np.ndarray:
    cols = [columns[e.key] for e in elements]
    return with_intercept(np.column_stack(cols) if cols else None, n_genes)


def _rss(elements, columns, scores) -> np.ndarray:
    return component_rss(_design(elements, columns, scores.shape[0]), scores)


def model_dof(elements, taus, spec: PenaltySpec) -> float:
    """|E| + 1 plus, for each pair element, one adaptive charge per interaction."""
    d = len(elements) + 1.0
    for e in elements:
        if isinstance(e, Composite):
            d += e.order * knot_penalty_gamma(taus[e.key], spec.promoter_length, spec.n_genes)
    return d


def wgcv(elements, columns, taus, scores, weights, spec: PenaltySpec) -> float:
    g = scores.shape[0]
    d = model_dof(elements, taus, spec)
    if d >= g:
        return math.inf
    rss = _rss(elements, columns, scores)
    return float(np.sum(np.asarray(weights) ** 2 * rss) / (1.0 - d / g) ** 2)


def mbic_components(elements, columns, taus, scores, spec: PenaltySpec) -> np.ndarray:
    """Per-component modified BIC relative to the intercept-only model.

    Larger is better; zero for the intercept-only model itself.
    """
    g = scores.shape[0]
    p = len(elements)
    rss0 = _rss([], columns, scores)
    rss = _rss(elements, columns, scores)
    if np.any(rss <= RSS_FLOOR):
        log.warning("perfect fit with %d elements; RSS clamped", p)
        rss = np.maximum(rss, RSS_FLOOR)
    rss0 = np.maximum(rss0, RSS_FLOOR)
    value = 0.5 * (g - p + 1) * np.log(rss0 / rss)
    value += gammaln((g - p + 1) / 2.0) - gammaln((g + 1) / 2.0)
    value += 0.5 * p * np.log(rss0)
    pairs = [e for e in elements if isinstance(e, Composite)]
    if pairs:
        log_tau = sum(math.log(taus[e.key]) for e in pairs)
        if spec.tau_term == "paired":
            value -= log_tau + sum(math.log(g - taus[e.key]) for e in pairs) - len(pairs) * math.log(g)
        elif spec.tau_term == "per_element":
            value -= log_tau - len(pairs) * math.log(g)
        else:
            value -= log_tau - math.log(g)
        knots = sum(e.order for e in pairs)
        value -= knots * math.log(spec.promoter_length)
    return value


def wmbic(elements, columns, taus, scores, weights, spec: PenaltySpec) -> float:
    """Lack of fit: minus the weighted sum of per-component modified BICs."""
    m = mbic_components(elements, columns, taus, scores, spec)
    # + 0.0 turns the empty model's -0.0 into 0.0
    return float(-np.sum(np.asarray(weights) ** 2 * m)) + 0.0


def lack_of_fit(elements, columns, taus, scores, weights, spec: PenaltySpec) -> float:
    fn = wgcv if spec.kind == "wgcv" else wmbic
    return fn(elements, columns, taus, scores, weights, spec)


@dataclass
class LofCurve:
    kind: str
    # one record per size m: (m, element deleted to reach size m or None, lof, surviving elements)
    sizes: list[int] = field(default_factory=list)
    deleted: list[Element | None] = field(default_factory=list)
    lof: list[float] = field(default_factory=list)
    models: list[list[Element]] = field(default_factory=list)
    best_size: int = 0

    def record(self, m, deleted, lof, model):
        self.sizes.append(m)
        self.deleted.append(deleted)
        self.lof.append(lof)
        self.models.append(list(model))

    @property
    def selected(self) -> list[Element]:
        return self.models[self.sizes.index(self.best_size)]

    @property
    def min_lof(self) -> float:
        return min(self.lof)

    def ranking(self) -> list[Element]:
        """Elements ordered by reverse deletion: last survivor first."""
        full = self.models[0]
        gone = [e for e in self.deleted[1:] if e is not None]
        kept = [e for e in full if e not in gone]
        return kept + list(reversed(gone))


def prune_backward(forward: ForwardModel, scores, weights, spec: PenaltySpec) -> LofCurve:
    """Greedy backward deletion from the full forward model.

    At each size the element whose removal yields the lowest lack of fit is
    dropped.  The chosen size minimises lack of fit over sizes ``1..M``
    (and also the empty model under ``wmbic``).
    """
    if not forward.elements:
        raise ValueError("cannot prune an empty model")
    scores = np.asarray(scores, dtype=np.float64)
    scores = scores.reshape(scores.shape[0], -1)
    taus = dict(zip((e.key for e in forward.elements), forward.taus))
    cols = forward.columns

    def lof(es):
        return lack_of_fit(es, cols, taus, scores, weights, spec)

    current = list(forward.elements)
    curve = LofCurve(spec.kind)
    curve.record(len(current), None, lof(current), current)
    for m in range(len(current) - 1, 0, -1):
        trials = [lof(current[:k] + current[k + 1 :]) for k in range(len(current))]
        k = tie_aware_order(trials, [str(e) for e in current])[0]
        gone = current[k]
        current = current[:k] + current[k + 1 :]
        curve.record(m, gone, trials[k], current)
    if spec.kind == "wmbic":
        curve.record(0, current[0], lof([]), [])
    # ties go to the smaller model
    best = tie_aware_order(curve.lof, curve.sizes)[0]
    curve.best_size = curve.sizes[best]
    return curve
