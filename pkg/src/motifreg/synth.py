"""Planted-pair fixture generator.

Uniform random promoters; in a subset of them a word pair is written
within ``delta`` nucleotides of each other (each word on a random strand).
The first expression direction is ``signal * X(pair) + N(0, 1)`` and the
remaining sample dimensions carry small independent noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from motifreg.elements import Composite, Simple
from motifreg.expression import ExpressionMatrix
from motifreg.scan import count_feature
from motifreg.sequence import PromoterSet, canonical_form, reverse_complement


@dataclass
class SynthData:
    promoters: PromoterSet
    expression: ExpressionMatrix
    element: Composite
    planted_genes: list[str]
    response: np.ndarray
    positive_genes: list[str]


def _random_word(rng, length: int) -> str:
    return "".join(rng.choice(list("ACGT"), size=length))


def _pick_words(rng, length: int) -> tuple[str, str]:
    while True:
        w1, w2 = _random_word(rng, length), _random_word(rng, length)
        c1, c2 = canonical_form(w1), canonical_form(w2)
        if c1 == c2 or w1 == reverse_complement(w1) or w2 == reverse_complement(w2):
            continue
        return c1, c2


def synthesize(
    seed: int,
    n_genes: int = 1000,
    length: int = 500,
    n_planted: int = 150,
    word_length: int = 6,
    delta: int = 50,
    n_samples: int = 6,
    signal: float = 2.0,
    background_noise: float = 0.25,
) -> SynthData:
    rng = np.random.default_rng(seed)
    w1, w2 = _pick_words(rng, word_length)
    seqs = [list(_random_word(rng, length)) for _ in range(n_genes)]
    planted = np.sort(rng.choice(n_genes, size=n_planted, replace=False))
    for g in planted:
        gap = int(rng.integers(word_length, delta + 1))
        first = int(rng.integers(0, length - gap - word_length + 1))
        a, b = (w1, w2) if rng.random() < 0.5 else (w2, w1)
        for start, word in ((first, a), (first + gap, b)):
            if rng.random() < 0.5:
                word = reverse_complement(word)
            seqs[g][start : start + word_length] = list(word)
    gene_ids = [f"g{g:05d}" for g in range(n_genes)]
    promoters = PromoterSet.from_pairs(zip(gene_ids, ("".join(s) for s in seqs)))

    element = Composite(Simple(w1), Simple(w2), delta)
    x = count_feature(element, promoters).values.astype(float)
    response = signal * x + rng.standard_normal(n_genes)

    profile = np.sin(np.linspace(0.3, 2.8, n_samples))
    values = np.outer(response, profile) + background_noise * rng.standard_normal((n_genes, n_samples))
    labels = [f"t{t}" for t in range(n_samples)]
    expression = ExpressionMatrix(values, gene_ids, labels)

    top = np.argsort(-response, kind="stable")[: n_genes // 2]
    positives = [gene_ids[i] for i in sorted(top)]
    return SynthData(promoters, expression, element, [gene_ids[g] for g in planted], response, positives)
