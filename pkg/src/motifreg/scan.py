"""Locating and counting promoter elements.

Positions are stored scaled by ``SCALE`` so that the midpoint recursion of
nested pairs stays in exact integer arithmetic for up to ``SCALE_BITS``
levels of nesting.  A simple word at 0-based offset ``i`` sits at
``i * SCALE``; a pair sits at the mean of its two component positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from motifreg.elements import Composite, Element, Simple
from motifreg.sequence import Promoter, PromoterSet, canonical_form

SCALE_BITS = 3
SCALE = 1 << SCALE_BITS

_CODE = np.full(256, -1, dtype=np.int8)
for _i, _b in enumerate("ACGT"):
    _CODE[ord(_b)] = _i
    _CODE[ord(_b.lower())] = _i


def word_code(word: str) -> int:
    c = 0
    for ch in word:
        c = 4 * c + "ACGT".index(ch)
    return c


def code_word(code: int, length: int) -> str:
    out = []
    for _ in range(length):
        out.append("ACGT"[code & 3])
        code >>= 2
    return "".join(reversed(out))


@dataclass(frozen=True)
class LocationTable:
    """Per-gene sorted location sets in CSR layout."""

    offsets: np.ndarray  # (G + 1,)
    positions: np.ndarray  # scaled, sorted within each gene

    @property
    def n_genes(self) -> int:
        return len(self.offsets) - 1

    def counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    def gene_index(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_genes), self.counts())

    def for_gene(self, g: int) -> tuple[int, ...]:
        return tuple(int(x) for x in self.positions[self.offsets[g] : self.offsets[g + 1]])

    @classmethod
    def from_pairs(cls, genes: np.ndarray, positions: np.ndarray, n_genes: int) -> "LocationTable":
        """Build from unsorted (gene, position) pairs, dropping duplicates."""
        genes = np.asarray(genes, dtype=np.int64)
        positions = np.asarray(positions, dtype=np.int64)
        if len(genes):
            span = int(positions.max()) + 1
            keys = np.unique(genes * span + positions)
            genes, positions = np.divmod(keys, span)
        offsets = np.zeros(n_genes + 1, dtype=np.int64)
        np.cumsum(np.bincount(genes, minlength=n_genes), out=offsets[1:])
        return cls(offsets, positions)


def _pair_locations(a: LocationTable, b: LocationTable, delta: int, same: bool) -> LocationTable:
    n = a.n_genes
    ga = a.gene_index()
    cb = b.counts()
    reps = cb[ga]
    if reps.sum() == 0:
        return LocationTable(np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))
    ai = np.repeat(np.arange(len(ga)), reps)
    # position of each pair within its run of partners
    run_start = np.repeat(np.cumsum(reps) - reps, reps)
    bi = b.offsets[ga[ai]] + (np.arange(len(ai)) - run_start)
    i = a.positions[ai]
    j = b.positions[bi]
    keep = np.abs(j - i) <= delta * SCALE
    if same:
        # a self-pair needs two distinct occurrences
        keep &= i != j
    total = i[keep] + j[keep]
    if np.any(total & 1):
        raise ValueError(f"element nesting exceeds {SCALE_BITS} midpoint levels")
    return LocationTable.from_pairs(ga[ai][keep], total >> 1, n)


class SequenceIndex:
    """Scanner over a fixed list of promoter sequences.

    Caches per-length k-mer codes and element location tables; every
    method is a pure function of the sequences.
    """

    def __init__(self, sequences):
        if isinstance(sequences, PromoterSet):
            sequences = sequences.sequences
        seqs = [s.bases if isinstance(s, Promoter) else s for s in sequences]
        self.n_genes = len(seqs)
        self.lengths = np.array([len(s) for s in seqs], dtype=np.int64)
        # one invalid separator after each promoter keeps windows inside genes
        self.starts = np.zeros(self.n_genes, dtype=np.int64)
        if self.n_genes:
            self.starts[1:] = np.cumsum(self.lengths + 1)[:-1]
        joined = "#".join(seqs) + "#"
        self._bases = _CODE[np.frombuffer(joined.encode("ascii"), dtype=np.uint8)]
        self._gene_of = np.repeat(np.arange(self.n_genes), self.lengths + 1)
        self._kmers: dict[int, np.ndarray] = {}
        self._locations: dict[str, LocationTable] = {}

    def canonical_kmer_codes(self, length: int) -> np.ndarray:
        """Canonical code of the word starting at each joined position, -1 if invalid."""
        if length not in self._kmers:
            b = self._bases.astype(np.int64)
            n = len(b) - length + 1
            if n <= 0:
                self._kmers[length] = np.full(len(b), -1, dtype=np.int64)
                return self._kmers[length]
            windows = np.lib.stride_tricks.sliding_window_view(b, length)
            valid = (windows >= 0).all(axis=1)
            weights = 4 ** np.arange(length - 1, -1, -1, dtype=np.int64)
            fwd = windows @ weights
            rev = (3 - windows) @ weights[::-1]
            codes = np.where(valid, np.minimum(fwd, rev), -1)
            out = np.full(len(b), -1, dtype=np.int64)
            out[:n] = codes
            self._kmers[length] = out
        return self._kmers[length]

    def word_count_matrix(self, length: int) -> tuple[list[str], np.ndarray]:
        """Counts of every canonical word of ``length`` (genes x words).

        Word matches on either strand count; overlapping matches count.
        """
        codes = self.canonical_kmer_codes(length)
        ok = codes >= 0
        all_codes = np.arange(4**length)
        rc = np.zeros_like(all_codes)
        x = all_codes.copy()
        for _ in range(length):
            rc = rc * 4 + (3 - (x & 3))
            x >>= 2
        canon_codes = all_codes[all_codes <= rc]
        col = np.full(4**length, -1, dtype=np.int64)
        col[canon_codes] = np.arange(len(canon_codes))
        n = len(canon_codes)
        flat = self._gene_of[ok] * n + col[codes[ok]]
        counts = np.bincount(flat, minlength=self.n_genes * n).reshape(self.n_genes, n)
        words = [code_word(int(c), length) for c in canon_codes]
        return words, counts.astype(np.int32)

    def _simple(self, word: str) -> LocationTable:
        codes = self.canonical_kmer_codes(len(word))
        hits = np.flatnonzero(codes == word_code(canonical_form(word)))
        genes = self._gene_of[hits]
        pos = (hits - self.starts[genes]) * SCALE
        offsets = np.zeros(self.n_genes + 1, dtype=np.int64)
        np.cumsum(np.bincount(genes, minlength=self.n_genes), out=offsets[1:])
        return LocationTable(offsets, pos.astype(np.int64))

    def locate(self, e: Element) -> LocationTable:
        key = e.key
        table = self._locations.get(key)
        if table is None:
            if isinstance(e, Simple):
                table = self._simple(e.word)
            else:
                table = _pair_locations(
                    self.locate(e.left), self.locate(e.right), e.delta, e.left.key == e.right.key
                )
            self._locations[key] = table
        return table

    def feature(self, e: Element) -> np.ndarray:
        counts = self.locate(e).counts()
        if isinstance(e, Composite):
            return (counts > 0).astype(np.int64)
        return counts.astype(np.int64)


@dataclass(frozen=True)
class FeatureColumn:
    element: Element
    values: np.ndarray = field(repr=False)

    @property
    def tau(self) -> int:
        return int(np.count_nonzero(self.values))


def locate_element(e: Element, promoter) -> tuple[int, ...]:
    """Scaled, sorted, duplicate-free locations of ``e`` in one promoter."""
    return SequenceIndex([promoter]).locate(e).for_gene(0)


def count_feature(e: Element, promoters, index: SequenceIndex | None = None) -> FeatureColumn:
    """Per-gene count (simple) or presence indicator (composite)."""
    if index is None:
        index = SequenceIndex(promoters)
    return FeatureColumn(e, index.feature(e))


def min_pair_distance(e1: Element, e2: Element, promoter) -> float:
    """Smallest distance in nucleotides between any e1 and e2 location.

    ``math.inf`` when either element is absent.
    """
    index = SequenceIndex([promoter])
    a = np.array(index.locate(e1).for_gene(0), dtype=np.int64)
    b = np.array(index.locate(e2).for_gene(0), dtype=np.int64)
    if not len(a) or not len(b):
        return math.inf
    return float(np.abs(a[:, None] - b[None, :]).min()) / SCALE
