"""DNA alphabet, canonical words and promoter containers."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

BASES = "ACGT"
IUPAC = set("ACGTRYSWKMBDHVN")

_RC_TABLE = str.maketrans("ACGTacgt", "TGCAtgca")


class SequenceError(ValueError):
    """Malformed DNA input."""


def reverse_complement(word: str) -> str:
    if not word:
        raise SequenceError("cannot reverse-complement an empty word")
    return word.translate(_RC_TABLE)[::-1]


def canonical_form(word: str) -> str:
    """Lexicographically smaller of ``word`` and its reverse complement."""
    rc = reverse_complement(word)
    return word if word <= rc else rc


def is_canonical(word: str) -> bool:
    return word <= reverse_complement(word)


def n_canonical_words(length: int) -> int:
    """Number of strand-collapsed words of a given length."""
    if length % 2:
        return 4**length // 2
    half = 4 ** (length // 2)
    return (4**length - half) // 2 + half


def enumerate_words(length: int) -> list[str]:
    """All canonical words of ``length``, in lexicographic order.

    A word and its reverse complement are listed once, under the smaller
    of the two.
    """
    if length < 1:
        raise ValueError(f"word length must be >= 1, got {length}")
    out = []
    for letters in itertools.product(BASES, repeat=length):
        w = "".join(letters)
        if w <= reverse_complement(w):
            out.append(w)
    return out


@dataclass(frozen=True)
class Promoter:
    gene_id: str
    bases: str

    def __post_init__(self):
        if not self.bases:
            raise SequenceError(f"promoter {self.gene_id!r} is empty")

    def __len__(self) -> int:
        return len(self.bases)


class PromoterSet(Sequence[Promoter]):
    """Ordered, id-unique collection of promoters.

    Row ``g`` lines up with row ``g`` of the expression matrix.
    """

    def __init__(self, promoters):
        self._promoters = tuple(promoters)
        ids = [p.gene_id for p in self._promoters]
        seen = set()
        dups = []
        for gid in ids:
            if gid in seen:
                dups.append(gid)
            seen.add(gid)
        if dups:
            raise SequenceError(f"duplicate gene ids: {', '.join(sorted(set(dups)))}")
        self._index = {gid: i for i, gid in enumerate(ids)}

    @classmethod
    def from_pairs(cls, pairs) -> "PromoterSet":
        return cls(Promoter(gid, seq) for gid, seq in pairs)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return PromoterSet(self._promoters[i])
        return self._promoters[i]

    def __len__(self) -> int:
        return len(self._promoters)

    def __iter__(self) -> Iterator[Promoter]:
        return iter(self._promoters)

    @property
    def gene_ids(self) -> list[str]:
        return [p.gene_id for p in self._promoters]

    @property
    def sequences(self) -> list[str]:
        return [p.bases for p in self._promoters]

    def index_of(self, gene_id: str) -> int:
        return self._index[gene_id]

    def reorder(self, gene_ids) -> "PromoterSet":
        """Promoters in the order of ``gene_ids`` (which must match exactly)."""
        return PromoterSet(self._promoters[self._index[g]] for g in gene_ids)

    def mean_length(self) -> int:
        return round(sum(len(p) for p in self._promoters) / len(self._promoters))
