"""Information content of the sequence flanking an element's word
occurrences, and its significance.

Windows are taken in the frame of the word: an occurrence matched on the
reverse strand contributes the reverse complement of its raw window.  The
test statistic is ``N * I_seq`` where ``I_seq`` is the summed per-column
relative entropy (nats) of the aligned flank letters against a
complement-symmetric background.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats
from scipy.special import gammaln, logsumexp

from motifreg.elements import Composite, Element, Simple
from motifreg.scan import SCALE, SequenceIndex
from motifreg.sequence import PromoterSet, canonical_form, reverse_complement

log = logging.getLogger(__name__)

DEFAULT_FLANK = 10
DEFAULT_STEP = 0.01
MAX_COMPOSITIONS = 2_000_000

_ROW = {"A": 0, "C": 1, "G": 2, "T": 3}


class LatticeBudgetExceeded(RuntimeError):
    pass


@dataclass
class FlankAlignment:
    element: Element
    word: str
    flank: int
    counts: np.ndarray  # 4 x 2*flank, rows A, C, G, T
    background: np.ndarray  # A, C, G, T
    windows: list[str] = field(default_factory=list, repr=False)

    @property
    def n(self) -> int:
        return int(self.counts[:, 0].sum()) if self.counts.size else 0

    @property
    def columns(self) -> int:
        return self.counts.shape[1]


def _instances(e: Element, g: int, index: SequenceIndex) -> dict[int, set]:
    """Scaled location -> set of (word key, scaled position) occurrences in it."""
    if isinstance(e, Simple):
        return {p: {(e.key, p)} for p in index.locate(e).for_gene(g)}
    a = _instances(e.left, g, index)
    b = _instances(e.right, g, index)
    same = e.left.key == e.right.key
    limit = e.delta * SCALE
    out: dict[int, set] = {}
    for i, occ_i in a.items():
        for j, occ_j in b.items():
            if abs(j - i) > limit or (same and i == j):
                continue
            out.setdefault((i + j) // 2, set()).update(occ_i, occ_j)
    return out


def participating_occurrences(e: Element, word: str, g: int, index: SequenceIndex) -> list[int]:
    """0-based start offsets of ``word`` occurrences used by some instance of ``e``."""
    key = canonical_form(word)
    found = set()
    for occ in _instances(e, g, index).values():
        found.update(p for k, p in occ if k == key)
    return sorted(p // SCALE for p in found)


def complement_symmetric_background(seqs) -> np.ndarray:
    counts = np.ones(4)
    for s in seqs:
        for b, k in _ROW.items():
            counts[k] += s.count(b)
    at = (counts[0] + counts[3]) / 2.0
    cg = (counts[1] + counts[2]) / 2.0
    bg = np.array([at, cg, cg, at])
    return bg / bg.sum()


def build_flank_alignment(
    e: Element,
    word: str,
    promoters: PromoterSet,
    flank: int = DEFAULT_FLANK,
    index: SequenceIndex | None = None,
) -> FlankAlignment:
    """Align the ``flank``-nt windows either side of ``word`` inside instances of ``e``.

    Windows cut by a promoter end, or holding a non-ACGT letter, are dropped.
    """
    if flank < 1:
        raise ValueError("flank must be >= 1")
    if canonical_form(word) not in {canonical_form(w) for w in e.words()}:
        raise ValueError(f"{word} is not a component word of {e}")
    if index is None:
        index = SequenceIndex(promoters)
    seqs = promoters.sequences
    rc_word = reverse_complement(word)
    length = len(word)
    carriers = np.flatnonzero(index.feature(e) > 0)
    windows = []
    for g in carriers:
        s = seqs[g]
        for p in participating_occurrences(e, word, int(g), index):
            lo, hi = p - flank, p + length + flank
            if lo < 0 or hi > len(s):
                continue
            raw = s[lo:hi]
            if s[p : p + length] != word and s[p : p + length] == rc_word:
                raw = reverse_complement(raw)
            w = raw[:flank] + raw[flank + length :]
            if any(ch not in _ROW for ch in w):
                continue
            windows.append(w)
    if not windows:
        raise ValueError(f"no usable flank windows for {word} in {e}")
    counts = np.zeros((4, 2 * flank))
    for w in windows:
        for j, ch in enumerate(w):
            counts[_ROW[ch], j] += 1
    background = complement_symmetric_background(seqs[g] for g in carriers)
    return FlankAlignment(e, word, flank, counts, background, windows)


def column_information(counts: np.ndarray, background: np.ndarray) -> np.ndarray:
    """Relative entropy (nats) of each column's letter frequencies."""
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum(axis=0)
    f = counts / n
    bg = np.asarray(background, dtype=np.float64)[:, None]
    if np.any((bg <= 0) & (f > 0)):
        raise ValueError("background has zero probability for an observed letter")
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(f > 0, f * np.log(f / bg), 0.0)
    return terms.sum(axis=0)


def information_content(fa: FlankAlignment) -> float:
    return float(column_information(fa.counts, fa.background).sum())


def flank_pvalue_chisq(n: int, info: float, columns: int, alphabet: int = 4) -> float:
    """Wilks approximation: 2 N I_seq ~ chi-square with (alphabet-1)*columns df."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(stats.chi2.sf(2.0 * n * info, (alphabet - 1) * columns))


def _compositions(n: int) -> np.ndarray:
    """All (a, c, g, t) with a + c + g + t = n."""
    total = math.comb(n + 3, 3)
    if total > MAX_COMPOSITIONS:
        raise LatticeBudgetExceeded(f"{total} compositions for N={n}")
    blocks = []
    for a in range(n + 1):
        i, j = np.tril_indices(n - a + 1)  # j <= i <= n - a
        blocks.append(np.column_stack([np.full(len(i), a), j, i - j, n - a - i]))
    return np.vstack(blocks)


def column_lattice_pmf(n: int, background, step: float) -> np.ndarray:
    """log-probability of each lattice bin of one column's contribution ``N * KL``."""
    k = _compositions(n).astype(np.float64)
    bg = np.asarray(background, dtype=np.float64)
    logp = gammaln(n + 1) - gammaln(k + 1).sum(axis=1) + (k * np.log(bg)).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        contrib = np.where(k > 0, k * np.log(k / (n * bg)), 0.0).sum(axis=1)
    bins = np.rint(contrib / step).astype(np.int64)
    nb = int(bins.max()) + 1
    top = np.full(nb, -np.inf)
    np.maximum.at(top, bins, logp)
    s = np.bincount(bins, weights=np.exp(logp - top[bins]), minlength=nb)
    with np.errstate(divide="ignore"):
        return np.where(s > 0, top + np.log(s), -np.inf)


def lattice_tail(logpmf: np.ndarray, columns: int, observed_bin: int) -> float:
    """P(sum of ``columns`` iid lattice variables >= observed_bin).

    The column distribution is exponentially tilted so the observed total
    sits at the tilted mean, convolved by FFT, then un-tilted; this keeps
    relative accuracy deep in the tail.
    """
    b = np.arange(len(logpmf), dtype=np.float64)
    top = int(np.flatnonzero(np.isfinite(logpmf)).max())
    if observed_bin > columns * top:
        return 0.0
    if observed_bin == columns * top:
        return float(math.exp(columns * logpmf[top]))

    def log_mgf(theta):
        return logsumexp(logpmf + theta * b)

    def tilted_mean(theta):
        return float(np.exp(logpmf + theta * b - log_mgf(theta)) @ b)

    target = observed_bin / columns
    theta = 0.0
    if tilted_mean(0.0) < target:
        hi = 1e-3
        while tilted_mean(hi) < target:
            hi *= 2.0
        theta = optimize.brentq(lambda t: tilted_mean(t) - target, 0.0, hi, xtol=1e-14, rtol=1e-12)
    lm = log_mgf(theta)
    q = np.exp(logpmf + theta * b - lm)
    size = columns * (len(q) - 1) + 1
    nfft = 1 << (size - 1).bit_length()
    dist = np.fft.irfft(np.fft.rfft(q, nfft) ** columns, nfft)[:size]
    dist = np.clip(dist, 0.0, None)
    s = np.arange(observed_bin, size)
    tail = dist[observed_bin:] * np.exp(-theta * (s - observed_bin))
    total = tail.sum()
    if total <= 0:
        return 0.0
    return float(min(1.0, math.exp(columns * lm - theta * observed_bin + math.log(total))))


def flank_pvalue_lattice(fa: FlankAlignment, step: float = DEFAULT_STEP) -> float:
    """Tail probability of N * I_seq on an ``step``-nat lattice.

    Raises ``LatticeBudgetExceeded`` when N is too large to enumerate.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    n = fa.n
    if n < 1:
        raise ValueError("empty alignment")
    logpmf = column_lattice_pmf(n, fa.background, step)
    observed = n * column_information(fa.counts, fa.background)
    observed_bin = int(np.rint(observed / step).sum())
    return lattice_tail(logpmf, fa.columns, observed_bin)


def flank_pvalue(fa: FlankAlignment, method: str = "chisq", step: float = DEFAULT_STEP) -> float:
    if method == "lattice":
        try:
            return flank_pvalue_lattice(fa, step)
        except LatticeBudgetExceeded as exc:
            log.warning("lattice p-value skipped (%s); using chi-square", exc)
    return flank_pvalue_chisq(fa.n, information_content(fa), fa.columns)
