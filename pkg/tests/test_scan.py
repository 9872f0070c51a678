import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import naive_feature, naive_locate, random_element, random_seq
from motifreg.elements import Composite, Simple, parse_element
from motifreg.scan import SCALE, SequenceIndex, count_feature, locate_element, min_pair_distance
from motifreg.sequence import Promoter, PromoterSet, reverse_complement


def P(s, gid="g"):
    return Promoter(gid, s)


def test_revcomp_match_found():
    assert locate_element(Simple("TTGAC"), P("GTCAAT")) == (0,)


def test_overlapping_matches_counted():
    assert locate_element(Simple("AAAA"), P("AAAAAA")) == (0, SCALE, 2 * SCALE)
    col = count_feature(Simple("AAAA"), PromoterSet.from_pairs([("a", "AAAAAA"), ("b", "CCCCCC")]))
    assert list(col.values) == [3, 0] and col.tau == 1


def test_palindrome_listed_once():
    assert locate_element(Simple("ACGT"), P("TACGTA")) == (SCALE,)


def test_ambiguity_letters_never_match():
    assert locate_element(Simple("AC"), P("ANCAC")) == (3 * SCALE,)


def test_composite_midpoint_and_range():
    seq = ["C"] * 60
    seq[10:13] = "AAT"
    seq[30:33] = "GAG"
    s = "".join(seq)
    assert locate_element(parse_element("(AAT,GAG,30)"), P(s)) == (20 * SCALE,)
    assert locate_element(parse_element("(AAT,GAG,10)"), P(s)) == ()


def test_composite_present_twice_is_indicator_one():
    s = "AATCGGCTTTTTTTTTTTAATCGGC"
    e = parse_element("(AAT,CGG,5)")
    assert len(locate_element(e, P(s))) == 2
    assert list(count_feature(e, [P(s)]).values) == [1]


def test_absent_element_gives_zero_column():
    col = count_feature(parse_element("(GGGG,CCGA,30)"), [P("ATATATAT"), P("TTTT", "h")])
    assert list(col.values) == [0, 0] and col.tau == 0


def test_min_pair_distance():
    s = ["A"] * 120
    s[5:8] = "CGC"
    s[100:103] = "CGC"
    s[50:53] = "GTG"
    p = P("".join(s))
    assert min_pair_distance(Simple("CGC"), Simple("GTG"), p) == 45
    assert min_pair_distance(Simple("CCCC"), Simple("GTG"), p) == math.inf
    q = P("AAAAAAACGCAAA")
    assert min_pair_distance(Simple("CGC"), Simple("CGC"), q) == 0


def test_oracle_equivalence_on_random_instances():
    """1000 random (promoter, element) pairs against the quadratic scanner."""
    rng = np.random.default_rng(20240611)
    for k in range(1000):
        seq = random_seq(rng, int(rng.integers(1, 120)), alphabet="ACGT" if k % 7 else "ACGTN")
        e = random_element(rng, int(rng.integers(0, 4)))
        assert list(locate_element(e, P(seq))) == naive_locate(e, seq), (e, seq)


def test_feature_oracle_over_promoter_sets():
    rng = np.random.default_rng(7)
    for _ in range(60):
        seqs = [random_seq(rng, int(rng.integers(5, 200))) for _ in range(int(rng.integers(1, 50)))]
        ps = PromoterSet.from_pairs((f"g{i}", s) for i, s in enumerate(seqs))
        index = SequenceIndex(ps)
        for _ in range(5):
            e = random_element(rng, int(rng.integers(0, 3)))
            assert np.array_equal(count_feature(e, ps, index).values, naive_feature(e, seqs))


seqs = st.text(alphabet="ACGT", min_size=1, max_size=200)
short_words = st.text(alphabet="ACGT", min_size=1, max_size=4)


@settings(max_examples=200, deadline=None)
@given(seqs, short_words, short_words, st.integers(1, 60))
def test_location_sets_sorted_unique_and_scaled(seq, w1, w2, delta):
    e = Composite(Composite(Simple(w1), Simple(w2), delta), Simple(w1), delta)
    for sub in (e.left.left, e.left, e):
        locs = locate_element(sub, P(seq))
        assert list(locs) == sorted(set(locs))
        step = SCALE >> sub.depth
        assert all(x % step == 0 for x in locs)


@settings(max_examples=200, deadline=None)
@given(st.lists(seqs, min_size=1, max_size=8), short_words)
def test_word_and_revcomp_count_identically(batch, w):
    assert np.array_equal(
        count_feature(Simple(w), [P(s) for s in batch]).values,
        count_feature(Simple(reverse_complement(w)), [P(s) for s in batch]).values,
    )


@settings(max_examples=200, deadline=None)
@given(seqs, short_words, short_words, st.integers(1, 60))
def test_order_one_presence_matches_min_distance(seq, w1, w2, delta):
    e = Composite(Simple(w1), Simple(w2), delta)
    present = count_feature(e, [P(seq)]).values[0]
    assert set(np.unique(present)) <= {0, 1}
    if e.left.key != e.right.key:
        assert bool(present) == (min_pair_distance(e.left, e.right, P(seq)) <= delta)


def test_word_count_matrix_matches_simple_scan():
    rng = np.random.default_rng(3)
    seqs = [random_seq(rng, 80) for _ in range(12)]
    index = SequenceIndex(seqs)
    words, counts = index.word_count_matrix(3)
    assert len(words) == 32
    for j, w in enumerate(words):
        assert np.array_equal(counts[:, j], naive_feature(Simple(w), seqs))
