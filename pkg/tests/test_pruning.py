import math

import numpy as np
import pytest

from conftest import random_seq
from motifreg.elements import Composite, Simple
from motifreg.model import ForwardModel, build_model
from motifreg.pruning import (
    PenaltySpec,
    knot_penalty_gamma,
    mbic_components,
    model_dof,
    prune_backward,
    wgcv,
    wmbic,
)
from motifreg.regression import component_rss, with_intercept
from motifreg.scan import SequenceIndex


def test_gamma_values():
    assert knot_penalty_gamma(82, 700, 1600) == pytest.approx(2.95620, abs=5e-5)
    g = 5000
    expected = 2 * (math.log(g) + math.log(g - 1) - math.log(g)) / math.log(g)
    assert knot_penalty_gamma(1, g, g) == pytest.approx(expected)
    assert expected == pytest.approx(2, abs=1e-3)
    assert knot_penalty_gamma(82, 1000, 1600) > knot_penalty_gamma(82, 700, 1600)
    for bad in (0, 1600):
        with pytest.raises(ValueError):
            knot_penalty_gamma(bad, 700, 1600)


def _fixture(seed=0, g=200, k=2, p=6):
    rng = np.random.default_rng(seed)
    elements = [Simple(w) for w in ("AAAC", "AACC", "ACCC", "CCCG", "CCGA", "CGAT", "GATT", "ATTC")[:p]]
    cols = {e.key: rng.integers(0, 3, size=g).astype(float) for e in elements}
    scores = rng.normal(size=(g, k))
    scores -= scores.mean(axis=0)
    scores /= np.linalg.norm(scores, axis=0)
    weights = rng.uniform(1, 4, size=k)
    taus = {e.key: int(np.count_nonzero(cols[e.key])) for e in elements}
    return elements, cols, taus, scores, weights


def test_wgcv_reduces_to_classical_gcv():
    elements, cols, taus, scores, weights = _fixture()
    spec = PenaltySpec("wgcv", 500, 200)
    g = 200
    for m in range(len(elements) + 1):
        x = with_intercept(np.column_stack([cols[e.key] for e in elements[:m]]) if m else None, g)
        direct = sum(
            weights[j] ** 2 * component_rss(x, scores[:, [j]])[0] / (1 - (m + 1) / g) ** 2
            for j in range(scores.shape[1])
        )
        assert wgcv(elements[:m], cols, taus, scores, weights, spec) == pytest.approx(direct, rel=1e-12)
        assert model_dof(elements[:m], taus, spec) == m + 1


def test_wgcv_useless_column_strictly_increases():
    elements, cols, taus, scores, weights = _fixture()
    spec = PenaltySpec("wgcv", 500, 200)
    base = elements[:3]
    junk = Simple("GGGGG")
    cols = dict(cols)
    cols[junk.key] = np.ones(200)  # collinear with the intercept: zero RSS reduction
    taus = dict(taus, **{junk.key: 199})
    before = wgcv(base, cols, taus, scores, weights, spec)
    after = wgcv(base + [junk], cols, taus, scores, weights, spec)
    assert after > before


def test_wgcv_charges_knots_and_saturates():
    elements, cols, taus, scores, weights = _fixture()
    e = Composite(elements[0], elements[1], 30)
    cols = dict(cols, **{e.key: (cols[elements[0].key] > 0).astype(float)})
    taus = dict(taus, **{e.key: int(cols[e.key].sum())})
    spec = PenaltySpec("wgcv", 500, 200)
    assert model_dof([e], taus, spec) == pytest.approx(2 + knot_penalty_gamma(taus[e.key], 500, 200))
    tiny = PenaltySpec("wgcv", 500, 3)
    assert wgcv(elements[:3], cols, taus, scores[:3], weights, tiny) == math.inf


def test_wmbic_empty_is_exactly_zero():
    elements, cols, taus, scores, weights = _fixture()
    spec = PenaltySpec("wmbic", 500, 200)
    assert wmbic([], cols, taus, scores, weights, spec) == 0.0
    assert np.all(mbic_components([], cols, taus, scores, spec) == 0.0)


def test_wmbic_sign():
    rng = np.random.default_rng(3)
    g = 300
    useful = Simple("ACGT")
    noise = Simple("CCAT")
    x = rng.integers(0, 3, size=g).astype(float)
    cols = {useful.key: x, noise.key: rng.integers(0, 3, size=g).astype(float)}
    taus = {k: int(np.count_nonzero(v)) for k, v in cols.items()}
    u = x + 0.3 * rng.normal(size=g)
    u = (u - u.mean()) / np.linalg.norm(u - u.mean())
    spec = PenaltySpec("wmbic", 500, g)
    lam = np.array([2.0])
    assert wmbic([useful], cols, taus, u[:, None], lam, spec) < 0
    pure = rng.normal(size=g)
    pure = (pure - pure.mean()) / np.linalg.norm(pure - pure.mean())
    assert wmbic([noise], cols, taus, pure[:, None], lam, spec) > 0


def test_wmbic_tau_term_readings_differ_only_by_ln_g():
    rng = np.random.default_rng(4)
    g = 200
    a, b = Simple("AAAC"), Simple("CCGA")
    e1, e2 = Composite(a, b, 30), Composite(b, Simple("GATT"), 100)
    cols = {e.key: rng.integers(0, 2, size=g).astype(float) for e in (e1, e2)}
    taus = {k: int(v.sum()) for k, v in cols.items()}
    u = rng.normal(size=(g, 1))
    per = mbic_components([e1, e2], cols, taus, u, PenaltySpec("wmbic", 500, g, "per_element"))
    glob = mbic_components([e1, e2], cols, taus, u, PenaltySpec("wmbic", 500, g, "global"))
    assert per - glob == pytest.approx([math.log(g)])


@pytest.fixture(scope="module")
def forward():
    rng = np.random.default_rng(12)
    g = 300
    seqs = [random_seq(rng, 250) for _ in range(g)]
    index = SequenceIndex(seqs)
    x = index.feature(Simple("ACGTTG")).astype(float) + index.feature(Simple("CATGA")).astype(float)
    u = x + 0.3 * rng.normal(size=g)
    u = ((u - u.mean()) / np.linalg.norm(u - u.mean()))[:, None]
    words = ["ACGTTG", "CATGA", "GGTCA", "TTAGC", "AAGCT", "CCGTA", "GATCC"]
    model = build_model(words, [20, 100], 12, 2, u, np.array([2.0]), index)
    return model, u, np.array([2.0]), index


@pytest.mark.parametrize("kind", ["wgcv", "wmbic"])
def test_prune_curve_invariants(forward, kind):
    model, u, lam, index = forward
    spec = PenaltySpec(kind, 250, index.n_genes)
    curve = prune_backward(model, u, lam, spec)
    m_full = len(model.elements)
    expected_sizes = list(range(m_full, -1 if kind == "wmbic" else 0, -1))
    assert curve.sizes == expected_sizes
    for big, small in zip(curve.models, curve.models[1:]):
        assert set(e.key for e in small) < set(e.key for e in big)
        assert len(big) - len(small) == 1
    rss = [component_rss(model.design(index.n_genes, m), u)[0] for m in curve.models]
    assert all(b >= a * (1 - 1e-12) for a, b in zip(rss, rss[1:]))
    assert curve.lof[curve.sizes.index(curve.best_size)] == min(curve.lof)
    survivors = {e.key for e in curve.selected}
    assert {Simple("ACGTTG").key, Simple("CATGA").key} <= survivors
    ranked = curve.ranking()
    assert sorted(e.key for e in ranked) == sorted(e.key for e in model.elements)
    assert {e.key for e in ranked[: curve.best_size]} == survivors


def test_pure_noise_pruned_to_near_empty():
    rng = np.random.default_rng(21)
    g = 400
    seqs = [random_seq(rng, 200) for _ in range(g)]
    index = SequenceIndex(seqs)
    u = rng.normal(size=(g, 1))
    u = (u - u.mean()) / np.linalg.norm(u - u.mean())
    words = ["ACGTTG", "CATGA", "GGTCA", "TTAGC", "AAGCT", "CCGTA", "GATCC", "TTGCA"]
    model = build_model(words, [20, 100], 10, 2, u, np.array([2.0]), index)
    curve = prune_backward(model, u, np.array([2.0]), PenaltySpec("wmbic", 200, g))
    assert curve.best_size <= 1


def test_empty_forward_rejected():
    with pytest.raises(ValueError):
        prune_backward(ForwardModel(), np.zeros((3, 1)), np.ones(1), PenaltySpec("wgcv", 100, 3))


def test_paired_tau_term_matches_knot_penalty():
    # one order-1 pair: carrier and knot charges together equal gamma * ln(G) / 2
    rng = np.random.default_rng(8)
    g, r = 250, 400
    e = Composite(Simple("AAAC"), Simple("CCGA"), 30)
    col = rng.integers(0, 2, size=g).astype(float)
    cols, taus = {e.key: col}, {e.key: int(col.sum())}
    u = rng.normal(size=(g, 1))
    u = (u - u.mean()) / np.linalg.norm(u - u.mean())
    got = mbic_components([e], cols, taus, u, PenaltySpec("wmbic", r, g))[0]
    rss = component_rss(with_intercept(col, g), u)[0]
    from scipy.special import gammaln

    fit = 0.5 * g * math.log(1.0 / rss) + gammaln(g / 2) - gammaln((g + 1) / 2)
    assert got == pytest.approx(fit - knot_penalty_gamma(taus[e.key], r, g) * math.log(g) / 2, rel=1e-12)
