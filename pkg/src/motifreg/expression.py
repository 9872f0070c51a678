"""Expression matrices and principal-component bases."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ExpressionError(ValueError):
    pass


@dataclass
class ExpressionMatrix:
    values: np.ndarray  # genes x samples
    gene_ids: list[str]
    sample_labels: list[str]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ExpressionError("expression values must be a 2-D matrix")
        g, t = self.values.shape
        if len(self.gene_ids) != g or len(self.sample_labels) != t:
            raise ExpressionError(
                f"labels do not match a {g}x{t} matrix "
                f"({len(self.gene_ids)} gene ids, {len(self.sample_labels)} sample labels)"
            )
        if not np.all(np.isfinite(self.values)):
            raise ExpressionError("expression matrix contains non-finite values")

    @property
    def shape(self):
        return self.values.shape

    def take_genes(self, order) -> "ExpressionMatrix":
        """Rows permuted by integer index array ``order``."""
        order = np.asarray(order)
        return ExpressionMatrix(
            self.values[order], [self.gene_ids[i] for i in order], list(self.sample_labels)
        )


def standardize_samples(y: ExpressionMatrix) -> ExpressionMatrix:
    """Center and scale each sample column to mean 0, population variance 1."""
    v = y.values
    if v.shape[0] < 2:
        raise ExpressionError("need at least two genes to standardize")
    mean = v.mean(axis=0)
    sd = v.std(axis=0)
    scale = np.maximum(np.abs(mean), 1.0)
    for t, s in enumerate(sd):
        if s <= 1e-12 * scale[t]:
            raise ExpressionError(f"sample {y.sample_labels[t]!r} is constant across genes")
    return ExpressionMatrix((v - mean) / sd, list(y.gene_ids), list(y.sample_labels))


@dataclass
class BasisSet:
    """Chosen principal directions and the derived response vectors.

    ``selected`` holds 1-based component numbers.  ``weights[k]`` is the
    squared norm of ``Y @ vectors[k]`` and ``scores[:, k]`` its unit-norm
    version; ``singular_values`` covers every component (the scree data).
    """

    selected: list[int]
    vectors: np.ndarray  # samples x |A|
    weights: np.ndarray  # |A|
    scores: np.ndarray  # genes x |A|
    singular_values: np.ndarray
    loadings: np.ndarray = field(repr=False)  # every right singular vector, samples x r


def _fix_signs(vt: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vt), axis=1)
    signs = np.sign(vt[np.arange(vt.shape[0]), idx])
    signs[signs == 0] = 1.0
    return vt * signs[:, None]


def compute_svd_basis(y: ExpressionMatrix, components=None, top_k: int | None = None) -> BasisSet:
    """Right singular vectors of ``y`` as a regression basis.

    Pick either explicit 1-based ``components`` or the ``top_k`` leading
    ones.  Each vector is sign-flipped so that its largest-magnitude entry
    is positive.
    """
    if (components is None) == (top_k is None):
        raise ValueError("give exactly one of components or top_k")
    values = y.values
    _, s, vt = np.linalg.svd(values, full_matrices=False)
    vt = _fix_signs(vt)
    n_samples = values.shape[1]
    if top_k is not None:
        if not 1 <= top_k <= n_samples:
            raise ValueError(f"top_k must be in 1..{n_samples}, got {top_k}")
        components = list(range(1, top_k + 1))
    components = [int(c) for c in components]
    if not components:
        raise ValueError("no components selected")
    for c in components:
        if not 1 <= c <= len(s):
            raise ValueError(f"component {c} out of range 1..{len(s)}")
    if len(set(components)) != len(components):
        raise ValueError(f"duplicate components in {components}")
    vectors = vt[[c - 1 for c in components]].T
    proj = values @ vectors
    weights = np.einsum("ij,ij->j", proj, proj)
    tiny = 1e-12 * max(float(s[0]) ** 2, 1e-300)
    for c, w in zip(components, weights):
        if w <= tiny:
            raise ExpressionError(f"component {c} has zero variance")
    scores = proj / np.sqrt(weights)
    return BasisSet(components, vectors, weights, scores, s, vt.T)


def variance_explained(basis: BasisSet) -> np.ndarray:
    """Fraction of total variance carried by every component."""
    lam = basis.singular_values**2
    return lam / lam.sum()
