"""Least-squares kernels shared by dictionary building, forward selection
and pruning.

Every projection goes through a pivoted QR factorisation; columns whose
pivot falls below ``RANK_TOL`` times the leading one are treated as
linearly dependent and dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg, stats

RANK_TOL = 1e-10
DEGENERATE_TOL = 1e-8

_TINY_P = np.nextafter(0.0, 1.0)


class DegenerateCovariate(ValueError):
    """Covariate has (numerically) nothing left after residualisation."""


def with_intercept(columns, n: int) -> np.ndarray:
    """Design matrix ``[1, columns...]`` with ``n`` rows."""
    ones = np.ones((n, 1))
    if columns is None:
        return ones
    columns = np.asarray(columns, dtype=np.float64).reshape(n, -1)
    return np.hstack([ones, columns])


def orthonormal_basis(x: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the column space of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[1] == 0:
        return np.zeros((x.shape[0], 0))
    q, r, _ = linalg.qr(x, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return np.zeros((x.shape[0], 0))
    rank = int(np.count_nonzero(diag > RANK_TOL * diag[0]))
    return q[:, :rank]


def project_out(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``v`` minus its projection on the orthonormal columns ``q``."""
    if q.shape[1] == 0:
        return np.array(v, dtype=np.float64, copy=True)
    return v - q @ (q.T @ v)


def residualize(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Residual of ``v`` (vector or matrix of columns) after least squares on ``x``."""
    return project_out(orthonormal_basis(x), np.asarray(v, dtype=np.float64))


@dataclass
class FitResult:
    coefficients: np.ndarray
    residuals: np.ndarray
    rss: float
    rank: int


def least_squares(x: np.ndarray, y: np.ndarray) -> FitResult:
    x = np.asarray(x, dtype=np.float64)
    coef, _, rank, _ = linalg.lstsq(x, y, cond=RANK_TOL, lapack_driver="gelsy")
    resid = y - x @ coef
    return FitResult(coef, resid, float(resid @ resid), int(rank))


def is_degenerate(xi: np.ndarray) -> np.ndarray | bool:
    """True where a residualised covariate is too small to regress on."""
    xi = np.asarray(xi)
    limit = DEGENERATE_TOL * np.sqrt(xi.shape[0])
    return np.sqrt(np.einsum("i...,i...->...", xi, xi)) <= limit


def slope_t_statistics(r: np.ndarray, xi: np.ndarray, df: int) -> np.ndarray:
    """t statistics of the no-intercept slope of ``r`` on each column of ``xi``.

    Degenerate columns get ``nan``.
    """
    xi = np.asarray(xi, dtype=np.float64)
    if xi.ndim == 1:
        xi = xi[:, None]
    ss = np.einsum("ij,ij->j", xi, xi)
    cross = r @ xi
    rr = float(r @ r)
    bad = is_degenerate(xi)
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = cross / ss
        rss = np.maximum(rr - cross * beta, 0.0)
        se = np.sqrt(rss / df / ss)
        t = np.where(se > 0, beta / se, np.where(beta == 0, 0.0, np.sign(beta) * np.inf))
    t[bad] = np.nan
    return t


def t_pvalue(t, df: int):
    """Two-sided p-value, floored at the smallest positive double."""
    p = 2.0 * stats.t.sf(np.abs(t), df)
    return np.maximum(p, _TINY_P)


def slope_significance(r: np.ndarray, xi: np.ndarray, df: int) -> tuple[float, float]:
    """(t, two-sided p) of the univariate regression of ``r`` on ``xi``."""
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    if is_degenerate(np.asarray(xi, dtype=np.float64)):
        raise DegenerateCovariate("covariate is numerically zero")
    t = float(slope_t_statistics(r, xi, df)[0])
    return t, float(t_pvalue(t, df))


def component_rss(x: np.ndarray, scores: np.ndarray) -> np.ndarray:
    """Residual sum of squares of every score column regressed on ``x``."""
    res = residualize(x, scores)
    return np.einsum("ij,ij->j", res, res)


def weighted_loss(x: np.ndarray, scores: np.ndarray, weights: np.ndarray) -> float:
    """sum_j weight_j^2 * RSS_j for the design ``x`` (intercept included)."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim == 1:
        scores = scores[:, None]
    w = np.asarray(weights, dtype=np.float64)
    return float(np.sum(w**2 * component_rss(x, scores)))


def candidate_scores(xi: np.ndarray, residuals: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weighted loss after adding each residualised column of ``xi``.

    ``residuals`` are the current per-component residual vectors.  Degenerate
    columns score ``nan``.
    """
    xi = np.asarray(xi, dtype=np.float64)
    if xi.ndim == 1:
        xi = xi[:, None]
    w2 = np.asarray(weights, dtype=np.float64) ** 2
    base = float(np.sum(w2 * np.einsum("ij,ij->j", residuals, residuals)))
    ss = np.einsum("ij,ij->j", xi, xi)
    cross = residuals.T @ xi  # components x candidates
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = (w2[:, None] * cross**2).sum(axis=0) / ss
    out = base - gain
    out[is_degenerate(xi)] = np.nan
    return out


def candidate_score(xi: np.ndarray, residuals: np.ndarray, weights: np.ndarray) -> float:
    if is_degenerate(np.asarray(xi, dtype=np.float64)):
        raise DegenerateCovariate("candidate residualises to zero")
    return float(candidate_scores(xi, residuals, weights)[0])


def effect_curve(feature: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Pearson correlation of a feature column with every sample column of ``y``."""
    x = np.asarray(feature, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc = x - x.mean()
    if np.sqrt(xc @ xc) <= 1e-12 * max(1.0, np.abs(x).max()):
        raise ValueError("feature is constant across genes; correlation undefined")
    yc = y - y.mean(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = (xc @ yc) / (np.sqrt(xc @ xc) * np.sqrt(np.einsum("ij,ij->j", yc, yc)))
    return r
