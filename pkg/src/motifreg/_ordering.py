from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

TIE_RTOL = 1e-12
CHUNK = 1024


def tie_aware_order(values, names, rtol: float = TIE_RTOL) -> list[int]:
    """Indices sorting ``values`` ascending; near-equal values ordered by ``names``.

    Values within ``rtol`` (relative) of the first member of a run count as
    tied, which keeps the order independent of last-bit floating noise.
    NaNs are dropped.
    """
    idx = [i for i in range(len(values)) if not math.isnan(values[i])]
    idx.sort(key=lambda i: (values[i], names[i]))
    out: list[int] = []
    k = 0
    while k < len(idx):
        head = values[idx[k]]
        tol = rtol * max(abs(head), 1e-300) if math.isfinite(head) else 0.0
        j = k + 1
        while j < len(idx) and (values[idx[j]] == head or values[idx[j]] - head <= tol):
            j += 1
        out.extend(sorted(idx[k:j], key=lambda i: names[i]))
        k = j
    return out


def chunked_columns(fn, matrix: np.ndarray, n_jobs: int = 1) -> np.ndarray:
    """Apply ``fn`` to fixed-width column blocks and concatenate the results.

    Block boundaries do not depend on ``n_jobs``, so per-column arithmetic is
    the same for any worker count.
    """
    n = matrix.shape[1]
    blocks = [(s, min(s + CHUNK, n)) for s in range(0, n, CHUNK)]
    if not blocks:
        return np.zeros(0)
    if n_jobs == 1 or len(blocks) == 1:
        parts = [fn(matrix[:, a:b]) for a, b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(lambda ab: fn(matrix[:, ab[0] : ab[1]]), blocks))
    return np.concatenate(parts)
