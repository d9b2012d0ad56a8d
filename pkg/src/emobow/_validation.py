"""Input validation helpers shared by the estimators."""

import numpy as np
import scipy.sparse as sp


def check_count_matrix(X) -> sp.csr_matrix:
    """Return ``X`` as a canonical float64 CSR matrix of non-negative finite counts."""
    if sp.issparse(X):
        X = sp.csr_matrix(X, dtype=np.float64)
    else:
        arr = np.asarray(X, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D count matrix, got shape {arr.shape}")
        X = sp.csr_matrix(arr)
    if not X.has_canonical_format or (X.nnz and not X.data.all()):
        X = X.copy()
        X.sum_duplicates()
        X.eliminate_zeros()
    if X.nnz and (not np.all(np.isfinite(X.data)) or X.data.min() < 0):
        raise ValueError("count matrix must hold finite non-negative values")
    return X


def check_labels(y, n_samples: int) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1:
        y = y.reshape(-1)
    if len(y) != n_samples:
        raise ValueError(f"{n_samples} samples but {len(y)} labels")
    if n_samples == 0:
        raise ValueError("cannot fit on zero samples")
    return y
