"""Dense linear-algebra primitives shared by every other module.

Column-major vectorization, Gram matrices, SPD solves, and the left
Moore-Penrose inverse, together with the package-wide tolerance record.
Everything is dense float64; matrices that should be symmetric positive
definite are solved by Cholesky factorization, never by SVD, and
ill-conditioning is reported instead of regularized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DimensionError, FactorizationError, SingularityError


@dataclass(frozen=True)
class Tolerances:
    """Numeric thresholds used across the package.

    equality        max-abs tolerance for identities that hold exactly in
                    real arithmetic (default 1e-10)
    orthogonality   admission tolerance for near-orthogonal matrices
                    (default 1e-8)
    fd_oracle       tolerance when comparing against finite-difference
                    oracles at their default step (default 1e-4)
    on_manifold     max-abs constraint residual admitted as "on the
                    manifold" (default 1e-8)
    condition_limit largest acceptable condition number for a frame Gram
                    matrix before the solve is refused (default 1e12)
    chart_margin    |x_j| >= chart_margin * R is required of a sphere
                    chart's excluded coordinate (default 1e-8)
    """

    equality: float = 1e-10
    orthogonality: float = 1e-8
    fd_oracle: float = 1e-4
    on_manifold: float = 1e-8
    condition_limit: float = 1e12
    chart_margin: float = 1e-8


DEFAULT_TOLERANCES = Tolerances()


def as_vector(v, name: str = "vector") -> np.ndarray:
    """Validate and return ``v`` as a finite 1-D float64 array."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise DimensionError(f"{name} contains non-finite entries")
    return arr


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Validate and return ``M`` as a finite 2-D float64 array."""
    arr = np.asarray(M, dtype=float)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise DimensionError(f"{name} contains non-finite entries")
    return arr


def vec(M) -> np.ndarray:
    """Stack the columns of a square matrix into one vector.

    vec(M)[j*n + i] == M[i, j] for an n-by-n input.
    """
    arr = as_matrix(M, "vec input")
    n, m = arr.shape
    if n != m:
        raise DimensionError(f"vec expects a square matrix, got {n}x{m}")
    return arr.reshape(-1, order="F").copy()


def unvec(v, n: int) -> np.ndarray:
    """Inverse of :func:`vec`: rebuild the n-by-n matrix from its columns."""
    arr = as_vector(v, "unvec input")
    if n <= 0:
        raise DimensionError(f"unvec needs a positive side length, got {n}")
    if arr.size != n * n:
        raise DimensionError(
            f"unvec expects a vector of length {n * n}, got {arr.size}"
        )
    return arr.reshape((n, n), order="F").copy()


def gram(rows: Sequence, cols: Sequence) -> np.ndarray:
    """Matrix of inner products: entry (i, j) is <rows[i], cols[j]>."""
    row_list = [as_vector(r, f"gram rows[{i}]") for i, r in enumerate(rows)]
    col_list = [as_vector(c, f"gram cols[{j}]") for j, c in enumerate(cols)]
    if not row_list or not col_list:
        raise DimensionError("gram needs at least one row and one column vector")
    dim = row_list[0].size
    for i, r in enumerate(row_list):
        if r.size != dim:
            raise DimensionError(f"gram rows[{i}] has length {r.size}, expected {dim}")
    for j, c in enumerate(col_list):
        if c.size != dim:
            raise DimensionError(f"gram cols[{j}] has length {c.size}, expected {dim}")
    R = np.stack(row_list)
    C = np.stack(col_list)
    return R @ C.T


def sym_condition(A) -> float:
    """Condition estimate (ratio of extreme eigenvalues) of a symmetric matrix.

    Returns ``inf`` when the matrix is not numerically positive definite.
    """
    arr = as_matrix(A, "sym_condition input")
    if arr.shape[0] != arr.shape[1]:
        raise DimensionError("sym_condition expects a square matrix")
    w = np.linalg.eigvalsh((arr + arr.T) / 2.0)
    if w[0] <= 0.0:
        return float("inf")
    return float(w[-1] / w[0])


def solve_spd(A, B, sym_tol: float | None = None) -> np.ndarray:
    """Solve A X = B for symmetric positive definite A by Cholesky.

    ``A`` must be symmetric to ``sym_tol`` (scaled by its magnitude); it is
    symmetrized before factorization. Raises FactorizationError when the
    Cholesky factorization fails.
    """
    A = as_matrix(A, "solve_spd A")
    n, m = A.shape
    if n != m:
        raise DimensionError(f"solve_spd expects a square A, got {n}x{m}")
    B_arr = np.asarray(B, dtype=float)
    b_was_vector = B_arr.ndim == 1
    if b_was_vector:
        B_arr = B_arr[:, None]
    B_arr = as_matrix(B_arr, "solve_spd B")
    if B_arr.shape[0] != n:
        raise DimensionError(
            f"solve_spd B has {B_arr.shape[0]} rows, expected {n}"
        )
    tol = DEFAULT_TOLERANCES.equality if sym_tol is None else sym_tol
    scale = max(1.0, float(np.max(np.abs(A))))
    asym = float(np.max(np.abs(A - A.T)))
    if asym > tol * scale:
        raise DimensionError(
            f"solve_spd A is not symmetric: max |A - A^T| = {asym:.3e}"
        )
    A_sym = (A + A.T) / 2.0
    try:
        factor = cho_factor(A_sym, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(
            f"Cholesky factorization failed: {exc}"
        ) from exc
    X = cho_solve(factor, B_arr, check_finite=False)
    return X[:, 0] if b_was_vector else X


def left_moore_penrose(T, condition_limit: float | None = None) -> np.ndarray:
    """Left Moore-Penrose inverse (T^t T)^{-1} T^t of a tall full-rank matrix.

    The r-by-r Gram matrix T^t T is required to be well conditioned
    (condition estimate at most ``condition_limit``, default 1e12); the
    inverse is applied through one SPD solve. Rank-deficient or
    ill-conditioned input raises SingularityError carrying the estimate.
    """
    T = as_matrix(T, "left_moore_penrose input")
    m, r = T.shape
    if r > m:
        raise DimensionError(
            f"left_moore_penrose expects at least as many rows as columns, got {m}x{r}"
        )
    limit = DEFAULT_TOLERANCES.condition_limit if condition_limit is None else condition_limit
    G = T.T @ T
    cond = sym_condition(G)
    if not np.isfinite(cond) or cond > limit:
        raise SingularityError(
            f"Gram matrix condition {cond:.3e} exceeds limit {limit:.3e}",
            condition=cond,
        )
    return solve_spd(G, T.T)


def matrix_to_json(M) -> dict:
    """JSON-ready form of a dense matrix: column-major data with shape."""
    arr = as_matrix(M, "matrix_to_json input")
    r, c = arr.shape
    return {
        "rows": int(r),
        "cols": int(c),
        "data": [float(x) for x in arr.reshape(-1, order="F")],
    }


def matrix_from_json(obj) -> np.ndarray:
    """Rebuild a dense matrix from its JSON form (see :func:`matrix_to_json`)."""
    if not isinstance(obj, dict):
        raise DimensionError("matrix JSON must be an object with rows/cols/data")
    missing = {"rows", "cols", "data"} - set(obj)
    if missing:
        raise DimensionError(f"matrix JSON missing keys: {sorted(missing)}")
    r, c = obj["rows"], obj["cols"]
    if not (isinstance(r, int) and isinstance(c, int)) or r <= 0 or c <= 0:
        raise DimensionError("matrix JSON rows/cols must be positive integers")
    data = obj["data"]
    if len(data) != r * c:
        raise DimensionError(
            f"matrix JSON data has {len(data)} entries, expected {r * c}"
        )
    flat = as_vector(data, "matrix JSON data")
    return flat.reshape((r, c), order="F").copy()
