"""Closed forms for the orthogonal group embedded in n-by-n matrix space.

Points are matrices with orthonormal columns, flattened column-major when an
ambient vector is needed. The constraint set has one half-squared-norm
constraint per column and one inner-product constraint per column pair; the
tangent frame columns are the flattened products of the point with a signed
two-index skew basis. The frame Gram is twice the identity, the frame
projector is the identity minus a block reflection matrix built from column
outer products, and the Laplace-Beltrami value of any prolonged field
reduces to three traces. Worked closed forms cover the first trace power
sums, their squares, and the Brockett cost.
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass

import numpy as np

from .constraint_core import (
    AdaptedFrame,
    ConstraintSet,
    LaplacianReport,
    ScalarField,
)
from .errors import ContractError, DimensionError, DomainError
from .numkit import DEFAULT_TOLERANCES, as_matrix, as_vector, unvec, vec


@dataclass(frozen=True)
class OrthogonalPoint:
    """An n-by-n matrix with orthonormal columns, validated on construction.

    ``max |U^t U - I|`` must not exceed ``tol`` (default: the orthogonality
    tolerance). Near-orthogonal input is rejected, never re-orthonormalized.
    """

    matrix: np.ndarray
    tol: InitVar[float | None] = None

    def __post_init__(self, tol):
        matrix = as_matrix(self.matrix, "orthogonal point")
        object.__setattr__(self, "matrix", matrix)
        r, c = matrix.shape
        if r != c:
            raise DimensionError(f"orthogonal points must be square, got {r}x{c}")
        if r < 2:
            raise DimensionError("orthogonal points need n >= 2")
        tol = DEFAULT_TOLERANCES.orthogonality if tol is None else tol
        residual = float(np.max(np.abs(matrix.T @ matrix - np.eye(r))))
        if residual > tol:
            raise DomainError(
                f"matrix is not orthogonal: max |U^t U - I| = {residual:.6g} "
                f"exceeds tolerance {tol:.6g}",
                residual=residual,
            )

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def column(self, i: int) -> np.ndarray:
        return self.matrix[:, i].copy()

    def to_vector(self) -> np.ndarray:
        return vec(self.matrix)


def index_pairs(n: int) -> tuple:
    """All index pairs (a, b) with a < b, in lexicographic order."""
    if n < 2:
        raise DimensionError(f"index pairs need n >= 2, got {n}")
    return tuple((a, b) for a in range(n) for b in range(a + 1, n))


def pair_sign(a: int, b: int) -> float:
    """Alternating sign (-1)^(a+b) attached to the pair (a, b)."""
    return -1.0 if (a + b) % 2 else 1.0


def theta_basis(n: int) -> list:
    """Signed skew basis: (-1)^(a+b) (e_b e_a^t - e_a e_b^t) per pair (a, b)."""
    mats = []
    for a, b in index_pairs(n):
        M = np.zeros((n, n))
        s = pair_sign(a, b)
        M[b, a] = s
        M[a, b] = -s
        mats.append(M)
    return mats


def _column_constraint(n: int, a: int) -> ScalarField:
    dim = n * n
    sl = slice(a * n, (a + 1) * n)  # block a of the vector is column a

    def value(u):
        col = u[sl]
        return 0.5 * float(col @ col)

    def gradient(u):
        g = np.zeros(dim)
        g[sl] = u[sl]
        return g

    def hessian(u):
        H = np.zeros((dim, dim))
        H[sl, sl] = np.eye(n)
        return H

    return ScalarField(dim=dim, value_fn=value, gradient_fn=gradient, hessian_fn=hessian)


def _pair_constraint(n: int, b: int, c: int) -> ScalarField:
    dim = n * n
    sb = slice(b * n, (b + 1) * n)
    sc = slice(c * n, (c + 1) * n)

    def value(u):
        return float(u[sb] @ u[sc])

    def gradient(u):
        g = np.zeros(dim)
        g[sb] = u[sc]
        g[sc] = u[sb]
        return g

    def hessian(u):
        H = np.zeros((dim, dim))
        H[sb, sc] = np.eye(n)
        H[sc, sb] = np.eye(n)
        return H

    return ScalarField(dim=dim, value_fn=value, gradient_fn=gradient, hessian_fn=hessian)


def on_constraint_set(n: int) -> ConstraintSet:
    """Constraints cutting the orthogonal group out of matrix space.

    Order: half-squared-norm constraints for every column (regular value
    1/2), then inner-product constraints for every pair (regular value 0)
    in lexicographic order.
    """
    if n < 2:
        raise DimensionError(f"orthogonal constraint sets need n >= 2, got {n}")
    fields = [_column_constraint(n, a) for a in range(n)]
    fields.extend(_pair_constraint(n, b, c) for b, c in index_pairs(n))
    values = np.concatenate([np.full(n, 0.5), np.zeros(len(fields) - n)])
    return ConstraintSet(ambient_dim=n * n, fields=tuple(fields), regular_value=values)


def on_frame(point: OrthogonalPoint) -> np.ndarray:
    """Tangent frame with one column per index pair, lexicographic order.

    Column (a, b) is the flattening of U Theta_ab, which has sign * u_b in
    column a and -sign * u_a in column b and zeros elsewhere.
    """
    n = point.n
    U = point.matrix
    pairs = index_pairs(n)
    T = np.zeros((n * n, len(pairs)))
    for idx, (a, b) in enumerate(pairs):
        s = pair_sign(a, b)
        T[a * n : (a + 1) * n, idx] = s * U[:, b]
        T[b * n : (b + 1) * n, idx] = -s * U[:, a]
    return T


def on_adapted_frame(tol: float | None = None) -> AdaptedFrame:
    """AdaptedFrame wrapping :func:`on_frame` for the general evaluator."""

    def provider(u: np.ndarray) -> np.ndarray:
        n = math.isqrt(u.size)
        if n * n != u.size:
            raise DimensionError(
                f"point length {u.size} is not a square matrix flattening"
            )
        return on_frame(OrthogonalPoint(unvec(u, n), tol=tol))

    return AdaptedFrame(provider=provider)


_LAMBDA_MAX_N = 16


def lambda_of(point: OrthogonalPoint) -> np.ndarray:
    """The block reflection matrix: block (i, j) is outer(u_j, u_i).

    Symmetric involution with trace n; materialized only for n <= 16.
    """
    n = point.n
    if n > _LAMBDA_MAX_N:
        raise DimensionError(
            f"lambda_of materializes an n^2 x n^2 matrix; refusing n = {n} > {_LAMBDA_MAX_N}"
        )
    U = point.matrix
    L = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            L[i * n : (i + 1) * n, j * n : (j + 1) * n] = np.outer(U[:, j], U[:, i])
    return L


def trace_lambda_product(point: OrthogonalPoint, H) -> float:
    """tr(Lambda(U) H) contracted blockwise, without materializing Lambda.

    Sums u_i^t H[block j, block i] u_j over all block index pairs.
    """
    n = point.n
    H = as_matrix(H, "hessian")
    if H.shape != (n * n, n * n):
        raise DimensionError(
            f"hessian has shape {H.shape}, expected {(n * n, n * n)}"
        )
    Hr = H.reshape(n, n, n, n)
    return float(np.einsum("pi,jpiq,qj->", point.matrix, Hr, point.matrix))


def sigma_matrix(f: ScalarField, point: OrthogonalPoint) -> np.ndarray:
    """Multiplier matrix (G^t U + U^t G) / 2 with G the gradient in matrix
    form; diagonal entries are the column-constraint multipliers,
    off-diagonal entries the pair-constraint multipliers."""
    n = point.n
    if f.dim != n * n:
        raise DimensionError(
            f"field dimension {f.dim} does not match matrix space {n * n}"
        )
    G = unvec(f.gradient(point.to_vector()), n)
    U = point.matrix
    return 0.5 * (G.T @ U + U.T @ G)


def pack_sigma(S, n: int) -> np.ndarray:
    """Flatten a multiplier matrix in constraint order: diagonal entries,
    then off-diagonal entries per lexicographic pair."""
    S = as_matrix(S, "sigma matrix")
    if S.shape != (n, n):
        raise DimensionError(f"sigma matrix has shape {S.shape}, expected {(n, n)}")
    diag = [float(S[a, a]) for a in range(n)]
    off = [float(S[b, c]) for b, c in index_pairs(n)]
    return np.array(diag + off)


def on_laplacian(f: ScalarField, point: OrthogonalPoint) -> LaplacianReport:
    """Laplace-Beltrami value of ``f`` on the orthogonal group, with
    diagnostics.

    The value is half the ambient Laplacian, minus (n-1)/2 times the trace
    of U^t times the gradient in matrix form, minus half the blockwise
    Lambda-Hessian trace. The frame Gram is exactly twice the identity, so
    its condition is reported as 1.
    """
    n = point.n
    if f.dim != n * n:
        raise DimensionError(
            f"field dimension {f.dim} does not match matrix space {n * n}"
        )
    u = point.to_vector()
    H = f.hessian(u)
    lam_trace = trace_lambda_product(point, H)
    trace_main = 0.5 * (float(np.trace(H)) - lam_trace)
    S = sigma_matrix(f, point)
    sigma = pack_sigma(S, n)
    pair_count = len(index_pairs(n))
    trace_constraint = np.concatenate(
        [np.full(n, (n - 1) / 2.0), np.zeros(pair_count)]
    )
    return LaplacianReport.assemble(
        trace_main=trace_main,
        sigma=sigma,
        trace_constraint=trace_constraint,
        frame_gram_condition=1.0,
    )


def _check_square(A, n: int | None = None, name: str = "matrix") -> np.ndarray:
    A = as_matrix(A, name)
    r, c = A.shape
    if r != c:
        raise DimensionError(f"{name} must be square, got {r}x{c}")
    if n is not None and r != n:
        raise DimensionError(f"{name} is {r}x{c}, expected {n}x{n}")
    return A


def p1_field(A) -> ScalarField:
    """tr(A U) as a field on matrix space: gradient A^t, Hessian zero."""
    A = _check_square(A, name="coefficient matrix")
    n = A.shape[0]
    dim = n * n
    grad = vec(A.T)

    def value(u):
        return float(np.trace(A @ unvec(u, n)))

    return ScalarField(
        dim=dim,
        value_fn=value,
        gradient_fn=lambda u: grad.copy(),
        hessian_fn=lambda u: np.zeros((dim, dim)),
    )


def p11_field(A) -> ScalarField:
    """tr(A U)^2 as a field: gradient 2 tr(A U) vec(A^t), constant Hessian
    2 vec(A^t) vec(A^t)^t."""
    A = _check_square(A, name="coefficient matrix")
    n = A.shape[0]
    dim = n * n
    w = vec(A.T)
    H = 2.0 * np.outer(w, w)

    def value(u):
        return float(np.trace(A @ unvec(u, n))) ** 2

    def gradient(u):
        return 2.0 * float(np.trace(A @ unvec(u, n))) * w

    return ScalarField(
        dim=dim, value_fn=value, gradient_fn=gradient, hessian_fn=lambda u: H.copy()
    )


def p2_field(A) -> ScalarField:
    """tr((A U)^2) as a field: gradient 2 vec(A^t U^t A^t), constant Hessian
    with block (i, j) equal to 2 outer(b_j, b_i), B = A^t."""
    A = _check_square(A, name="coefficient matrix")
    n = A.shape[0]
    dim = n * n
    B = A.T
    H = np.zeros((dim, dim))
    for i in range(n):
        for j in range(n):
            H[i * n : (i + 1) * n, j * n : (j + 1) * n] = 2.0 * np.outer(B[:, j], B[:, i])

    def value(u):
        AU = A @ unvec(u, n)
        return float(np.trace(AU @ AU))

    def gradient(u):
        U = unvec(u, n)
        return vec(2.0 * (B @ U.T @ B))

    return ScalarField(
        dim=dim, value_fn=value, gradient_fn=gradient, hessian_fn=lambda u: H.copy()
    )


def brockett_field(A, diagonal) -> ScalarField:
    """tr(U^t A U N) with symmetric A and N = diag(diagonal): gradient
    2 A U N, constant Hessian 2 kron(N, A)."""
    A = _check_square(A, name="coefficient matrix")
    n = A.shape[0]
    mu = as_vector(diagonal, "diagonal")
    if mu.size != n:
        raise DimensionError(
            f"diagonal has length {mu.size}, expected {n}"
        )
    scale = max(1.0, float(np.max(np.abs(A))))
    asym = float(np.max(np.abs(A - A.T)))
    if asym > DEFAULT_TOLERANCES.equality * scale:
        raise ContractError(
            f"coefficient matrix must be symmetric: max |A - A^t| = {asym:.3e}"
        )
    dim = n * n
    H = 2.0 * np.kron(np.diag(mu), A)

    def value(u):
        U = unvec(u, n)
        return float(np.trace(U.T @ A @ U @ np.diag(mu)))

    def gradient(u):
        U = unvec(u, n)
        return vec(2.0 * (A @ U) * mu[None, :])

    return ScalarField(
        dim=dim, value_fn=value, gradient_fn=gradient, hessian_fn=lambda u: H.copy()
    )


def p1_laplacian(A, point: OrthogonalPoint) -> float:
    """Closed form: -(n-1)/2 times tr(A U)."""
    A = _check_square(A, point.n, "coefficient matrix")
    return -(point.n - 1) / 2.0 * float(np.trace(A @ point.matrix))


def p11_laplacian(A, point: OrthogonalPoint) -> float:
    """Closed form: tr(A A^t) - (n-1) tr(A U)^2 - tr((A U)^2)."""
    A = _check_square(A, point.n, "coefficient matrix")
    AU = A @ point.matrix
    p11 = float(np.trace(AU)) ** 2
    p2 = float(np.trace(AU @ AU))
    return float(np.trace(A @ A.T)) - (point.n - 1) * p11 - p2


def p2_laplacian(A, point: OrthogonalPoint) -> float:
    """Closed form: tr(A A^t) - (n-1) tr((A U)^2) - tr(A U)^2."""
    A = _check_square(A, point.n, "coefficient matrix")
    AU = A @ point.matrix
    p11 = float(np.trace(AU)) ** 2
    p2 = float(np.trace(AU @ AU))
    return float(np.trace(A @ A.T)) - (point.n - 1) * p2 - p11


def brockett_laplacian(A, diagonal, point: OrthogonalPoint) -> float:
    """Closed form for tr(U^t A U N), N = diag(diagonal), symmetric A:
    -(n-1) tr(U^t A U N) + tr(N) tr(A) - tr(U N U^t A)."""
    n = point.n
    A = _check_square(A, n, "coefficient matrix")
    mu = as_vector(diagonal, "diagonal")
    if mu.size != n:
        raise DimensionError(f"diagonal has length {mu.size}, expected {n}")
    scale = max(1.0, float(np.max(np.abs(A))))
    asym = float(np.max(np.abs(A - A.T)))
    if asym > DEFAULT_TOLERANCES.equality * scale:
        raise ContractError(
            f"coefficient matrix must be symmetric: max |A - A^t| = {asym:.3e}"
        )
    U = point.matrix
    value = float(np.trace(U.T @ A @ U @ np.diag(mu)))
    correction = float(np.trace((U * mu[None, :]) @ U.T @ A))
    return -(n - 1) * value + float(np.sum(mu)) * float(np.trace(A)) - correction


def random_orthogonal(n: int, seed) -> OrthogonalPoint:
    """Deterministic random orthogonal matrix: QR of a seeded Gaussian
    matrix with the R-diagonal sign fix."""
    if n < 2:
        raise DimensionError(f"random orthogonal matrices need n >= 2, got {n}")
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    while True:
        M = rng.standard_normal((n, n))
        Q, R = np.linalg.qr(M)
        d = np.diag(R)
        if np.min(np.abs(d)) < 1e-9:
            continue  # degenerate draw; the sign fix needs nonzero diagonal
        return OrthogonalPoint(Q * np.sign(d)[None, :])
