"""Scalar fields, constraint sets, adapted frames, and the general
ambient-coordinate Laplace-Beltrami evaluator.

A manifold is described implicitly as the level set of finitely many scalar
constraints on Euclidean space. Given a scalar field prolonged to the
ambient space, its Laplace-Beltrami value at an on-manifold point is the
trace of the tangentially projected Hessian minus a multiplier-weighted sum
of projected constraint Hessians; the multipliers solve one SPD system built
from constraint-gradient inner products. The operator follows the trace
sign convention: it is negative on sphere harmonics.

Points are taken exactly as given. Off-manifold points are rejected with
their residual, ill-conditioned frames are rejected with their condition
estimate, and nothing is projected or regularized behind the caller's back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import numkit
from .errors import (
    ContractError,
    DimensionError,
    DomainError,
    FactorizationError,
    RegularityError,
    SingularityError,
)
from .numkit import DEFAULT_TOLERANCES, Tolerances, as_matrix, as_vector


@dataclass(frozen=True)
class ScalarField:
    """A scalar function on R^m with first and second derivatives.

    ``provenance`` records where the derivatives come from: "analytic" for
    closed forms, "finite-difference(h=...)" for difference quotients, or
    another label for externally supplied data. Derivative-hygiene checks
    only accept analytic fields.
    """

    dim: int
    value_fn: Callable[[np.ndarray], float]
    gradient_fn: Callable[[np.ndarray], np.ndarray]
    hessian_fn: Callable[[np.ndarray], np.ndarray]
    provenance: str = "analytic"

    def __post_init__(self):
        if self.dim <= 0:
            raise DimensionError(f"ScalarField dim must be positive, got {self.dim}")

    @property
    def is_analytic(self) -> bool:
        return self.provenance == "analytic"

    def _check_point(self, u) -> np.ndarray:
        u = as_vector(u, "evaluation point")
        if u.size != self.dim:
            raise DimensionError(
                f"point has dimension {u.size}, field expects {self.dim}"
            )
        return u

    def value(self, u) -> float:
        u = self._check_point(u)
        val = float(self.value_fn(u))
        if not math.isfinite(val):
            raise DomainError("field value is not finite")
        return val

    def gradient(self, u) -> np.ndarray:
        u = self._check_point(u)
        g = as_vector(self.gradient_fn(u), "gradient")
        if g.size != self.dim:
            raise DimensionError(
                f"gradient has dimension {g.size}, expected {self.dim}"
            )
        return g

    def hessian(self, u) -> np.ndarray:
        u = self._check_point(u)
        H = as_matrix(self.hessian_fn(u), "hessian")
        if H.shape != (self.dim, self.dim):
            raise DimensionError(
                f"hessian has shape {H.shape}, expected {(self.dim, self.dim)}"
            )
        scale = max(1.0, float(np.max(np.abs(H))))
        asym = float(np.max(np.abs(H - H.T)))
        if asym > DEFAULT_TOLERANCES.equality * scale:
            raise ContractError(
                f"hessian is not symmetric: max |H - H^T| = {asym:.3e}"
            )
        return H

    # -- field arithmetic ---------------------------------------------------
    # Sums, scalar multiples, and products are themselves scalar fields with
    # exact derivative rules; they let callers build combinations such as
    # f + (F - c) * g without touching the callables by hand.

    def _combined_provenance(self, other: "ScalarField") -> str:
        if self.is_analytic and other.is_analytic:
            return "analytic"
        return self.provenance if not self.is_analytic else other.provenance

    def __add__(self, other):
        if isinstance(other, ScalarField):
            if other.dim != self.dim:
                raise DimensionError("field dimensions differ")
            f, g = self, other
            return ScalarField(
                dim=self.dim,
                value_fn=lambda u: f.value_fn(u) + g.value_fn(u),
                gradient_fn=lambda u: np.asarray(f.gradient_fn(u)) + np.asarray(g.gradient_fn(u)),
                hessian_fn=lambda u: np.asarray(f.hessian_fn(u)) + np.asarray(g.hessian_fn(u)),
                provenance=f._combined_provenance(g),
            )
        if isinstance(other, (int, float)):
            c = float(other)
            f = self
            return ScalarField(
                dim=self.dim,
                value_fn=lambda u: f.value_fn(u) + c,
                gradient_fn=f.gradient_fn,
                hessian_fn=f.hessian_fn,
                provenance=f.provenance,
            )
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return self * (-1.0)

    def __sub__(self, other):
        if isinstance(other, ScalarField):
            return self + (-other)
        if isinstance(other, (int, float)):
            return self + (-float(other))
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            if other.dim != self.dim:
                raise DimensionError("field dimensions differ")
            f, g = self, other

            def prod_value(u):
                return f.value_fn(u) * g.value_fn(u)

            def prod_gradient(u):
                fv, gv = f.value_fn(u), g.value_fn(u)
                return gv * np.asarray(f.gradient_fn(u)) + fv * np.asarray(g.gradient_fn(u))

            def prod_hessian(u):
                fv, gv = f.value_fn(u), g.value_fn(u)
                fg = np.asarray(f.gradient_fn(u))
                gg = np.asarray(g.gradient_fn(u))
                cross = np.outer(fg, gg)
                return (
                    gv * np.asarray(f.hessian_fn(u))
                    + fv * np.asarray(g.hessian_fn(u))
                    + cross
                    + cross.T
                )

            return ScalarField(
                dim=self.dim,
                value_fn=prod_value,
                gradient_fn=prod_gradient,
                hessian_fn=prod_hessian,
                provenance=f._combined_provenance(g),
            )
        if isinstance(other, (int, float)):
            a = float(other)
            f = self
            return ScalarField(
                dim=self.dim,
                value_fn=lambda u: a * f.value_fn(u),
                gradient_fn=lambda u: a * np.asarray(f.gradient_fn(u)),
                hessian_fn=lambda u: a * np.asarray(f.hessian_fn(u)),
                provenance=f.provenance,
            )
        return NotImplemented

    __rmul__ = __mul__


def constant_field(dim: int, value: float) -> ScalarField:
    """The constant function on R^dim."""
    c = float(value)
    return ScalarField(
        dim=dim,
        value_fn=lambda u: c,
        gradient_fn=lambda u: np.zeros(dim),
        hessian_fn=lambda u: np.zeros((dim, dim)),
    )


def linear_field(coefficients) -> ScalarField:
    """The linear function u -> <c, u>."""
    c = as_vector(coefficients, "coefficients")
    dim = c.size
    return ScalarField(
        dim=dim,
        value_fn=lambda u: float(c @ u),
        gradient_fn=lambda u: c.copy(),
        hessian_fn=lambda u: np.zeros((dim, dim)),
    )


def polynomial_field(dim: int, terms: Sequence) -> ScalarField:
    """A polynomial sum(coeff * prod(u_i ** powers_i)) with exact derivatives.

    ``terms`` is a sequence of (coeff, powers) pairs; each ``powers`` entry
    is a length-``dim`` sequence of non-negative integers.
    """
    if dim <= 0:
        raise DimensionError("polynomial dim must be positive")
    coeffs = []
    powers = []
    for idx, term in enumerate(terms):
        try:
            c, p = term
        except (TypeError, ValueError) as exc:
            raise ContractError(f"term {idx} is not a (coeff, powers) pair") from exc
        p = np.asarray(p, dtype=int)
        if p.ndim != 1 or p.size != dim:
            raise DimensionError(
                f"term {idx} powers must have length {dim}, got shape {p.shape}"
            )
        if np.any(p < 0):
            raise ContractError(f"term {idx} has a negative exponent")
        coeffs.append(float(c))
        powers.append(p)
    if not coeffs:
        return constant_field(dim, 0.0)
    C = np.asarray(coeffs)
    P = np.stack(powers)  # (t, dim) exponent rows

    def _monomials(u, expo):
        # numpy evaluates 0.0 ** 0 as 1.0, which is the convention needed here
        return np.prod(u[None, :] ** expo, axis=1)

    def value(u):
        return float(C @ _monomials(u, P))

    def gradient(u):
        g = np.zeros(dim)
        for i in range(dim):
            mask = P[:, i] > 0
            if not np.any(mask):
                continue
            expo = P[mask].copy()
            expo[:, i] -= 1
            g[i] = float((C[mask] * P[mask, i]) @ _monomials(u, expo))
        return g

    def hessian(u):
        H = np.zeros((dim, dim))
        for i in range(dim):
            for j in range(i, dim):
                if i == j:
                    mask = P[:, i] >= 2
                    if not np.any(mask):
                        continue
                    expo = P[mask].copy()
                    expo[:, i] -= 2
                    coef = C[mask] * P[mask, i] * (P[mask, i] - 1)
                else:
                    mask = (P[:, i] > 0) & (P[:, j] > 0)
                    if not np.any(mask):
                        continue
                    expo = P[mask].copy()
                    expo[:, i] -= 1
                    expo[:, j] -= 1
                    coef = C[mask] * P[mask, i] * P[mask, j]
                H[i, j] = float(coef @ _monomials(u, expo))
                H[j, i] = H[i, j]
        return H

    return ScalarField(dim=dim, value_fn=value, gradient_fn=gradient, hessian_fn=hessian)


def _fd_gradient(value_fn, u: np.ndarray, h: float) -> np.ndarray:
    g = np.zeros(u.size)
    for i in range(u.size):
        up = u.copy()
        um = u.copy()
        up[i] += h
        um[i] -= h
        g[i] = (value_fn(up) - value_fn(um)) / (2.0 * h)
    return g


def _fd_hessian(value_fn, u: np.ndarray, h: float) -> np.ndarray:
    m = u.size
    H = np.zeros((m, m))
    f0 = value_fn(u)
    for i in range(m):
        up = u.copy()
        um = u.copy()
        up[i] += h
        um[i] -= h
        H[i, i] = (value_fn(up) - 2.0 * f0 + value_fn(um)) / (h * h)
    for i in range(m):
        for j in range(i + 1, m):
            upp = u.copy()
            upm = u.copy()
            ump = u.copy()
            umm = u.copy()
            upp[[i, j]] += h
            umm[[i, j]] -= h
            upm[i] += h
            upm[j] -= h
            ump[i] -= h
            ump[j] += h
            H[i, j] = (value_fn(upp) - value_fn(upm) - value_fn(ump) + value_fn(umm)) / (
                4.0 * h * h
            )
            H[j, i] = H[i, j]
    return H


def finite_difference_field(
    value_fn: Callable[[np.ndarray], float],
    dim: int,
    grad_step: float = 1e-5,
    hess_step: float = 1e-4,
) -> ScalarField:
    """Wrap a value-only function as a ScalarField with central-difference
    derivatives.

    The gradient uses step ``grad_step``, the Hessian ``hess_step``; the
    Hessian estimate is symmetrized. Provenance records the steps.
    """
    if dim <= 0:
        raise DimensionError("finite_difference_field dim must be positive")
    if not (grad_step > 0 and hess_step > 0):
        raise ContractError("finite-difference steps must be positive")

    def gradient(u):
        return _fd_gradient(value_fn, u, grad_step)

    def hessian(u):
        H = _fd_hessian(value_fn, u, hess_step)
        return (H + H.T) / 2.0

    return ScalarField(
        dim=dim,
        value_fn=lambda u: float(value_fn(u)),
        gradient_fn=gradient,
        hessian_fn=hessian,
        provenance=f"finite-difference(h={grad_step:g},{hess_step:g})",
    )


@dataclass(frozen=True)
class ConstraintSet:
    """Finitely many scalar constraints and the regular value cutting out
    the manifold ``{u : fields[a](u) = regular_value[a] for all a}``."""

    ambient_dim: int
    fields: tuple
    regular_value: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        object.__setattr__(
            self, "regular_value", as_vector(self.regular_value, "regular_value")
        )
        k = len(self.fields)
        if k == 0:
            raise DimensionError("ConstraintSet needs at least one constraint")
        if k >= self.ambient_dim:
            raise DimensionError(
                f"ConstraintSet has {k} constraints in dimension {self.ambient_dim}; "
                "need fewer constraints than ambient dimensions"
            )
        if self.regular_value.size != k:
            raise DimensionError(
                f"regular_value has length {self.regular_value.size}, expected {k}"
            )
        for a, f in enumerate(self.fields):
            if not isinstance(f, ScalarField):
                raise ContractError(f"constraint {a} is not a ScalarField")
            if f.dim != self.ambient_dim:
                raise DimensionError(
                    f"constraint {a} has dimension {f.dim}, expected {self.ambient_dim}"
                )

    @property
    def count(self) -> int:
        return len(self.fields)

    def residuals(self, u) -> np.ndarray:
        u = as_vector(u, "point")
        if u.size != self.ambient_dim:
            raise DimensionError(
                f"point has dimension {u.size}, constraints expect {self.ambient_dim}"
            )
        return np.array(
            [f.value(u) - c for f, c in zip(self.fields, self.regular_value)]
        )

    def gradients(self, u) -> list:
        return [f.gradient(u) for f in self.fields]


@dataclass(frozen=True)
class AdaptedFrame:
    """A tangent-frame provider: point -> matrix whose columns span the
    tangent space of the constraint manifold at that point."""

    provider: Callable[[np.ndarray], np.ndarray]

    def at(self, u) -> np.ndarray:
        u = as_vector(u, "frame point")
        T = as_matrix(self.provider(u), "frame matrix")
        if T.shape[0] != u.size:
            raise DimensionError(
                f"frame has {T.shape[0]} rows, expected {u.size}"
            )
        if T.shape[1] >= T.shape[0]:
            raise DimensionError(
                f"frame must have fewer columns than rows, got {T.shape}"
            )
        return T


class OnManifoldCheck(NamedTuple):
    ok: bool
    residual: float


def on_manifold(
    constraints: ConstraintSet, u, tol: float | None = None
) -> OnManifoldCheck:
    """Whether ``u`` satisfies every constraint to tolerance.

    Returns the boolean verdict together with the max-abs residual.
    """
    tol = DEFAULT_TOLERANCES.on_manifold if tol is None else tol
    res = constraints.residuals(u)
    residual = float(np.max(np.abs(res)))
    return OnManifoldCheck(ok=residual <= tol, residual=residual)


def lagrange_multipliers(
    constraints: ConstraintSet, f: ScalarField, u
) -> np.ndarray:
    """Multiplier vector sigma solving Gram(∇F,∇F) sigma = column(<∇F,∇f>).

    Defined at any ambient point where the constraint gradients are
    independent; linear in ``f``. Dependent gradients raise RegularityError.
    """
    u = as_vector(u, "point")
    if f.dim != constraints.ambient_dim:
        raise DimensionError(
            f"field dimension {f.dim} does not match ambient {constraints.ambient_dim}"
        )
    if u.size != constraints.ambient_dim:
        raise DimensionError(
            f"point dimension {u.size} does not match ambient {constraints.ambient_dim}"
        )
    grads = constraints.gradients(u)
    G = numkit.gram(grads, grads)
    b = numkit.gram(grads, [f.gradient(u)])[:, 0]
    try:
        return numkit.solve_spd(G, b)
    except FactorizationError as exc:
        raise RegularityError(
            "constraint gradients are linearly dependent at this point"
        ) from exc


@dataclass(frozen=True)
class LaplacianReport:
    """Assembled Laplace-Beltrami evaluation with its diagnostics.

    ``value`` always equals ``trace_main - sigma @ trace_constraint`` as
    stored, because :meth:`assemble` computes it from those parts.
    """

    value: float
    sigma: np.ndarray
    trace_main: float
    trace_constraint: np.ndarray
    frame_gram_condition: float

    @classmethod
    def assemble(
        cls, trace_main: float, sigma, trace_constraint, frame_gram_condition: float
    ) -> "LaplacianReport":
        sigma = as_vector(sigma, "sigma")
        trace_constraint = as_vector(trace_constraint, "trace_constraint")
        if sigma.size != trace_constraint.size:
            raise DimensionError(
                "sigma and trace_constraint must have matching lengths"
            )
        value = float(trace_main) - float(np.dot(sigma, trace_constraint))
        return cls(
            value=value,
            sigma=sigma,
            trace_main=float(trace_main),
            trace_constraint=trace_constraint,
            frame_gram_condition=float(frame_gram_condition),
        )

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "sigma": [float(s) for s in self.sigma],
            "trace_main": self.trace_main,
            "trace_constraint": [float(t) for t in self.trace_constraint],
            "frame_gram_condition": self.frame_gram_condition,
        }


def laplace_beltrami_general(
    f: ScalarField,
    constraints: ConstraintSet,
    frame: AdaptedFrame,
    u,
    tols: Tolerances | None = None,
) -> LaplacianReport:
    """Laplace-Beltrami value of ``f`` restricted to the constraint manifold,
    evaluated at the on-manifold point ``u`` through an adapted frame.

    The value is tr(T+ [Hess f] T) minus the multiplier-weighted projected
    constraint Hessian traces, with T+ the left Moore-Penrose inverse of the
    frame. Off-manifold points raise DomainError with the residual;
    ill-conditioned frame Grams raise SingularityError.
    """
    tols = DEFAULT_TOLERANCES if tols is None else tols
    u = as_vector(u, "point")
    if f.dim != constraints.ambient_dim or u.size != constraints.ambient_dim:
        raise DimensionError(
            "field, constraints, and point must share one ambient dimension"
        )
    check = on_manifold(constraints, u, tols.on_manifold)
    if not check.ok:
        raise DomainError(
            f"point is off the manifold: residual {check.residual:.6g} exceeds "
            f"tolerance {tols.on_manifold:.6g}",
            residual=check.residual,
        )
    T = frame.at(u)
    m, r = T.shape
    if r != m - constraints.count:
        raise DimensionError(
            f"frame supplies {r} tangent directions, expected "
            f"{m - constraints.count} (ambient {m} minus {constraints.count} constraints)"
        )
    G = T.T @ T
    cond = numkit.sym_condition(G)
    if not np.isfinite(cond) or cond > tols.condition_limit:
        raise SingularityError(
            f"frame Gram condition {cond:.3e} exceeds limit {tols.condition_limit:.3e}",
            condition=cond,
        )
    T_plus = numkit.solve_spd(G, T.T)
    sigma = lagrange_multipliers(constraints, f, u)
    trace_main = float(np.trace(T_plus @ f.hessian(u) @ T))
    trace_constraint = np.array(
        [float(np.trace(T_plus @ Fa.hessian(u) @ T)) for Fa in constraints.fields]
    )
    return LaplacianReport.assemble(trace_main, sigma, trace_constraint, cond)


def qr_nullspace_frame(constraints: ConstraintSet) -> AdaptedFrame:
    """Adapted frame built numerically from the constraint gradients.

    At each point the gradients are stacked as columns and QR-factored in
    complete mode; the trailing orthonormal columns span the tangent space.
    Rank-deficient gradients raise RegularityError.
    """

    def provider(u: np.ndarray) -> np.ndarray:
        grads = constraints.gradients(u)
        J = np.stack(grads, axis=1)
        Q, R = np.linalg.qr(J, mode="complete")
        diag = np.abs(np.diag(R[: J.shape[1], : J.shape[1]]))
        scale = max(1.0, float(np.max(np.abs(J))))
        if np.any(diag < 1e-12 * scale):
            raise RegularityError(
                "constraint gradients are rank deficient at this point"
            )
        return Q[:, constraints.count :]

    return AdaptedFrame(provider=provider)
