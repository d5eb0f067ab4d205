"""Tests for scalar fields, constraint sets, and the general evaluator."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from lapbel.constraint_core import (
    AdaptedFrame,
    ConstraintSet,
    LaplacianReport,
    ScalarField,
    constant_field,
    finite_difference_field,
    lagrange_multipliers,
    laplace_beltrami_general,
    linear_field,
    on_manifold,
    polynomial_field,
    qr_nullspace_frame,
)
from lapbel.errors import (
    ContractError,
    DimensionError,
    DomainError,
    RegularityError,
    SingularityError,
)
from lapbel.numkit import Tolerances


def sphere_constraints(dim=3, radius=1.0):
    """Sum-of-squares constraint cutting out the sphere of the given radius."""
    terms = [(1.0, tuple(2 if i == j else 0 for i in range(dim))) for j in range(dim)]
    return ConstraintSet(
        ambient_dim=dim,
        fields=(polynomial_field(dim, terms),),
        regular_value=np.array([radius**2]),
    )


# -- ScalarField basics ------------------------------------------------------


def test_field_validates_dimension():
    with pytest.raises(DimensionError):
        ScalarField(
            dim=0,
            value_fn=lambda u: 0.0,
            gradient_fn=lambda u: np.zeros(0),
            hessian_fn=lambda u: np.zeros((0, 0)),
        )
    f = linear_field([1.0, 2.0])
    with pytest.raises(DimensionError):
        f.value([1.0, 2.0, 3.0])


def test_field_rejects_bad_gradient_shape():
    f = ScalarField(
        dim=2,
        value_fn=lambda u: 0.0,
        gradient_fn=lambda u: np.zeros(3),
        hessian_fn=lambda u: np.zeros((2, 2)),
    )
    with pytest.raises(DimensionError):
        f.gradient([0.0, 0.0])


def test_field_rejects_asymmetric_hessian():
    f = ScalarField(
        dim=2,
        value_fn=lambda u: 0.0,
        gradient_fn=lambda u: np.zeros(2),
        hessian_fn=lambda u: np.array([[0.0, 1.0], [0.0, 0.0]]),
    )
    with pytest.raises(ContractError):
        f.hessian([0.0, 0.0])


def test_field_rejects_non_finite_value():
    f = ScalarField(
        dim=1,
        value_fn=lambda u: float("nan"),
        gradient_fn=lambda u: np.zeros(1),
        hessian_fn=lambda u: np.zeros((1, 1)),
    )
    with pytest.raises(DomainError):
        f.value([1.0])


# -- field arithmetic ---------------------------------------------------------


def test_product_rule_by_hand():
    # f = x1^2, g = x2; the product x1^2 x2 has gradient (2 x1 x2, x1^2)
    # and Hessian [[2 x2, 2 x1], [2 x1, 0]].
    f = polynomial_field(2, [(1.0, (2, 0))])
    g = linear_field([0.0, 1.0])
    p = f * g
    u = np.array([1.5, 2.0])
    assert_allclose(p.value(u), 4.5)
    assert_allclose(p.gradient(u), [6.0, 2.25])
    assert_allclose(p.hessian(u), [[4.0, 3.0], [3.0, 0.0]])


def test_product_matches_direct_polynomial():
    rng = np.random.default_rng(21)
    f = polynomial_field(3, [(2.0, (1, 1, 0)), (-1.0, (0, 0, 2))])
    g = polynomial_field(3, [(1.0, (1, 0, 0)), (3.0, (0, 0, 1))])
    # Expanded by hand: (2 x y - z^2)(x + 3 z)
    direct = polynomial_field(
        3,
        [
            (2.0, (2, 1, 0)),
            (6.0, (1, 1, 1)),
            (-1.0, (1, 0, 2)),
            (-3.0, (0, 0, 3)),
        ],
    )
    p = f * g
    for _ in range(10):
        u = rng.uniform(-2, 2, size=3)
        assert_allclose(p.value(u), direct.value(u), atol=1e-12)
        assert_allclose(p.gradient(u), direct.gradient(u), atol=1e-12)
        assert_allclose(p.hessian(u), direct.hessian(u), atol=1e-12)


def test_sum_scale_and_shift():
    f = polynomial_field(2, [(1.0, (2, 0))])
    g = linear_field([0.0, 1.0])
    u = np.array([2.0, -1.0])
    s = f + g
    assert_allclose(s.value(u), 3.0)
    assert_allclose(s.gradient(u), [4.0, 1.0])
    assert_allclose((3.0 * f).value(u), 12.0)
    assert_allclose((f - g).value(u), 5.0)
    assert_allclose((-f).gradient(u), [-4.0, 0.0])
    assert_allclose((2.0 + f).value(u), 6.0)
    assert_allclose((2.0 - f).value(u), -2.0)
    assert_allclose((f + 1.0).hessian(u), f.hessian(u))


def test_arithmetic_dimension_mismatch():
    with pytest.raises(DimensionError):
        linear_field([1.0]) + linear_field([1.0, 2.0])
    with pytest.raises(DimensionError):
        linear_field([1.0]) * linear_field([1.0, 2.0])


def test_provenance_combination():
    f = linear_field([1.0, 0.0])
    g = finite_difference_field(lambda u: float(u[0] * u[1]), 2)
    assert (f + f).is_analytic
    assert not (f * g).is_analytic
    assert (g + f).provenance == g.provenance


# -- polynomial fields --------------------------------------------------------


def test_polynomial_by_hand():
    # x1 * x2^3 at (2, 1.5)
    f = polynomial_field(2, [(1.0, (1, 3))])
    u = np.array([2.0, 1.5])
    assert_allclose(f.value(u), 6.75)
    assert_allclose(f.gradient(u), [3.375, 13.5])
    assert_allclose(f.hessian(u), [[0.0, 6.75], [6.75, 18.0]])


def test_polynomial_zero_power_at_origin():
    f = polynomial_field(2, [(3.0, (0, 0)), (1.0, (1, 0))])
    assert f.value([0.0, 0.0]) == 3.0


def test_polynomial_empty_terms_is_zero():
    f = polynomial_field(3, [])
    assert f.value([1.0, 2.0, 3.0]) == 0.0
    assert_allclose(f.gradient([1.0, 2.0, 3.0]), np.zeros(3))


def test_polynomial_validation():
    with pytest.raises(ContractError):
        polynomial_field(2, [(1.0, (-1, 0))])
    with pytest.raises(DimensionError):
        polynomial_field(2, [(1.0, (1, 0, 0))])
    with pytest.raises(ContractError):
        polynomial_field(2, [1.0])
    with pytest.raises(DimensionError):
        polynomial_field(0, [])


@pytest.mark.parametrize("seed", range(3))
def test_polynomial_derivatives_match_finite_differences(seed):
    rng = np.random.default_rng([77, seed])
    terms = []
    for _ in range(6):
        powers = rng.integers(0, 3, size=3)
        terms.append((float(rng.uniform(-1, 1)), tuple(int(p) for p in powers)))
    f = polynomial_field(3, terms)
    fd = finite_difference_field(f.value_fn, 3)
    for _ in range(5):
        u = rng.uniform(-1.5, 1.5, size=3)
        assert np.max(np.abs(f.gradient(u) - fd.gradient(u))) <= 1e-6
        assert np.max(np.abs(f.hessian(u) - fd.hessian(u))) <= 1e-5


# -- finite-difference fields -------------------------------------------------


def test_finite_difference_cubic_example():
    f = finite_difference_field(lambda u: float(u[0] * u[1] ** 3), 2)
    u = np.array([1.0, 1.0])
    assert np.max(np.abs(f.gradient(u) - np.array([1.0, 3.0]))) <= 1e-5
    H = f.hessian(u)
    assert abs(H[1, 1] - 6.0) <= 1e-5
    assert abs(H[0, 1] - 3.0) <= 1e-5
    assert np.array_equal(H, H.T)


def test_finite_difference_quadratic():
    A = np.array([[2.0, 1.0, 0.0], [1.0, -1.0, 0.5], [0.0, 0.5, 3.0]])
    b = np.array([1.0, -2.0, 0.5])
    f = finite_difference_field(lambda u: float(0.5 * u @ A @ u + b @ u), 3)
    u = np.array([0.3, -0.7, 1.1])
    assert np.max(np.abs(f.gradient(u) - (A @ u + b))) <= 1e-6
    assert np.max(np.abs(f.hessian(u) - A)) <= 1e-6


def test_finite_difference_constant_is_exactly_flat():
    f = finite_difference_field(lambda u: 4.0, 3)
    u = np.array([0.2, 0.4, -0.9])
    assert np.max(np.abs(f.gradient(u))) == 0.0
    assert np.max(np.abs(f.hessian(u))) == 0.0


def test_finite_difference_provenance_and_validation():
    f = finite_difference_field(lambda u: 0.0, 2, grad_step=1e-5, hess_step=1e-4)
    assert f.provenance.startswith("finite-difference")
    assert not f.is_analytic
    with pytest.raises(ContractError):
        finite_difference_field(lambda u: 0.0, 2, grad_step=0.0)
    with pytest.raises(DimensionError):
        finite_difference_field(lambda u: 0.0, 0)


# -- constraint sets ----------------------------------------------------------


def test_constraint_set_validation():
    f = linear_field([1.0, 0.0])
    with pytest.raises(DimensionError):
        ConstraintSet(ambient_dim=2, fields=(f, f), regular_value=[0.0, 0.0])
    with pytest.raises(DimensionError):
        ConstraintSet(ambient_dim=3, fields=(f,), regular_value=[0.0])
    with pytest.raises(DimensionError):
        ConstraintSet(ambient_dim=2, fields=(f,), regular_value=[0.0, 1.0])
    with pytest.raises(ContractError):
        ConstraintSet(ambient_dim=2, fields=("f",), regular_value=[0.0])


def test_residuals_off_sphere():
    cons = sphere_constraints()
    res = cons.residuals([1.1, 0.0, 0.0])
    assert_allclose(res, [0.21], atol=1e-12)
    assert cons.count == 1


def test_on_manifold_check():
    cons = sphere_constraints()
    ok = on_manifold(cons, [1.0, 0.0, 0.0])
    assert ok.ok and ok.residual <= 1e-15
    bad = on_manifold(cons, [1.1, 0.0, 0.0])
    assert not bad.ok
    assert_allclose(bad.residual, 0.21, atol=1e-12)
    assert on_manifold(cons, [1.1, 0.0, 0.0], tol=0.3).ok


# -- multipliers --------------------------------------------------------------


def test_multipliers_axis_aligned_example():
    # Constraints x1 and x2 have orthonormal gradients, so the multipliers
    # are just the matching gradient components of f: (3, 5).
    cons = ConstraintSet(
        ambient_dim=3,
        fields=(linear_field([1.0, 0.0, 0.0]), linear_field([0.0, 1.0, 0.0])),
        regular_value=[0.0, 0.0],
    )
    f = linear_field([3.0, 5.0, 7.0])
    sigma = lagrange_multipliers(cons, f, [0.4, -0.2, 9.0])
    assert_allclose(sigma, [3.0, 5.0], atol=1e-12)


def test_multiplier_of_constraint_itself_is_one():
    cons = sphere_constraints()
    sigma = lagrange_multipliers(cons, cons.fields[0], [0.5, -0.5, 0.3])
    assert_allclose(sigma, [1.0], atol=1e-13)


def test_multipliers_sphere_closed_form_any_point():
    # For the sum-of-squares constraint, sigma = <u, grad f> / (2 |u|^2)
    # at any nonzero u, on the sphere or not.
    rng = np.random.default_rng(31)
    cons = sphere_constraints()
    f = polynomial_field(3, [(1.0, (2, 1, 0)), (-0.5, (0, 0, 3))])
    for _ in range(10):
        u = rng.uniform(-2, 2, size=3)
        expected = float(u @ f.gradient(u)) / (2.0 * float(u @ u))
        assert_allclose(lagrange_multipliers(cons, f, u)[0], expected, atol=1e-12)


def test_multipliers_cramer_oracle():
    # Independent oracle: Cramer's rule on the 3x3 Gram system.
    rng = np.random.default_rng(32)
    normals = rng.standard_normal((3, 5))
    cons = ConstraintSet(
        ambient_dim=5,
        fields=tuple(linear_field(n) for n in normals),
        regular_value=np.zeros(3),
    )
    f = linear_field(rng.standard_normal(5))
    u = rng.standard_normal(5)
    sigma = lagrange_multipliers(cons, f, u)
    G = normals @ normals.T
    b = normals @ f.gradient(u)
    detG = np.linalg.det(G)
    for i in range(3):
        Gi = G.copy()
        Gi[:, i] = b
        assert_allclose(sigma[i], np.linalg.det(Gi) / detG, rtol=1e-10, atol=1e-12)


def test_multipliers_linear_in_the_field():
    rng = np.random.default_rng(33)
    cons = sphere_constraints()
    f = polynomial_field(3, [(1.0, (3, 0, 0)), (2.0, (0, 1, 1))])
    g = polynomial_field(3, [(1.0, (0, 2, 0)), (-1.0, (1, 0, 1))])
    u = rng.uniform(-1, 1, size=3)
    a, b = 2.5, -1.25
    combo = lagrange_multipliers(cons, a * f + b * g, u)
    parts = a * lagrange_multipliers(cons, f, u) + b * lagrange_multipliers(cons, g, u)
    assert np.max(np.abs(combo - parts)) <= 1e-10


def test_multipliers_reject_dependent_gradients():
    cons = ConstraintSet(
        ambient_dim=3,
        fields=(linear_field([1.0, 0.0, 0.0]), linear_field([2.0, 0.0, 0.0])),
        regular_value=[0.0, 0.0],
    )
    with pytest.raises(RegularityError):
        lagrange_multipliers(cons, linear_field([1.0, 1.0, 1.0]), [0.0, 0.0, 0.0])


# -- reports ------------------------------------------------------------------


def test_report_assembly_identity():
    report = LaplacianReport.assemble(
        trace_main=1.75,
        sigma=[0.3, -0.2],
        trace_constraint=[2.0, 4.0],
        frame_gram_condition=1.0,
    )
    expected = 1.75 - float(np.dot([0.3, -0.2], [2.0, 4.0]))
    assert report.value == expected
    d = report.to_dict()
    assert set(d) == {
        "value",
        "sigma",
        "trace_main",
        "trace_constraint",
        "frame_gram_condition",
    }
    assert d["sigma"] == [0.3, -0.2]


def test_report_rejects_mismatched_lengths():
    with pytest.raises(DimensionError):
        LaplacianReport.assemble(0.0, [1.0], [1.0, 2.0], 1.0)


# -- the general evaluator ----------------------------------------------------


def test_general_sphere_linear_field():
    cons = sphere_constraints()
    frame = qr_nullspace_frame(cons)
    f = linear_field([1.0, 0.0, 0.0])
    report = laplace_beltrami_general(f, cons, frame, [1.0, 0.0, 0.0])
    assert_allclose(report.value, -2.0, atol=1e-12)
    assert_allclose(report.sigma, [0.5], atol=1e-12)


def test_general_constant_field_is_zero():
    cons = sphere_constraints()
    frame = qr_nullspace_frame(cons)
    report = laplace_beltrami_general(constant_field(3, 7.0), cons, frame, [0.0, 1.0, 0.0])
    assert report.value == 0.0


def test_general_rejects_off_manifold():
    cons = sphere_constraints()
    frame = qr_nullspace_frame(cons)
    with pytest.raises(DomainError) as info:
        laplace_beltrami_general(linear_field([1.0, 0.0, 0.0]), cons, frame, [1.1, 0.0, 0.0])
    assert_allclose(info.value.residual, 0.21, atol=1e-12)


def test_general_rejects_wrong_frame_width():
    cons = sphere_constraints()
    frame = AdaptedFrame(provider=lambda u: np.ones((3, 1)))
    with pytest.raises(DimensionError):
        laplace_beltrami_general(linear_field([1.0, 0.0, 0.0]), cons, frame, [1.0, 0.0, 0.0])


def test_general_condition_limit():
    cons = sphere_constraints()
    x = np.array([1.0, 0.0, 0.0])

    def skewed(u):
        # Tangent columns e2 and e2 + 1e-3 e3 span the tangent plane but
        # have a Gram condition near 4e6.
        return np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1e-3]])

    frame = AdaptedFrame(provider=skewed)
    f = linear_field([1.0, 0.0, 0.0])
    report = laplace_beltrami_general(f, cons, frame, x)
    assert_allclose(report.value, -2.0, atol=1e-8)
    assert report.frame_gram_condition > 1e5
    with pytest.raises(SingularityError) as info:
        laplace_beltrami_general(f, cons, frame, x, tols=Tolerances(condition_limit=1e3))
    assert info.value.condition > 1e3


def test_general_value_invariant_under_frame_change():
    # Any invertible recombination of the frame columns leaves the value
    # unchanged; only the Gram condition differs.
    rng = np.random.default_rng(41)
    cons = sphere_constraints()
    base = qr_nullspace_frame(cons)
    M = np.array([[2.0, 1.0], [0.0, 3.0]])
    mixed = AdaptedFrame(provider=lambda u: base.at(u) @ M)
    f = polynomial_field(3, [(1.0, (1, 1, 0)), (0.5, (0, 0, 2))])
    for _ in range(5):
        v = rng.standard_normal(3)
        x = v / np.linalg.norm(v)
        r1 = laplace_beltrami_general(f, cons, base, x)
        r2 = laplace_beltrami_general(f, cons, mixed, x)
        assert abs(r1.value - r2.value) <= 1e-10


def test_general_value_invariant_under_prolongation():
    # f and f + (F - c) g agree on the manifold, and so do their values.
    rng = np.random.default_rng(42)
    cons = sphere_constraints()
    frame = qr_nullspace_frame(cons)
    f = polynomial_field(3, [(1.0, (2, 0, 1)), (-2.0, (0, 1, 0))])
    g = polynomial_field(3, [(0.7, (1, 0, 0)), (1.3, (0, 0, 2))])
    shifted = f + (cons.fields[0] - 1.0) * g
    for _ in range(5):
        v = rng.standard_normal(3)
        x = v / np.linalg.norm(v)
        r1 = laplace_beltrami_general(f, cons, frame, x)
        r2 = laplace_beltrami_general(shifted, cons, frame, x)
        assert abs(r1.value - r2.value) <= 1e-8


def test_general_report_is_self_consistent():
    cons = sphere_constraints()
    frame = qr_nullspace_frame(cons)
    f = polynomial_field(3, [(1.0, (1, 1, 0))])
    report = laplace_beltrami_general(f, cons, frame, [0.0, 0.6, 0.8])
    rebuilt = report.trace_main - float(np.dot(report.sigma, report.trace_constraint))
    assert report.value == rebuilt


def test_general_two_constraints_circle():
    # Sphere of radius sqrt(2) cut by the plane x3 = 1: a unit circle at
    # height 1. Restricted to that circle, x1 = cos(theta) with arclength
    # theta, so its curve Laplacian is -x1.
    cons = ConstraintSet(
        ambient_dim=3,
        fields=(
            polynomial_field(3, [(1.0, (2, 0, 0)), (1.0, (0, 2, 0)), (1.0, (0, 0, 2))]),
            linear_field([0.0, 0.0, 1.0]),
        ),
        regular_value=[2.0, 1.0],
    )
    frame = qr_nullspace_frame(cons)
    f = linear_field([1.0, 0.0, 0.0])
    for theta in np.linspace(0.0, 2 * np.pi, 9):
        x = np.array([np.cos(theta), np.sin(theta), 1.0])
        report = laplace_beltrami_general(f, cons, frame, x)
        assert abs(report.value - (-np.cos(theta))) <= 1e-10
        assert len(report.sigma) == 2


# -- QR frames ----------------------------------------------------------------


def test_qr_frame_columns_are_orthonormal_and_tangent():
    rng = np.random.default_rng(43)
    cons = sphere_constraints()
    frame = qr_nullspace_frame(cons)
    for _ in range(10):
        v = rng.standard_normal(3)
        x = v / np.linalg.norm(v)
        T = frame.at(x)
        assert T.shape == (3, 2)
        assert np.max(np.abs(T.T @ T - np.eye(2))) <= 1e-12
        assert np.max(np.abs(x @ T)) <= 1e-12


def test_qr_frame_rejects_rank_deficient_gradients():
    cons = ConstraintSet(
        ambient_dim=3,
        fields=(polynomial_field(3, [(1.0, (2, 0, 0))]),),
        regular_value=[0.0],
    )
    frame = qr_nullspace_frame(cons)
    with pytest.raises(RegularityError):
        frame.at([0.0, 1.0, 0.0])


def test_adapted_frame_validation():
    frame = AdaptedFrame(provider=lambda u: np.ones((4, 2)))
    with pytest.raises(DimensionError):
        frame.at([1.0, 2.0, 3.0])
    wide = AdaptedFrame(provider=lambda u: np.ones((3, 3)))
    with pytest.raises(DimensionError):
        wide.at([1.0, 2.0, 3.0])
