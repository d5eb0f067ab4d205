"""Command-line interface.

Three commands: ``eval`` evaluates Laplace-Beltrami values for the points of
a JSON job file and writes one JSON record per line; ``verify`` runs a named
verification suite and writes a single JSON report; ``describe`` prints the
ambient dimension, constraint count, and manifold dimension of a supported
manifold. Exit codes: 0 success, 2 validation error, 3 verification
failure, 4 numerical error during evaluation.

The LAPBEL_TOL environment variable supplies the default identity-check
tolerance override for ``verify`` when ``--tol`` is absent.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import constraint_core as core
from . import numkit, orthogonal, sphere, verify
from .errors import LapbelError, NumericalError, ValidationError
from .numkit import DEFAULT_TOLERANCES

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_VERIFY_FAIL = 3
EXIT_NUMERICAL = 4

TOL_ENV_VAR = "LAPBEL_TOL"


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ValidationError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON in {path}: {exc}") from exc


def _require(mapping, key: str, where: str):
    if not isinstance(mapping, dict) or key not in mapping:
        raise ValidationError(f"{where} must contain '{key}'")
    return mapping[key]


def _load_matrix_spec(spec, where: str) -> np.ndarray:
    if isinstance(spec, dict) and "file" in spec:
        spec = _load_json(spec["file"])
    if not isinstance(spec, dict):
        raise ValidationError(
            f"{where} must be a matrix object {{rows, cols, data}} or a file reference"
        )
    try:
        return numkit.matrix_from_json(spec)
    except LapbelError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def _as_float_list(values, where: str) -> np.ndarray:
    if not isinstance(values, list) or not values:
        raise ValidationError(f"{where} must be a non-empty list of numbers")
    try:
        return numkit.as_vector(values, where)
    except LapbelError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def _resolve_point(entry, index: int, ambient_dim: int, matrix_side: int | None):
    """Resolve one job point entry to (ref, ambient vector)."""
    ref = f"inline[{index}]"
    data = entry
    if isinstance(data, dict) and "file" in data:
        ref = f"file:{data['file']}"
        data = _load_json(data["file"])
    where = f"points[{index}]"
    if isinstance(data, dict):
        M = _load_matrix_spec(data, where)
        if M.shape[1] == 1:
            u = M[:, 0]
        elif matrix_side is not None and M.shape == (matrix_side, matrix_side):
            u = numkit.vec(M)
        else:
            raise ValidationError(
                f"{where}: matrix shape {M.shape} fits neither a column vector "
                f"nor the manifold's square side {matrix_side}"
            )
    elif isinstance(data, list):
        u = _as_float_list(data, where)
    else:
        raise ValidationError(f"{where} must be a list, matrix object, or file reference")
    if u.size != ambient_dim:
        raise ValidationError(
            f"{where} has dimension {u.size}, manifold ambient dimension is {ambient_dim}"
        )
    return ref, u


def _polynomial_terms(terms, where: str):
    if not isinstance(terms, list) or not terms:
        raise ValidationError(f"{where} must be a non-empty list of terms")
    rows = []
    for i, term in enumerate(terms):
        coeff = _require(term, "coeff", f"{where}[{i}]")
        powers = _require(term, "powers", f"{where}[{i}]")
        rows.append((float(coeff), powers))
    return rows


def _matrix_for_square_ambient(spec, ambient_dim: int, where: str) -> np.ndarray:
    A = _load_matrix_spec(spec, where)
    if A.shape[0] != A.shape[1]:
        raise ValidationError(f"{where} must be square, got {A.shape}")
    if A.shape[0] ** 2 != ambient_dim:
        raise ValidationError(
            f"{where} is {A.shape[0]}x{A.shape[0]}; the manifold's ambient "
            f"dimension {ambient_dim} needs side {int(round(ambient_dim ** 0.5))}"
        )
    return A


def _build_function(spec, ambient_dim: int) -> core.ScalarField:
    ftype = _require(spec, "type", "job.function")
    try:
        if ftype == "p1":
            A = _matrix_for_square_ambient(
                _require(spec, "matrix", "job.function"), ambient_dim, "function.matrix"
            )
            return orthogonal.p1_field(A)
        if ftype == "p11":
            A = _matrix_for_square_ambient(
                _require(spec, "matrix", "job.function"), ambient_dim, "function.matrix"
            )
            return orthogonal.p11_field(A)
        if ftype == "p2":
            A = _matrix_for_square_ambient(
                _require(spec, "matrix", "job.function"), ambient_dim, "function.matrix"
            )
            return orthogonal.p2_field(A)
        if ftype == "brockett":
            A = _matrix_for_square_ambient(
                _require(spec, "matrix", "job.function"), ambient_dim, "function.matrix"
            )
            diagonal = _as_float_list(
                _require(spec, "diagonal", "job.function"), "function.diagonal"
            )
            return orthogonal.brockett_field(A, diagonal)
        if ftype == "linear":
            coeffs = _as_float_list(
                _require(spec, "coefficients", "job.function"), "function.coefficients"
            )
            if coeffs.size != ambient_dim:
                raise ValidationError(
                    f"function.coefficients has length {coeffs.size}, "
                    f"ambient dimension is {ambient_dim}"
                )
            return core.linear_field(coeffs)
        if ftype == "polynomial":
            rows = _polynomial_terms(
                _require(spec, "terms", "job.function"), "function.terms"
            )
            return core.polynomial_field(ambient_dim, rows)
    except ValidationError:
        raise
    except LapbelError as exc:
        raise ValidationError(f"job.function: {exc}") from exc
    raise ValidationError(
        f"unknown function type '{ftype}'; supported: p1, p11, p2, brockett, "
        "linear, polynomial, external-samples"
    )


def _sample_field(sample, index: int, ambient_dim: int) -> core.ScalarField:
    where = f"function.samples[{index}]"
    value = float(_require(sample, "value", where))
    gradient = _as_float_list(_require(sample, "gradient", where), f"{where}.gradient")
    if gradient.size != ambient_dim:
        raise ValidationError(
            f"{where}.gradient has length {gradient.size}, expected {ambient_dim}"
        )
    hessian = _load_matrix_spec(_require(sample, "hessian", where), f"{where}.hessian")
    if hessian.shape != (ambient_dim, ambient_dim):
        raise ValidationError(
            f"{where}.hessian has shape {hessian.shape}, expected "
            f"{(ambient_dim, ambient_dim)}"
        )
    return core.ScalarField(
        dim=ambient_dim,
        value_fn=lambda u: value,
        gradient_fn=lambda u: gradient.copy(),
        hessian_fn=lambda u: hessian.copy(),
        provenance="external",
    )


def _generic_constraints(manifold) -> core.ConstraintSet:
    spec = manifold
    if "file" in manifold:
        spec = _load_json(manifold["file"])
    ambient = int(_require(spec, "ambient_dim", "job.manifold"))
    raw = _require(spec, "constraints", "job.manifold")
    if not isinstance(raw, list) or not raw:
        raise ValidationError("job.manifold.constraints must be a non-empty list")
    fields = []
    for i, one in enumerate(raw):
        rows = _polynomial_terms(
            _require(one, "terms", f"manifold.constraints[{i}]"),
            f"manifold.constraints[{i}].terms",
        )
        try:
            fields.append(core.polynomial_field(ambient, rows))
        except LapbelError as exc:
            raise ValidationError(f"manifold.constraints[{i}]: {exc}") from exc
    values = _as_float_list(
        _require(spec, "regular_value", "job.manifold"), "manifold.regular_value"
    )
    try:
        return core.ConstraintSet(
            ambient_dim=ambient, fields=tuple(fields), regular_value=values
        )
    except LapbelError as exc:
        raise ValidationError(f"job.manifold: {exc}") from exc


def _evaluate_job(data) -> tuple[list, bool]:
    if not isinstance(data, dict):
        raise ValidationError("job must be a JSON object")
    manifold = _require(data, "manifold", "job")
    kind = _require(manifold, "type", "job.manifold")
    options = data.get("options") or {}
    if not isinstance(options, dict):
        raise ValidationError("job.options must be an object")

    tols = DEFAULT_TOLERANCES
    overrides = {}
    if "on_manifold_tol" in options:
        overrides["on_manifold"] = float(options["on_manifold_tol"])
    if "orthogonality_tol" in options:
        overrides["orthogonality"] = float(options["orthogonality_tol"])
    if overrides:
        tols = dataclasses.replace(tols, **overrides)

    matrix_side = None
    radius = None
    if kind == "sphere":
        n = int(_require(manifold, "n", "job.manifold"))
        radius = float(manifold.get("radius", 1.0))
        try:
            constraints = sphere.sphere_constraint_set(n, radius)
        except LapbelError as exc:
            raise ValidationError(f"job.manifold: {exc}") from exc
        frame = sphere.sphere_adapted_frame(radius)
        ambient = n
        default_path = "closed-form"
    elif kind == "orthogonal":
        n = int(_require(manifold, "n", "job.manifold"))
        try:
            constraints = orthogonal.on_constraint_set(n)
        except LapbelError as exc:
            raise ValidationError(f"job.manifold: {exc}") from exc
        frame = orthogonal.on_adapted_frame(tols.orthogonality)
        ambient = n * n
        matrix_side = n
        default_path = "closed-form"
    elif kind == "generic":
        constraints = _generic_constraints(manifold)
        frame = core.qr_nullspace_frame(constraints)
        ambient = constraints.ambient_dim
        default_path = "general-frame"
    else:
        raise ValidationError(
            f"unknown manifold type '{kind}'; supported: sphere, orthogonal, generic"
        )

    path = options.get("path", default_path)
    if path not in ("closed-form", "general-frame"):
        raise ValidationError(
            f"options.path must be 'closed-form' or 'general-frame', got '{path}'"
        )
    if path == "closed-form" and kind == "generic":
        raise ValidationError("generic manifolds have no closed-form path")

    points_raw = _require(data, "points", "job")
    if not isinstance(points_raw, list) or not points_raw:
        raise ValidationError("job.points must be a non-empty list")
    resolved = [
        _resolve_point(entry, i, ambient, matrix_side)
        for i, entry in enumerate(points_raw)
    ]

    fspec = _require(data, "function", "job")
    ftype = _require(fspec, "type", "job.function")
    if ftype == "external-samples":
        samples = _require(fspec, "samples", "job.function")
        if not isinstance(samples, list) or len(samples) != len(resolved):
            raise ValidationError(
                "function.samples must be a list aligned with job.points"
            )

        def field_for(i: int) -> core.ScalarField:
            return _sample_field(samples[i], i, ambient)

    else:
        shared = _build_function(fspec, ambient)
        fd_options = options.get("finite_difference")
        if fd_options is not None:
            if not isinstance(fd_options, dict):
                raise ValidationError("options.finite_difference must be an object")
            grad_step = float(fd_options.get("gradient_step", 1e-5))
            hess_step = float(fd_options.get("hessian_step", 1e-4))
            shared = core.finite_difference_field(
                shared.value_fn, ambient, grad_step=grad_step, hess_step=hess_step
            )

        def field_for(i: int) -> core.ScalarField:
            return shared

    records = []
    had_error = False
    for i, (ref, u) in enumerate(resolved):
        base = {"index": i, "ref": ref, "path": path}
        try:
            field = field_for(i)
            if path == "closed-form" and kind == "sphere":
                point = sphere.SpherePoint(u, radius, tol=tols.on_manifold)
                report = sphere.sphere_report(field, point)
            elif path == "closed-form" and kind == "orthogonal":
                point = orthogonal.OrthogonalPoint(
                    numkit.unvec(u, matrix_side), tol=tols.orthogonality
                )
                report = orthogonal.on_laplacian(field, point)
            else:
                report = core.laplace_beltrami_general(field, constraints, frame, u, tols)
            records.append({**base, **report.to_dict()})
        except LapbelError as exc:
            had_error = True
            error = {"type": type(exc).__name__, "message": str(exc)}
            residual = getattr(exc, "residual", None)
            if residual is not None:
                error["residual"] = float(residual)
            condition = getattr(exc, "condition", None)
            if condition is not None and np.isfinite(condition):
                error["condition"] = float(condition)
            records.append({**base, "error": error})
    return records, had_error


def cmd_eval(args) -> int:
    data = _load_json(args.job)
    records, had_error = _evaluate_job(data)
    for record in records:
        sys.stdout.write(json.dumps(record, sort_keys=True) + "\n")
    return EXIT_NUMERICAL if had_error else EXIT_OK


def _parse_range(text: str) -> list:
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            start, stop = int(lo), int(hi)
        else:
            start = stop = int(text)
    except ValueError as exc:
        raise ValidationError(
            f"--n expects an integer or a range like 2..5, got '{text}'"
        ) from exc
    if stop < start:
        raise ValidationError(f"--n range is empty: {text}")
    return list(range(start, stop + 1))


def cmd_verify(args) -> int:
    ns = _parse_range(args.n)
    tol = args.tol
    if tol is None and TOL_ENV_VAR in os.environ:
        try:
            tol = float(os.environ[TOL_ENV_VAR])
        except ValueError as exc:
            raise ValidationError(
                f"{TOL_ENV_VAR} must be a number, got '{os.environ[TOL_ENV_VAR]}'"
            ) from exc
    try:
        report = verify.run_suite(args.suite, ns, seeds=args.seeds, tol=tol, h=args.h)
    except LapbelError as exc:
        raise ValidationError(str(exc)) from exc
    document = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(document)
    else:
        sys.stdout.write(document)
    return EXIT_OK if report.passed else EXIT_VERIFY_FAIL


def cmd_describe(args) -> int:
    kind = args.manifold
    n = args.n
    if n < 2:
        raise ValidationError(f"describe needs n >= 2, got {n}")
    if kind == "sphere":
        m, k = n, 1
    elif kind == "orthogonal":
        m, k = n * n, n * (n + 1) // 2
    else:
        raise ValidationError(
            f"unknown manifold '{kind}'; supported: sphere, orthogonal"
        )
    dim = m - k
    payload = {
        "manifold": kind,
        "n": n,
        "m": m,
        "k": k,
        "dim": dim,
        "frame_shape": [m, dim],
    }
    sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lapbel",
        description=(
            "Evaluate Laplace-Beltrami operators on constraint manifolds "
            "in ambient coordinates, and verify the closed-form identities."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate Laplacians for a JSON job file")
    p_eval.add_argument("--job", required=True, help="path to the job JSON file")
    p_eval.set_defaults(func=cmd_eval)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("suite", choices=verify.SUITES)
    p_verify.add_argument("--n", default="2..5", help="dimension range, e.g. 3 or 2..6")
    p_verify.add_argument("--seeds", type=int, default=5, help="random draws per case")
    p_verify.add_argument(
        "--tol",
        type=float,
        default=None,
        help="override the identity-check tolerance (default from LAPBEL_TOL)",
    )
    p_verify.add_argument(
        "--h", type=float, default=1e-3, help="geodesic oracle step size"
    )
    p_verify.add_argument("--out", default=None, help="write the report to a file")
    p_verify.set_defaults(func=cmd_verify)

    p_describe = sub.add_parser(
        "describe", help="print manifold dimensions as JSON"
    )
    p_describe.add_argument("manifold", help="sphere or orthogonal")
    p_describe.add_argument("n", type=int)
    p_describe.set_defaults(func=cmd_describe)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
