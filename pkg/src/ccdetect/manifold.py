"""Constant-curvature geometry: Euclidean space, spheres and hyperboloids.

Points are plain numpy arrays.  For ``kappa == 0`` a point of a
``d``-dimensional manifold has ``d`` coordinates; for ``kappa != 0`` it lives
in the ``(d + 1)``-dimensional ambient space:

* ``kappa > 0``: the sphere ``<x, x> = r**2`` with ``r = 1 / sqrt(kappa)``;
* ``kappa < 0``: the upper sheet of the hyperboloid ``<x, x> = -r**2``,
  ``x[0] > 0``, under the pseudo-Euclidean product
  ``<x, y> = sum(x[1:] * y[1:]) - x[0] * y[0]``.

Every function accepts a single point (1-D array) or a stack of points
(2-D array, one point per row) where it makes sense.
"""

from __future__ import annotations

import math

import numpy as np

#: membership tolerance, relative to r**2
TOL_MEMBERSHIP = 1e-9
#: tolerance on arccos / arccosh arguments before they are clamped
TOL_ARGUMENT = 1e-9


class ManifoldError(ValueError):
    """Raised when points are off the manifold or an operation is undefined."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative estimate does not converge."""


def radius(kappa: float) -> float:
    """Radius ``1 / sqrt(|kappa|)`` of a curved manifold."""
    if kappa == 0:
        raise ManifoldError("Euclidean space has no radius")
    if not math.isfinite(kappa):
        raise ManifoldError(f"curvature must be finite, got {kappa}")
    return 1.0 / math.sqrt(abs(kappa))


def geometry(kappa: float) -> str:
    """Name of the geometry selected by the sign of ``kappa``."""
    if kappa > 0:
        return "spherical"
    if kappa < 0:
        return "hyperbolic"
    return "euclidean"


def scalar_product(x, y, kappa: float):
    """Scalar product of ``x`` and ``y`` on the ambient space of ``M_kappa``.

    Euclidean for ``kappa >= 0``; pseudo-Euclidean (first coordinate with
    negative sign) for ``kappa < 0``.  Broadcasts over leading axes.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise ManifoldError(
            f"dimension mismatch: {x.shape[-1]} != {y.shape[-1]}")
    prod = np.sum(x * y, axis=-1)
    if kappa < 0:
        prod = prod - 2.0 * x[..., 0] * y[..., 0]
    return prod


def _lorentz_sq(v):
    return np.sum(v[..., 1:] ** 2, axis=-1) - v[..., 0] ** 2


def membership_error(x, kappa: float):
    """Violation of the membership constraint, relative to ``r**2``.

    For the hyperboloid a point on the lower sheet gets an infinite error.
    """
    x = np.asarray(x, dtype=float)
    if kappa == 0:
        return np.zeros(x.shape[:-1])
    r2 = radius(kappa) ** 2
    if kappa > 0:
        return np.abs(np.sum(x * x, axis=-1) - r2) / r2
    err = np.abs(_lorentz_sq(x) + r2) / r2
    return np.where(x[..., 0] > 0, err, np.inf)


def on_manifold(x, kappa: float, tol: float = TOL_MEMBERSHIP) -> bool:
    return bool(np.all(membership_error(x, kappa) <= tol))


def project_to_manifold(v, kappa: float):
    """Map ambient vectors onto ``M_kappa``.

    Spherical: rescale to norm ``r``.  Hyperbolic: keep the spatial
    coordinates ``v[1:]`` and recompute ``v[0]`` from the constraint.
    """
    v = np.array(v, dtype=float)
    if kappa == 0:
        return v
    r = radius(kappa)
    if kappa > 0:
        norm = np.linalg.norm(v, axis=-1, keepdims=True)
        if np.any(norm == 0):
            raise ManifoldError("cannot project the zero vector onto a sphere")
        return r * v / norm
    v[..., 0] = np.sqrt(r * r + np.sum(v[..., 1:] ** 2, axis=-1))
    return v


def _check_argument(arg, lo, hi, what):
    arg = np.asarray(arg, dtype=float)
    if np.any(arg < lo - TOL_ARGUMENT) or np.any(arg > hi + TOL_ARGUMENT):
        raise ManifoldError(
            f"{what} argument outside its domain; points are off the manifold")


def geodesic_distance(x, y, kappa: float):
    """Geodesic distance between ``x`` and ``y`` on ``M_kappa``.

    Mathematically ``r * arccos(<x,y>/r**2)`` on the sphere and
    ``r * arccosh(-<x,y>/r**2)`` on the hyperboloid.  The arguments are
    validated (and implicitly clamped within ``TOL_ARGUMENT``); the value is
    evaluated with chord formulas that stay accurate for nearby points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise ManifoldError(
            f"dimension mismatch: {x.shape[-1]} != {y.shape[-1]}")
    diff = x - y
    if kappa == 0:
        return np.sqrt(np.sum(diff * diff, axis=-1))
    r = radius(kappa)
    r2 = r * r
    if kappa > 0:
        _check_argument(np.sum(x * y, axis=-1) / r2, -1.0, 1.0, "arccos")
        chord = np.sqrt(np.sum(diff * diff, axis=-1))
        plus = x + y
        return 2.0 * r * np.arctan2(chord, np.sqrt(np.sum(plus * plus, axis=-1)))
    _check_argument(-scalar_product(x, y, kappa) / r2, 1.0, np.inf, "arccosh")
    chord = np.sqrt(np.maximum(_lorentz_sq(diff), 0.0))
    return 2.0 * r * np.arcsinh(chord / (2.0 * r))


def pairwise_distances(X, Y=None, kappa: float = 0.0):
    """Matrix of geodesic distances between the rows of ``X`` and ``Y``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = X if Y is None else np.atleast_2d(np.asarray(Y, dtype=float))
    dist = geodesic_distance(X[:, None, :], Y[None, :, :], kappa)
    if Y is X:
        dist = 0.5 * (dist + dist.T)
        np.fill_diagonal(dist, 0.0)
    return dist


def _tangent_norm(v, kappa):
    if kappa < 0:
        return np.sqrt(np.maximum(_lorentz_sq(v), 0.0))
    return np.sqrt(np.sum(v * v, axis=-1))


def _check_tangent(base, tangent, kappa):
    scale = np.linalg.norm(base) * np.linalg.norm(tangent) + radius(kappa) ** 2
    if abs(scalar_product(base, tangent, kappa)) > 1e-8 * scale:
        raise ManifoldError("tangent vector is not orthogonal to the base point")


def exp_map(base, tangent, kappa: float):
    """Exponential map at ``base`` applied to ``tangent``."""
    base = np.asarray(base, dtype=float)
    tangent = np.asarray(tangent, dtype=float)
    if base.shape != tangent.shape:
        raise ManifoldError("base and tangent must have the same shape")
    if kappa == 0:
        return base + tangent
    _check_tangent(base, tangent, kappa)
    r = radius(kappa)
    norm = float(_tangent_norm(tangent, kappa))
    if norm == 0.0:
        return project_to_manifold(base, kappa)
    theta = norm / r
    if kappa > 0:
        out = math.cos(theta) * base + (r * math.sin(theta) / norm) * tangent
    else:
        out = math.cosh(theta) * base + (r * math.sinh(theta) / norm) * tangent
    return project_to_manifold(out, kappa)


def log_map(base, target, kappa: float):
    """Inverse of :func:`exp_map`: the tangent vector at ``base`` pointing to
    ``target`` whose length is their geodesic distance.

    ``target`` may be a stack of points; one tangent vector per row is
    returned.
    """
    base = np.asarray(base, dtype=float)
    target = np.asarray(target, dtype=float)
    if kappa == 0:
        return target - base
    r = radius(kappa)
    r2 = r * r
    if kappa > 0:
        cos_t = np.sum(base * target, axis=-1) / r2
        _check_argument(cos_t, -1.0, 1.0, "arccos")
        u = target - cos_t[..., None] * base
        unorm = np.sqrt(np.sum(u * u, axis=-1))
        theta = np.arctan2(unorm / r, cos_t)
        if np.any((unorm <= 1e-12 * r) & (cos_t < 0)):
            raise ManifoldError("log map undefined for antipodal points")
    else:
        cosh_t = -scalar_product(base, target, kappa) / r2
        _check_argument(cosh_t, 1.0, np.inf, "arccosh")
        cosh_t = np.maximum(cosh_t, 1.0)
        u = target - cosh_t[..., None] * base
        unorm = np.sqrt(np.maximum(_lorentz_sq(u), 0.0))
        # u loses precision by cancellation when the points are far apart
        theta = np.where(cosh_t > 2.0, np.arccosh(cosh_t), np.arcsinh(unorm / r))
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(unorm > 0, r * theta / unorm, 1.0)
    return scale[..., None] * u


def frechet_mean(points, kappa: float, tol: float = 1e-9, max_iter: int = 1000):
    """Sample Fréchet mean of ``points`` on ``M_kappa``.

    Minimises the sum of squared geodesic distances with the Karcher
    iteration ``m <- exp_m(mean_i log_m(x_i))``, started from the projected
    Euclidean average.  On the sphere the points must lie in an open
    hemisphere for the minimiser to be unique.

    Parameters
    ----------
    points : (n, D) array_like
        Points on the manifold, one per row.
    kappa : float
        Curvature.
    tol : float
        Stop once the Riemannian norm of the update is below ``tol``.
    max_iter : int
        Iteration budget.

    Returns
    -------
    mean : (D,) ndarray

    Raises
    ------
    ValueError
        If ``points`` is empty.
    ConvergenceError
        If the iteration budget is exhausted.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] == 0 or points.size == 0:
        raise ValueError("cannot average an empty point set")
    euclid = points.mean(axis=0)
    if kappa == 0:
        return euclid
    try:
        mean = project_to_manifold(euclid, kappa)
    except ManifoldError:
        raise ConvergenceError(
            "points are not contained in an open hemisphere") from None
    for _ in range(max_iter):
        step = log_map(mean, points, kappa).mean(axis=0)
        # keep the update exactly tangent; drift accumulates otherwise
        step = step - (scalar_product(mean, step, kappa)
                       / scalar_product(mean, mean, kappa)) * mean
        mean = exp_map(mean, step, kappa)
        if _tangent_norm(step, kappa) <= tol:
            return mean
    raise ConvergenceError(
        f"Fréchet mean did not converge in {max_iter} iterations")


def frechet_objective(x, points, kappa: float) -> float:
    """Sum of squared geodesic distances from ``x`` to ``points``."""
    return float(np.sum(geodesic_distance(x, points, kappa) ** 2))
