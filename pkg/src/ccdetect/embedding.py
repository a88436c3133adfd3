"""Embedding of a dissimilarity matrix onto a constant-curvature manifold.

The scalar products implied by the distances are factorised through their
eigen-decomposition.  Classical MDS covers the flat case; on curved manifolds
the eigenvalues are replaced by the closest vector ``b`` (on the line joining
the spectrum to ``(1/kappa) * 1``) that satisfies the sign constraints of the
geometry, and the configuration is rebuilt from the retained components.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .manifold import (
    ManifoldError,
    geometry,
    membership_error,
    pairwise_distances,
    project_to_manifold,
    radius,
)

logger = logging.getLogger(__name__)


class EmbeddingError(ValueError):
    """The requested embedding cannot be computed."""


class RepresentabilityError(EmbeddingError):
    """Distances larger than ``pi * r`` cannot be placed on the sphere."""


class InfeasibleEmbeddingError(EmbeddingError):
    """The constraint line misses the hyperbolic feasible set."""


@dataclass
class EigenPair:
    U: np.ndarray
    lam: np.ndarray


@dataclass
class EmbeddingSolution:
    X: np.ndarray
    kappa: float
    d: int
    b: np.ndarray
    distortion: float
    #: line parameter of the constrained spectrum (0 when ``b == lambda``)
    t: float = 0.0
    #: largest membership violation before projection (relative to r**2)
    projection_error: float = 0.0
    kept: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))


def check_dissimilarity(D) -> np.ndarray:
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise EmbeddingError("dissimilarity matrix must be square")
    if not np.all(np.isfinite(D)):
        raise EmbeddingError("dissimilarity matrix has non-finite entries")
    scale = max(1.0, float(np.abs(D).max(initial=0.0)))
    if np.any(D < 0):
        raise EmbeddingError("dissimilarity matrix has negative entries")
    if np.abs(D - D.T).max(initial=0.0) > 1e-9 * scale:
        raise EmbeddingError("dissimilarity matrix is not symmetric")
    if np.abs(np.diag(D)).max(initial=0.0) > 1e-9 * scale:
        raise EmbeddingError("dissimilarity matrix has a nonzero diagonal")
    return 0.5 * (D + D.T)


def scalar_product_matrix(D, kappa: float) -> np.ndarray:
    """Scalar products ``C`` implied by the distances ``D`` on ``M_kappa``.

    ``r**2 cos(D/r)`` for the sphere, ``-r**2 cosh(D/r)`` for the hyperboloid
    and the double-centred ``-J D**2 J / 2`` for Euclidean space.
    """
    D = check_dissimilarity(D)
    if kappa == 0:
        n = D.shape[0]
        J = np.eye(n) - np.full((n, n), 1.0 / n)
        C = -0.5 * J @ (D ** 2) @ J
        return 0.5 * (C + C.T)
    r = radius(kappa)
    if kappa > 0:
        if D.max(initial=0.0) > math.pi * r * (1 + 1e-12):
            raise RepresentabilityError(
                f"max distance {D.max():.6g} exceeds pi*r = {math.pi * r:.6g}")
        return r * r * np.cos(D / r)
    return -r * r * np.cosh(D / r)


def eigendecompose_sym(C) -> EigenPair:
    """Eigen-decomposition with ascending eigenvalues.

    Each eigenvector is signed so that its first nonzero component is
    positive, which makes the factorisation reproducible.
    """
    C = np.asarray(C, dtype=float)
    lam, U = np.linalg.eigh(0.5 * (C + C.T))
    tol = 1e-12 * max(1.0, np.abs(U).max())
    for j in range(U.shape[1]):
        nz = np.flatnonzero(np.abs(U[:, j]) > tol)
        if nz.size and U[nz[0], j] < 0:
            U[:, j] = -U[:, j]
    return EigenPair(U=U, lam=lam)


def _largest(values, k):
    """Indices of the ``k`` largest values; ties go to the lower index."""
    order = np.lexsort((np.arange(len(values)), -np.asarray(values)))
    return order[:k]


def pairwise_embedded(X, kappa):
    return pairwise_distances(X, kappa=kappa)


def distortion(X, D, kappa: float = 0.0) -> float:
    """Frobenius norm of the gap between embedded and given distances."""
    D = np.asarray(D, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] != D.shape[0]:
        raise EmbeddingError(
            f"configuration has {X.shape[0]} rows, D has {D.shape[0]}")
    return float(np.linalg.norm(pairwise_embedded(X, kappa) - D))


def embed_euclidean(D, d: int) -> EmbeddingSolution:
    """Classical MDS onto ``d`` dimensions (negative eigenvalues dropped)."""
    D = check_dissimilarity(D)
    n = D.shape[0]
    if not 1 <= d <= n:
        raise EmbeddingError(f"target dimension {d} must be in [1, {n}]")
    eig = eigendecompose_sym(scalar_product_matrix(D, 0.0))
    kept = _largest(eig.lam, d)
    b = np.maximum(eig.lam[kept], 0.0)
    X = eig.U[:, kept] * np.sqrt(b)
    return EmbeddingSolution(X=X, kappa=0.0, d=d, b=b,
                             distortion=distortion(X, D, 0.0), kept=kept)


def constraint_interval(lam, kappa: float):
    """Feasible range of ``t`` for ``b(t) = lam + t * (1/kappa - lam)``.

    Every point of the line satisfies the equality constraint
    ``U**2 b = (1/kappa) 1``; the inequality constraints are
    ``b >= 0`` on the sphere, and ``b[0] <= 0``, ``b[1:] >= 0`` on the
    hyperboloid.  Returns ``(lo, hi)`` with ``lo > hi`` when empty.
    """
    lam = np.asarray(lam, dtype=float)
    target = 1.0 / kappa
    slope = target - lam
    lo, hi = -np.inf, np.inf
    sign = np.ones_like(lam)
    if kappa < 0:
        sign[0] = -1.0
    # sign * (lam + t * slope) >= 0
    a = sign * slope
    c = sign * lam
    for ai, ci in zip(a, c):
        if ai > 0:
            lo = max(lo, -ci / ai)
        elif ai < 0:
            hi = min(hi, -ci / ai)
        elif ci < 0:
            return np.inf, -np.inf
    return lo, hi


def solve_constrained_spectrum(lam, kappa: float):
    """Closest feasible point to ``lam`` on the constraint line.

    Returns ``(b, t)``.
    """
    lam = np.asarray(lam, dtype=float)
    lo, hi = constraint_interval(lam, kappa)
    # absorb round-off on nearly-feasible spectra
    slack = 1e-12 * (1.0 + abs(lo) + abs(hi))
    if lo > hi + slack:
        raise InfeasibleEmbeddingError(
            f"no feasible spectrum on the constraint line for kappa={kappa:g} "
            f"(lambda_2={lam[1] if lam.size > 1 else float('nan'):.6g}, "
            f"1/kappa={1.0 / kappa:.6g})")
    t = float(min(max(0.0, lo), hi)) if lo <= hi else float(lo)
    b = lam + t * (1.0 / kappa - lam)
    if kappa > 0:
        b = np.maximum(b, 0.0)
    else:
        b[0] = min(b[0], 0.0)
        b[1:] = np.maximum(b[1:], 0.0)
    return b, t


def _embed_curved(D, kappa, d, hyperbolic):
    D = check_dissimilarity(D)
    n = D.shape[0]
    if d < 1 or d + 1 > n:
        raise EmbeddingError(f"need 1 <= d and d + 1 <= N, got d={d}, N={n}")
    eig = eigendecompose_sym(scalar_product_matrix(D, kappa))
    b, t = solve_constrained_spectrum(eig.lam, kappa)
    if hyperbolic:
        rest = _largest(b[1:], d) + 1
        kept = np.concatenate(([0], rest))
        X = eig.U[:, kept] * np.sqrt(np.abs(b[kept]))
        X[:, 0] = -X[:, 0]
        # the time-like column is a Perron vector; orient it upward
        if X[:, 0].sum() < 0:
            X[:, 0] = -X[:, 0]
    else:
        kept = _largest(b, d + 1)
        X = eig.U[:, kept] * np.sqrt(b[kept])
    err = membership_error(X, kappa)
    proj_err = float(np.max(np.where(np.isfinite(err), err, np.abs(
        X[:, 0]) + 1.0), initial=0.0))
    try:
        X = project_to_manifold(X, kappa)
    except ManifoldError as exc:
        raise EmbeddingError(str(exc)) from exc
    return EmbeddingSolution(X=X, kappa=kappa, d=d, b=b,
                             distortion=distortion(X, D, kappa), t=t,
                             projection_error=proj_err, kept=kept)


def embed_spherical(D, kappa: float, d: int) -> EmbeddingSolution:
    """Embed onto the ``d``-sphere of curvature ``kappa > 0``."""
    if kappa <= 0:
        raise EmbeddingError("spherical embedding needs kappa > 0")
    return _embed_curved(D, kappa, d, hyperbolic=False)


def embed_hyperbolic(D, kappa: float, d: int) -> EmbeddingSolution:
    """Embed onto the ``d``-dimensional hyperboloid of curvature ``kappa < 0``.

    Raises
    ------
    InfeasibleEmbeddingError
        When the constraint line does not meet the feasible set.
    """
    if kappa >= 0:
        raise EmbeddingError("hyperbolic embedding needs kappa < 0")
    return _embed_curved(D, kappa, d, hyperbolic=True)


def embed(D, kappa: float, d: int) -> EmbeddingSolution:
    """Dispatch on the sign of ``kappa``."""
    if kappa > 0:
        return embed_spherical(D, kappa, d)
    if kappa < 0:
        return embed_hyperbolic(D, kappa, d)
    return embed_euclidean(D, d)


def max_spherical_curvature(D) -> float:
    """Largest ``kappa`` whose sphere can hold every distance in ``D``."""
    dmax = float(np.max(D))
    if dmax <= 0:
        return math.inf
    return (math.pi / dmax) ** 2


def default_curvature_grid(D, n_side: int = 20, kappa_min: float = 1e-3,
                           kappa_max: float = 0.2) -> np.ndarray:
    """Log-spaced negative curvatures, zero, and log-spaced positive ones.

    Positive curvatures are capped so that ``r >= max(D) / pi``.
    """
    neg = -np.logspace(math.log10(kappa_max), math.log10(kappa_min), n_side)
    pos_max = min(kappa_max, max_spherical_curvature(D))
    pos_min = min(kappa_min, pos_max / 10.0)
    pos = np.logspace(math.log10(pos_min), math.log10(pos_max), n_side)
    return np.concatenate((neg, [0.0], pos))


@dataclass
class SweepResult:
    kappa: float
    curve: list  # [(kappa, distortion)]
    solutions: dict = field(default_factory=dict, repr=False)


def curvature_sweep(D, grid, d: int, keep_solutions: bool = False) -> SweepResult:
    """Embed ``D`` for every curvature in ``grid`` and pick the least distorted.

    Grid points that cannot be embedded (hyperbolic infeasibility, sphere too
    small for the distances) are kept in the curve with distortion ``inf``.
    """
    D = check_dissimilarity(D)
    grid = [float(k) for k in grid]
    if not grid:
        raise EmbeddingError("empty curvature grid")
    curve = []
    solutions = {}
    for kappa in grid:
        try:
            sol = embed(D, kappa, d)
        except (InfeasibleEmbeddingError, RepresentabilityError) as exc:
            logger.debug("kappa=%g skipped: %s", kappa, exc)
            curve.append((kappa, math.inf))
            continue
        curve.append((kappa, sol.distortion))
        if keep_solutions:
            solutions[kappa] = sol
    finite = [(dist, i) for i, (_, dist) in enumerate(curve) if math.isfinite(dist)]
    if not finite:
        raise EmbeddingError("no grid curvature admits an embedding")
    best = min(finite)[1]
    return SweepResult(kappa=curve[best][0], curve=curve, solutions=solutions)


def curve_to_csv(curve, log: bool = False) -> str:
    header = "kappa,log_distortion" if log else "kappa,distortion"
    lines = [header]
    for kappa, dist in curve:
        value = math.log(dist) if log and dist > 0 else dist
        lines.append(f"{kappa:.10g},{value:.10g}")
    return "\n".join(lines) + "\n"


__all__ = [
    "EigenPair", "EmbeddingError", "EmbeddingSolution",
    "InfeasibleEmbeddingError", "RepresentabilityError", "SweepResult",
    "constraint_interval", "curvature_sweep", "curve_to_csv",
    "default_curvature_grid", "distortion", "eigendecompose_sym", "embed",
    "embed_euclidean", "embed_hyperbolic", "embed_spherical", "geometry",
    "max_spherical_curvature", "scalar_product_matrix",
    "solve_constrained_spectrum",
]
