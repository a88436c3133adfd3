"""Prototype selection and out-of-sample embedding of new graphs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .embedding import EmbeddingError, RepresentabilityError
from .manifold import (
    pairwise_distances,
    project_to_manifold,
    radius,
)

#: diagonal regularisation of the normal equations
RIDGE = 1e-10


@dataclass(frozen=True)
class PrototypeSet:
    """Prototype graphs and their (fixed) positions on the manifold."""

    graphs: Sequence
    positions: np.ndarray
    kappa: float
    indices: tuple = field(default=())
    #: graph distances among the prototypes; centres the Euclidean problem
    dissimilarities: np.ndarray = None

    def __post_init__(self):
        positions = np.atleast_2d(np.asarray(self.positions, dtype=float))
        M = positions.shape[0]
        if M < 1:
            raise ValueError("a prototype set needs at least one prototype")
        if self.graphs is not None and len(self.graphs) != M:
            raise ValueError("graphs and positions are not index-aligned")
        positions.setflags(write=False)
        object.__setattr__(self, "positions", positions)
        if self.dissimilarities is not None:
            D = np.array(self.dissimilarities, dtype=float)
            if D.shape != (M, M):
                raise ValueError(f"prototype dissimilarities must be {M}x{M}")
            D.setflags(write=False)
            object.__setattr__(self, "dissimilarities", D)

    def __len__(self):
        return self.positions.shape[0]


def cover_radius(dist, centres) -> float:
    """Largest distance from a point to its nearest centre."""
    dist = np.asarray(dist)
    return float(dist[:, list(centres)].min(axis=1).max())


def kcentres(dist, M: int, seed: int = 0):
    """k-centres on a precomputed distance matrix.

    Farthest-first traversal from a seed-chosen first centre, then
    best-improvement single swaps while the cover radius strictly decreases.
    Ties go to the lowest index.

    Returns
    -------
    centres : list of int
    radius : float
    """
    dist = np.asarray(dist, dtype=float)
    n = dist.shape[0]
    if not 1 <= M <= n:
        raise ValueError(f"number of centres must be in [1, {n}], got {M}")
    rng = np.random.default_rng(seed)
    centres = [int(rng.integers(n))]
    nearest = dist[:, centres[0]].copy()
    while len(centres) < M:
        nxt = int(np.argmax(nearest))
        centres.append(nxt)
        nearest = np.minimum(nearest, dist[:, nxt])
    best = float(nearest.max())

    while best > 0:
        to_centres = dist[:, centres]
        order = np.argsort(to_centres, axis=1, kind="stable")
        first = to_centres[np.arange(n), order[:, 0]]
        second = (to_centres[np.arange(n), order[:, 1]] if M > 1
                  else np.full(n, np.inf))
        improved = None
        for pos in range(M):
            others = np.where(order[:, 0] == pos, second, first)
            radii = np.minimum(others[:, None], dist).max(axis=0)
            radii[centres] = np.inf
            j = int(np.argmin(radii))
            if radii[j] < best * (1 - 1e-12) and (
                    improved is None or radii[j] < improved[0]):
                improved = (float(radii[j]), pos, j)
        if improved is None:
            break
        best, pos, j = improved
        centres[pos] = j
    return centres, best


def select_prototypes_kcentres(X, M: int, kappa: float, seed: int = 0):
    """Indices of ``M`` k-centres of the configuration ``X`` on ``M_kappa``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if M > X.shape[0]:
        raise ValueError(f"cannot select {M} prototypes from {X.shape[0]} points")
    centres, _ = kcentres(pairwise_distances(X, kappa=kappa), M, seed)
    return centres


def dissimilarity_representation(g, prototypes: PrototypeSet | Sequence,
                                 dist: Callable) -> np.ndarray:
    """Vector of distances from ``g`` to each prototype, in prototype order."""
    graphs = prototypes.graphs if isinstance(prototypes, PrototypeSet) else prototypes
    return np.array([dist(g, r) for r in graphs], dtype=float)


def prototype_scalar_products(y, prototypes: PrototypeSet):
    """Design matrix ``A`` and target ``c`` of the out-of-sample problem.

    For curved manifolds ``A = X_R I_kappa`` and ``c`` holds the scalar
    products implied by ``y``.  In Euclidean space the unknown norm of the new
    point is eliminated by centring on the prototype mean; the returned
    ``offset`` must then be added to the solution.  The centring uses the
    squared prototype dissimilarities when they are known, which places
    training graphs exactly when every training graph is a prototype, and
    the embedded prototype norms otherwise.
    """
    y = np.asarray(y, dtype=float)
    X = prototypes.positions
    kappa = prototypes.kappa
    if y.shape != (X.shape[0],):
        raise ValueError(f"expected {X.shape[0]} dissimilarities, got {y.shape}")
    if np.any(y < 0):
        raise ValueError("dissimilarities must be nonnegative")
    if kappa == 0:
        centre = X.mean(axis=0)
        Xc = X - centre
        if prototypes.dissimilarities is not None:
            ref = np.mean(prototypes.dissimilarities ** 2, axis=0)
        else:
            ref = np.sum(Xc * Xc, axis=1)
        y2 = y * y
        c = -0.5 * ((y2 - y2.mean()) - (ref - ref.mean()))
        return Xc, c, centre
    r = radius(kappa)
    if kappa > 0:
        if y.max() > np.pi * r * (1 + 1e-12):
            raise RepresentabilityError(
                f"dissimilarity {y.max():.6g} exceeds pi*r = {np.pi * r:.6g}")
        c = r * r * np.cos(y / r)
        A = X.copy()
    else:
        c = -r * r * np.cosh(y / r)
        A = X.copy()
        A[:, 0] = -A[:, 0]
    return A, c, None


def _least_squares(A, c):
    """Solution of ``(A^T A + RIDGE I) x = A^T c``.

    Evaluated through the SVD of ``A``; forming ``A^T A`` would amplify
    round-off in the null space of rank-deficient prototype sets.
    """
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    return Vt.T @ ((s / (s * s + RIDGE)) * (U.T @ c))


def embed_out_of_sample(y, prototypes: PrototypeSet, max_iter: int = 50,
                        step: float = 0.1, rtol: float = 1e-10) -> np.ndarray:
    """Position of a new graph from its dissimilarity representation ``y``.

    Minimises ``||X_R I_kappa x - C_R||**2`` over the manifold: an ambient
    least-squares solve (ridge centred on the prototype mean), projection
    onto the manifold, then projected
    gradient descent with a step halved whenever the objective fails to
    decrease.
    """
    A, c, offset = prototype_scalar_products(y, prototypes)
    kappa = prototypes.kappa
    if not np.any(A):
        if offset is not None:
            return offset.copy()
        raise EmbeddingError("degenerate prototype configuration")
    if kappa == 0:
        return offset + _least_squares(A, c)
    # regularise towards the prototypes rather than the origin: when the
    # prototypes do not span the space the minimum-norm solution leaves the
    # manifold, while the anchored one stays near the data
    anchor = prototypes.positions.mean(axis=0)
    if np.any(anchor):
        anchor = project_to_manifold(anchor, kappa)
        x = anchor + _least_squares(A, c - A @ anchor)
    else:
        x = _least_squares(A, c)
    if kappa > 0 and not np.any(x):
        x = prototypes.positions[0].copy()
    x = project_to_manifold(x, kappa)

    def objective(z):
        res = A @ z - c
        return float(res @ res)

    f = objective(x)
    scale = np.linalg.norm(x)
    for _ in range(max_iter):
        grad = 2.0 * A.T @ (A @ x - c)
        gnorm = np.linalg.norm(grad)
        while step * gnorm > 1e-14 * scale:
            cand = x - step * grad
            if kappa > 0 and not np.any(cand):
                step *= 0.5
                continue
            cand = project_to_manifold(cand, kappa)
            f_new = objective(cand)
            if f_new < f:
                break
            step *= 0.5
        else:
            break
        change = (f - f_new) / max(f, np.finfo(float).tiny)
        x, f = cand, f_new
        if change < rtol:
            break
    return x


def embed_many(Y, prototypes: PrototypeSet) -> np.ndarray:
    """Out-of-sample positions for each row of ``Y``."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    return np.array([embed_out_of_sample(y, prototypes) for y in Y])
