"""Incremental (Bowyer-Watson) Delaunay triangulation of planar points."""

from __future__ import annotations

import numpy as np

#: relative margin of the empty-circumcircle test
MARGIN = 1e-9


class TriangulationError(ValueError):
    pass


def _orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def incircle(a, b, c, d):
    """Positive iff ``d`` lies inside the circumcircle of CCW ``(a, b, c)``."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    return ((adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
            - (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady)
            + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady))


def _ccw(tri, pts):
    a, b, c = tri
    if _orient(pts[a], pts[b], pts[c]) < 0:
        return (a, c, b)
    return tri


def convex_hull_size(pts) -> int:
    """Number of points on the convex hull boundary, collinear ones included."""
    order = sorted(range(len(pts)), key=lambda i: (pts[i][0], pts[i][1]))

    def chain(idx):
        out = []
        for i in idx:
            while len(out) >= 2 and _orient(pts[out[-2]], pts[out[-1]], pts[i]) < 0:
                out.pop()
            out.append(i)
        return out

    lower, upper = chain(order), chain(order[::-1])
    return len(set(lower[:-1] + upper[:-1]))


def triangulate(points):
    """Triangles (CCW vertex index triples) of the Delaunay triangulation.

    A finite super-triangle can cut off hull triangles of nearly collinear
    point sets; the result is checked against the Euler count
    ``2n - h - 2`` and recomputed with a larger super-triangle if needed.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise TriangulationError("points must be an (n, 2) array")
    if n < 3:
        raise TriangulationError(f"need at least 3 points, got {n}")
    if len({tuple(p) for p in pts.tolist()}) < n:
        raise TriangulationError("duplicate points")
    expected = 2 * n - convex_hull_size(pts) - 2
    if expected <= 0:
        raise TriangulationError("degenerate point set (collinear)")
    for factor in (1e2, 1e4, 1e6):
        tris = _bowyer_watson(pts, factor)
        if len(tris) == expected:
            return _break_cocircular_ties(sorted(tris), pts)
    raise TriangulationError("triangulation failed; point set too degenerate")


def _bowyer_watson(pts, factor):
    n = len(pts)
    lo = pts.min(axis=0)
    span = float(np.max(pts.max(axis=0) - lo)) or 1.0
    mid = lo + 0.5 * span
    big = factor * span
    work = np.vstack([pts, [mid + [-big, -big], mid + [big, -big], mid + [0.0, big]]])
    scale = span ** 4
    tris = {(n, n + 1, n + 2)}

    for p in range(n):
        q = work[p]
        bad = [t for t in tris
               if incircle(work[t[0]], work[t[1]], work[t[2]], q) > MARGIN * scale]
        if not bad:
            # point lies on a circumcircle boundary of every containing
            # triangle; fall back to the triangle that contains it
            bad = [t for t in tris if min(
                _orient(work[t[0]], work[t[1]], q),
                _orient(work[t[1]], work[t[2]], q),
                _orient(work[t[2]], work[t[0]], q)) >= 0][:1]
        edge_count = {}
        for t in bad:
            for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
                key = (min(e), max(e))
                edge_count[key] = edge_count.get(key, 0) + 1
        tris.difference_update(bad)
        for t in bad:
            for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
                if edge_count[(min(e), max(e))] == 1:
                    tri = _ccw((e[0], e[1], p), work)
                    if _orient(work[tri[0]], work[tri[1]], work[tri[2]]) > 0:
                        tris.add(tri)

    return [t for t in tris if max(t) < n]


def _break_cocircular_ties(tris, pts):
    """Flip co-circular quadrilaterals to their lexicographically smaller
    diagonal so that the output does not depend on insertion order."""
    scale = float(np.ptp(pts, axis=0).max()) ** 4 or 1.0
    changed = True
    while changed:
        changed = False
        owner = {}
        for t in tris:
            for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
                owner.setdefault((min(e), max(e)), []).append(t)
        for (a, b), pair in sorted(owner.items()):
            if len(pair) != 2:
                continue
            t1, t2 = pair
            c = next(v for v in t1 if v not in (a, b))
            d = next(v for v in t2 if v not in (a, b))
            if (min(c, d), max(c, d)) >= (a, b):
                continue
            if abs(incircle(pts[t1[0]], pts[t1[1]], pts[t1[2]], pts[d])) > MARGIN * scale:
                continue
            # the flip must keep both new triangles non-degenerate
            new1, new2 = _ccw((c, d, a), pts), _ccw((c, d, b), pts)
            if (_orient(*pts[list(new1)]) <= 0 or _orient(*pts[list(new2)]) <= 0
                    or _orient(pts[c], pts[d], pts[a]) * _orient(pts[c], pts[d], pts[b]) >= 0):
                continue
            tris = sorted([t for t in tris if t not in (t1, t2)] + [new1, new2])
            changed = True
            break
    return tris


def delaunay_edges(points):
    """Sorted list of the Delaunay edges ``(i, j)``, ``i < j``."""
    edges = set()
    for t in triangulate(points):
        for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            edges.add((min(e), max(e)))
    return sorted(edges)


def circumcircle_violations(points, tris, margin: float = MARGIN):
    """Triangles whose circumcircle strictly contains another point."""
    pts = np.asarray(points, dtype=float)
    scale = float(np.ptp(pts, axis=0).max()) ** 4 or 1.0
    bad = []
    for t in tris:
        a, b, c = (pts[v] for v in _ccw(tuple(t), pts))
        for k in range(len(pts)):
            if k in t:
                continue
            if incircle(a, b, c, pts[k]) > margin * scale:
                bad.append((tuple(t), k))
    return bad
