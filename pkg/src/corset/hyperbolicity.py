"""Hyperbolicity estimation on finite graphs: thin-triangle defects with
shortlex geodesic sides, and four-point (Gromov product) defects.

Exhaustive mode scans all vertex triples (resp. quadruples) and is exact
for the finite graph and chosen method; sampled mode draws seeded triples
or pool-restricted quadruples and yields a lower bound.  Works on any of
the package's graph objects (Cayley, coned, cusped, horoball) through the
csr()/weighted_neighbors()/distance_scale protocol.
"""

import itertools
import math

import numpy as np
from scipy.sparse.csgraph import connected_components, dijkstra

from .errors import DomainError, ResourceBudgetError, SpecError

EXHAUSTIVE_THIN_LIMIT = 250
EXHAUSTIVE_FOUR_POINT_LIMIT = 130
DISTANCE_MATRIX_LIMIT = 4000


class DeltaEstimate:
    """Max thinness/four-point defect observed; a lower bound for the
    graph's true delta, exact (per method) in exhaustive mode."""

    def __init__(self, method, mode, value, size=None, seed=None, n_vertices=0, pool=None):
        self.method = method
        self.mode = mode
        self.value = value
        self.size = size
        self.seed = seed
        self.n_vertices = n_vertices
        self.pool = pool

    def __repr__(self):
        extra = f", size={self.size}, seed={self.seed}" if self.mode == "sampled" else ""
        return f"DeltaEstimate({self.method}, {self.mode}{extra}, value={self.value})"


def _require_connected(graph):
    ncomp, _ = connected_components(graph.csr(), directed=False)
    if ncomp != 1:
        raise DomainError("delta estimation needs a connected graph")


def _distance_matrix(graph):
    n = len(graph)
    if n > DISTANCE_MATRIX_LIMIT:
        raise ResourceBudgetError(
            f"distance matrix for {n} vertices exceeds the {DISTANCE_MATRIX_LIMIT} limit; "
            "use the four-point method with a source pool"
        )
    csr = graph.csr()
    out = np.empty((n, n), dtype=np.int32)
    chunk = max(1, (1 << 22) // max(n, 1))
    for start in range(0, n, chunk):
        idx = np.arange(start, min(start + chunk, n))
        block = dijkstra(csr, indices=idx, directed=False)
        if np.isinf(block).any():
            raise DomainError("delta estimation needs a connected graph")
        out[idx] = block.astype(np.int32)
    return out


def _geodesic_side(graph, D, u, v):
    """Vertex indices of the canonical (greedy-first) geodesic u -> v."""
    side = [u]
    i = u
    while i != v:
        target_col = D[:, v]
        for j, w in graph.weighted_neighbors(i):
            if target_col[j] == target_col[i] - w:
                side.append(j)
                i = j
                break
        else:  # pragma: no cover
            raise AssertionError("no distance-decreasing neighbor; corrupt matrix")
    return side


def _all_sides(graph, D):
    """Padded all-pairs canonical sides: SID[u, v] lists the side's vertex
    indices padded by repeating u (harmless for min/max reductions)."""
    n = len(graph)
    # every edge weighs >= 1 (half-)unit, so a side has at most D.max()+1 vertices
    lmax = int(D.max()) + 1
    SID = np.empty((n, n, lmax), dtype=np.int32)
    for u in range(n):
        SID[u, u] = u
    for u in range(n):
        for v in range(u + 1, n):
            side = _geodesic_side(graph, D, u, v)
            row = np.full(lmax, u, dtype=np.int32)
            row[: len(side)] = side
            SID[u, v] = row
            SID[v, u] = row
    return SID


def _thin_exhaustive(graph, D):
    n = len(graph)
    if n > EXHAUSTIVE_THIN_LIMIT:
        raise ResourceBudgetError(
            f"exhaustive thin-triangle scan limited to {EXHAUSTIVE_THIN_LIMIT} vertices "
            f"(got {n}); use sampled mode"
        )
    SID = _all_sides(graph, D)
    # PM[u, v, p] = d(p, side(u, v)): one n-vector per unordered pair
    PM = np.empty((n, n, n), dtype=np.int32)
    for u in range(n):
        PM[u, u] = D[u]
        for v in range(u + 1, n):
            vec = D[:, SID[u, v]].min(axis=1)
            PM[u, v] = vec
            PM[v, u] = vec
    best = 0
    for x in range(n):
        for y in range(x + 1, n - 1):
            Z = np.arange(y + 1, n)
            A = SID[x, y]
            # side A against side(y,z) u side(x,z), vectorized over z
            dA = np.minimum(PM[y, Z][:, A], PM[x, Z][:, A]).max(axis=1)
            B = SID[y, Z]
            dB = np.minimum(PM[x, y][B], np.take_along_axis(PM[x, Z], B, axis=1)).max(axis=1)
            C = SID[x, Z]
            dC = np.minimum(PM[x, y][C], np.take_along_axis(PM[y, Z], C, axis=1)).max(axis=1)
            local = np.maximum(np.maximum(dA, dB), dC).max() if len(Z) else 0
            best = max(best, int(local))
    return best / graph.distance_scale


def _thin_triple_defect(graph, D, sides, x, y, z):
    def side(u, v):
        key = (u, v) if u <= v else (v, u)
        s = sides.get(key)
        if s is None:
            s = np.array(_geodesic_side(graph, D, key[0], key[1]), dtype=np.int32)
            sides[key] = s
        return s

    A, B, C = side(x, y), side(y, z), side(x, z)
    dA = D[np.ix_(A, np.concatenate([B, C]))].min(axis=1).max()
    dB = D[np.ix_(B, np.concatenate([A, C]))].min(axis=1).max()
    dC = D[np.ix_(C, np.concatenate([A, B]))].min(axis=1).max()
    return int(max(dA, dB, dC))


def _thin_sampled(graph, D, size, seed):
    n = len(graph)
    total = math.comb(n, 3)
    if size >= total:
        return _thin_exhaustive(graph, D), total
    rng = np.random.default_rng(seed)
    sides = {}
    best = 0
    done = 0
    while done < size:
        batch = rng.integers(0, n, size=(min(size - done, 4096), 3))
        batch = batch[
            (batch[:, 0] != batch[:, 1])
            & (batch[:, 0] != batch[:, 2])
            & (batch[:, 1] != batch[:, 2])
        ]
        for x, y, z in batch:
            best = max(best, _thin_triple_defect(graph, D, sides, int(x), int(y), int(z)))
        done += len(batch)
    return best / graph.distance_scale, size


def _four_point_defects(D, quads):
    w, x, y, z = quads[:, 0], quads[:, 1], quads[:, 2], quads[:, 3]
    s1 = D[w, x] + D[y, z]
    s2 = D[w, y] + D[x, z]
    s3 = D[w, z] + D[x, y]
    stack = np.stack([s1, s2, s3])
    top = stack.max(axis=0)
    mid = stack.sum(axis=0) - top - stack.min(axis=0)
    return (top - mid) / 2.0


def _four_point_exhaustive(graph, D):
    n = len(graph)
    if n > EXHAUSTIVE_FOUR_POINT_LIMIT:
        raise ResourceBudgetError(
            f"exhaustive four-point scan limited to {EXHAUSTIVE_FOUR_POINT_LIMIT} "
            f"vertices (got {n}); use sampled mode"
        )
    best = 0.0
    combos = itertools.combinations(range(n), 4)
    while True:
        chunk = list(itertools.islice(combos, 200_000))
        if not chunk:
            break
        quads = np.array(chunk, dtype=np.int64)
        best = max(best, float(_four_point_defects(D, quads).max()))
    return best / graph.distance_scale


def _four_point_sampled(graph, size, seed, pool):
    n = len(graph)
    rng = np.random.default_rng(seed)
    pool_size = min(n, pool)
    if pool_size < 4:
        raise SpecError("four-point sampling needs a pool of at least 4 vertices")
    pool_idx = np.sort(rng.choice(n, size=pool_size, replace=False))
    fields = dijkstra(graph.csr(), indices=pool_idx, directed=False)
    if np.isinf(fields).any():
        raise DomainError("delta estimation needs a connected graph")
    PD = fields[:, pool_idx]
    total = math.comb(pool_size, 4)
    if size >= total:
        best = 0.0
        combos = itertools.combinations(range(pool_size), 4)
        while True:
            chunk = list(itertools.islice(combos, 200_000))
            if not chunk:
                break
            best = max(best, float(_four_point_defects(PD, np.array(chunk)).max()))
        return best / graph.distance_scale, total, pool_size
    best = 0.0
    done = 0
    while done < size:
        batch = rng.integers(0, pool_size, size=(min(size - done, 65_536), 4))
        s = np.sort(batch, axis=1)
        batch = batch[(np.diff(s, axis=1) != 0).all(axis=1)]
        if len(batch):
            best = max(best, float(_four_point_defects(PD, batch).max()))
        done += len(batch) if len(batch) else 1
    return best / graph.distance_scale, size, pool_size


def delta_estimate(graph, method="thin-triangle", mode="exhaustive", size=None, seed=0, pool=512):
    """Estimate the hyperbolicity constant of a finite graph.

    method: "thin-triangle" (max distance from a side vertex to the union
    of the other two sides, canonical geodesic sides) or "four-point"
    (max Gromov-product defect).  mode: "exhaustive" (exact for the finite
    graph and method) or "sampled" (seeded; lower bound; thin-triangle
    samples triples from the whole graph, four-point samples quadruples
    from a seeded source pool of the given size).
    """
    if method not in ("thin-triangle", "four-point"):
        raise SpecError(f"unknown method {method!r}")
    if mode not in ("exhaustive", "sampled"):
        raise SpecError(f"unknown mode {mode!r}")
    if mode == "sampled" and (size is None or size < 1):
        raise SpecError("sampled mode needs a positive size")
    _require_connected(graph)
    n = len(graph)
    if (method == "thin-triangle" and n < 3) or (method == "four-point" and n < 4):
        return DeltaEstimate(method, mode, 0.0, size=size, seed=seed, n_vertices=n)
    if method == "thin-triangle":
        D = _distance_matrix(graph)
        if mode == "exhaustive":
            value = _thin_exhaustive(graph, D)
            return DeltaEstimate(method, mode, value, n_vertices=n)
        value, used = _thin_sampled(graph, D, size, seed)
        return DeltaEstimate(method, mode, value, size=used, seed=seed, n_vertices=n)
    if mode == "exhaustive":
        D = _distance_matrix(graph)
        value = _four_point_exhaustive(graph, D)
        return DeltaEstimate(method, mode, value, n_vertices=n)
    value, used, pool_size = _four_point_sampled(graph, size, seed, pool)
    return DeltaEstimate(
        method, mode, value, size=used, seed=seed, n_vertices=n, pool=pool_size
    )
