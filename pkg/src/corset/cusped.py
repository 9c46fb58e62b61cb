"""Combinatorial horoballs and cusped (horoball-augmented) Cayley balls.

A horoball over a finite metric space (P, d) has vertices P x {0..D},
horizontal edges {(p,k),(q,k)} whenever 0 < d(p,q) <= 2^k, and vertical
edges {(p,k),(p,k+1)}, all of length one.  The cusped ball glues one
horoball onto every peripheral coset meeting a Cayley ball, along the
coset's left-translated internal metric.
"""

from collections import deque

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .balls import DEFAULT_VERTEX_BUDGET, CayleyBall
from .errors import (
    DomainError,
    InsufficientDepthError,
    InsufficientRadiusError,
    ResourceBudgetError,
)


def _check_metric(dist):
    n = len(dist)
    for i in range(n):
        if dist[i][i] != 0:
            raise DomainError("metric has a nonzero diagonal entry")
        for j in range(i + 1, n):
            if dist[i][j] != dist[j][i]:
                raise DomainError("metric is not symmetric")
            if dist[i][j] <= 0:
                raise DomainError("metric has a non-positive off-diagonal entry")
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if dist[i][j] > dist[i][k] + dist[k][j]:
                    raise DomainError(
                        f"triangle inequality fails at ({i},{j},{k})"
                    )


def _horizontal_pairs(dist, level):
    """Point pairs joined at this level: 0 < d(p,q) <= 2**level."""
    n = len(dist)
    bound = 1 << level
    return [(p, q) for p in range(n) for q in range(p + 1, n) if 0 < dist[p][q] <= bound]


class HoroballGraph:
    """Combinatorial horoball over a finite metric space."""

    distance_scale = 1

    def __init__(self, dist, depth, labels=None, check=True):
        if depth < 0:
            raise DomainError(f"depth must be >= 0: {depth}")
        if check:
            _check_metric(dist)
        self.base_dist = [list(row) for row in dist]
        self.depth = depth
        self.n_points = len(dist)
        self.labels = labels or [str(i) for i in range(self.n_points)]
        n, D = self.n_points, depth
        # vertex (p, k) -> k * n + p
        adj = [[] for _ in range(n * (D + 1))]
        for k in range(D + 1):
            off = k * n
            for p in range(n):
                row = adj[off + p]
                if k > 0:
                    row.append(((k - 1) * n + p, 1))
            for p, q in _horizontal_pairs(dist, k):
                adj[off + p].append((off + q, 1))
                adj[off + q].append((off + p, 1))
            if k < D:
                for p in range(n):
                    adj[off + p].append(((k + 1) * n + p, 1))
        # canonical neighbor order: down, horizontal (by point), up
        for row in adj:
            row.sort(key=lambda e: e[0])
        self.adj = adj
        self._csr = None

    def __len__(self):
        return self.n_points * (self.depth + 1)

    def vertex(self, point, level):
        if not 0 <= level <= self.depth:
            raise InsufficientDepthError(f"level {level} exceeds depth {self.depth}")
        return level * self.n_points + point

    def level(self, idx):
        return idx // self.n_points

    def point(self, idx):
        return idx % self.n_points

    def weighted_neighbors(self, i):
        return self.adj[i]

    def csr(self):
        if self._csr is None:
            rows, cols = [], []
            for i, row in enumerate(self.adj):
                for j, _ in row:
                    rows.append(i)
                    cols.append(j)
            n = len(self.adj)
            self._csr = csr_matrix(
                (np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n)
            )
        return self._csr

    def distance(self, u, v):
        """Exact graph distance (the whole horoball is enumerated, so no
        clipping certificate is needed)."""
        field = _bfs_field(self.adj, v)
        d = field[u]
        if d < 0:
            raise DomainError("horoball is disconnected at this depth")
        return int(d)

    def horizontal_edge_sets(self):
        """Per level, the point-pair set of horizontal edges (for the
        monotonicity invariant)."""
        return [set(_horizontal_pairs(self.base_dist, k)) for k in range(self.depth + 1)]


def build_horoball(points, dist, depth):
    """Combinatorial horoball over labelled points with an explicit
    distance table (validated)."""
    return HoroballGraph(dist, depth, labels=[str(p) for p in points])


def _bfs_field(adj, src):
    field = np.full(len(adj), -1, dtype=np.int64)
    field[src] = 0
    queue = deque([src])
    while queue:
        i = queue.popleft()
        for j, _ in adj[i]:
            if field[j] < 0:
                field[j] = field[i] + 1
                queue.append(j)
    return field


class CuspedBall:
    """Cayley ball with a combinatorial horoball glued along every
    peripheral coset meeting the ball.

    Vertices 0..len(ball)-1 are the depth-0 group vertices; horoball
    vertices follow per coset (scan order), per level 1..depth, members in
    shortlex order.  Deleting all vertices of depth >= 1 leaves exactly
    the Cayley ball when the peripheral generators are ambient generators
    (the shipped catalog); extra level-0 horizontal edges are added only
    when the internal metric demands them.
    """

    distance_scale = 1

    def __init__(self, ball, peripherals, depth, budget=DEFAULT_VERTEX_BUDGET):
        if depth < 0:
            raise DomainError(f"depth must be >= 0: {depth}")
        self.ball = ball
        self.group = ball.group
        self.peripherals = peripherals
        self.depth = depth
        nb = len(ball)
        self.n_group = nb

        cosets = []  # (pi, cid, member ball indices)
        seen = {}
        for pi, P in enumerate(peripherals):
            for i, g in enumerate(ball.elements):
                cid = P.coset_id(g)
                key = (pi, cid)
                j = seen.get(key)
                if j is None:
                    seen[key] = len(cosets)
                    cosets.append((pi, cid, [i]))
                else:
                    cosets[j][2].append(i)
        self.cosets = cosets

        adj = [[(j, 1) for j, _ in ball.adj[i]] for i in range(nb)]
        offsets = []
        total = nb
        internal = []
        for pi, cid, members in cosets:
            offsets.append(total)
            total += len(members) * depth
            if total > budget:
                raise ResourceBudgetError(
                    f"cusped ball exceeds the vertex budget {budget}", budget=budget
                )
            P = peripherals[pi]
            elements = [ball.elements[i] for i in members]
            internal.append(P.internal_distances(elements))
        adj.extend([] for _ in range(total - nb))
        self.offsets = offsets
        self._internal = internal

        # provenance: for horoball vertices, (coset index, member pos, level)
        self.provenance = [None] * total
        for ci, (pi, cid, members) in enumerate(cosets):
            dist = internal[ci]
            m = len(members)
            off = offsets[ci]

            def hv(pos, level, off=off, m=m):
                return off + (level - 1) * m + pos

            for level in range(1, depth + 1):
                for pos in range(m):
                    self.provenance[hv(pos, level)] = (ci, pos, level)
            # level-0 horizontal edges not already present as Cayley edges
            cayley_nbrs = [set(j for j, _ in ball.adj[i]) for i in members]
            for p, q in _horizontal_pairs(dist, 0):
                gi, gj = members[p], members[q]
                if gj not in cayley_nbrs[p]:
                    adj[gi].append((gj, 1))
                    adj[gj].append((gi, 1))
            # vertical edges from depth 0
            for pos in range(m):
                if depth >= 1:
                    adj[members[pos]].append((hv(pos, 1), 1))
                    adj[hv(pos, 1)].append((members[pos], 1))
            for level in range(1, depth + 1):
                for p, q in _horizontal_pairs(dist, level):
                    adj[hv(p, level)].append((hv(q, level), 1))
                    adj[hv(q, level)].append((hv(p, level), 1))
                if level < depth:
                    for pos in range(m):
                        adj[hv(pos, level)].append((hv(pos, level + 1), 1))
                        adj[hv(pos, level + 1)].append((hv(pos, level), 1))
        for row in adj:
            row.sort(key=lambda e: e[0])
        self.adj = adj
        self._csr = None
        self._field_cache = {}

    # -- handles -----------------------------------------------------------------

    def __len__(self):
        return len(self.adj)

    @property
    def radius(self):
        return self.ball.radius

    def weighted_neighbors(self, i):
        return self.adj[i]

    def vertex(self, g):
        """Depth-0 vertex of a group element."""
        return self.ball.vertex(g)

    def coset_index(self, pi, g):
        cid = self.peripherals[pi].coset_id(g)
        for ci, (pj, cj, _) in enumerate(self.cosets):
            if (pj, cj) == (pi, cid):
                return ci
        raise InsufficientRadiusError("coset does not meet the ball")

    def horoball_vertex(self, pi, g, level):
        """The level-k copy of g in its P_pi-coset horoball."""
        if level == 0:
            return self.vertex(g)
        if level > self.depth:
            raise InsufficientDepthError(f"level {level} exceeds depth {self.depth}")
        ci = self.coset_index(pi, g)
        _, _, members = self.cosets[ci]
        gi = self.ball.vertex(g)
        pos = members.index(gi)
        return self.offsets[ci] + (level - 1) * len(members) + pos

    def describe(self, idx):
        """(element, coset index or None, level) for any vertex."""
        if idx < self.n_group:
            return (self.ball.elements[idx], None, 0)
        ci, pos, level = self.provenance[idx]
        _, _, members = self.cosets[ci]
        return (self.ball.elements[members[pos]], ci, level)

    def anchor_dist(self, idx):
        """Ball-centre distance of the vertex's base-group anchor."""
        if idx < self.n_group:
            return self.ball.dist[idx]
        ci, pos, _ = self.provenance[idx]
        return self.ball.dist[self.cosets[ci][2][pos]]

    def level(self, idx):
        return 0 if idx < self.n_group else self.provenance[idx][2]

    def csr(self):
        if self._csr is None:
            rows, cols = [], []
            for i, row in enumerate(self.adj):
                for j, _ in row:
                    rows.append(i)
                    cols.append(j)
            n = len(self.adj)
            self._csr = csr_matrix(
                (np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n)
            )
        return self._csr

    def field(self, idx):
        f = self._field_cache.get(idx)
        if f is None:
            f = _bfs_field(self.adj, idx)
            if len(self._field_cache) < 32:
                self._field_cache[idx] = f
        return f

    # -- metric -------------------------------------------------------------------

    def _margin_check(self, indices, what):
        for i in indices:
            if self.anchor_dist(i) > self.radius - 2:
                raise InsufficientRadiusError(
                    f"{what}: geodesic within margin 2 of the ball boundary; "
                    "enlarge the radius"
                )

    def cusped_distance(self, u, v):
        """Exact BFS distance between vertex indices, with the margin
        certificate on the witnessing geodesic."""
        return len(self.cusped_geodesic(u, v)) - 1

    def cusped_geodesic(self, u, v):
        """Deterministic least geodesic u -> v as a list of vertex indices
        (use describe() for depth annotations)."""
        field = self.field(v)
        if field[u] < 0:
            raise InsufficientRadiusError("vertices disconnected in the cusped ball")
        path = [u]
        i = u
        while i != v:
            for j, _ in self.adj[i]:
                if field[j] == field[i] - 1:
                    path.append(j)
                    i = j
                    break
        self._margin_check(path, "cusped geodesic")
        return path

    def depth_zero_subgraph_equals_ball(self):
        """Invariant check: deleting depth >= 1 vertices leaves the Cayley
        ball exactly (vertex set and edge set)."""
        for i in range(self.n_group):
            kept = sorted(j for j, _ in self.adj[i] if j < self.n_group)
            orig = sorted(j for j, _ in self.ball.adj[i])
            if kept != orig:
                return False
        return True


def build_cusped_ball(group, peripherals, radius, depth, budget=DEFAULT_VERTEX_BUDGET, ball=None):
    if ball is None:
        ball = CayleyBall(group, radius, budget)
    return CuspedBall(ball, peripherals, depth, budget=budget)


def horoball_lemma_probe(cusped, L, cosets="basepoint"):
    """Observed analogues of the geodesics-versus-horoball bounds.

    M0: the longest cusped geodesic that stays inside a single horoball at
    depth <= L (depth-0 coset vertices included).  M2: over shortlex
    geodesics between depth-0 vertices of one coset, the farthest a
    depth-0 vertex of the geodesic strays from the endpoints.  Both values
    should stabilize as the ball radius grows.

    cosets: "basepoint" probes the identity's cosets (one per peripheral);
    "all" probes every coset (small balls only).
    """
    if cusped.depth < 3:
        raise InsufficientDepthError("lemma probe needs depth >= 3")
    if L > cusped.depth:
        raise InsufficientDepthError(f"L={L} exceeds depth {cusped.depth}")
    if cosets == "basepoint":
        one = cusped.ball.vertex(cusped.group.identity())
        chosen = []
        for pi in range(len(cusped.peripherals)):
            cid = cusped.peripherals[pi].coset_id(cusped.group.identity())
            for ci, (pj, cj, _) in enumerate(cusped.cosets):
                if (pj, cj) == (pi, cid):
                    chosen.append(ci)
    elif cosets == "all":
        chosen = list(range(len(cusped.cosets)))
    else:
        chosen = list(cosets)

    M0 = 0
    M2 = 0
    for ci in chosen:
        pi, cid, members = cusped.cosets[ci]
        m = len(members)
        off = cusped.offsets[ci]
        region = list(members)  # depth-0 coset vertices
        for level in range(1, min(L, cusped.depth) + 1):
            region.extend(off + (level - 1) * m + pos for pos in range(m))
        region_set = set(region)
        # M0: geodesic segments inside the region: some full-graph geodesic
        # between u,v stays in the region iff the region-restricted distance
        # equals the full distance
        for u in region:
            full = cusped.field(u)
            restricted = _restricted_bfs(cusped.adj, u, region_set)
            for v in region:
                if v > u and restricted[v] >= 0 and restricted[v] == full[v]:
                    M0 = max(M0, int(full[v]))
        # M2: depth-0 strays along geodesics between level-0 coset vertices
        for a in range(m):
            for b in range(a + 1, m):
                path = cusped.cusped_geodesic(members[a], members[b])
                n = len(path) - 1
                for pos, idx in enumerate(path):
                    if cusped.level(idx) == 0:
                        M2 = max(M2, min(pos, n - pos))
    return {"M0": M0, "M2": M2, "L": L, "cosets": len(chosen)}


def _restricted_bfs(adj, src, allowed):
    field = {src: 0}
    queue = deque([src])
    while queue:
        i = queue.popleft()
        for j, _ in adj[i]:
            if j in allowed and j not in field:
                field[j] = field[i] + 1
                queue.append(j)
    out = np.full(len(adj), -1, dtype=np.int64)
    for k, v in field.items():
        out[k] = v
    return out


def qc3_probe(cusped, H, n_max, mu_cap=64):
    """mu(n) profile: for pairs in H n B_S(n), walk the shortlex cusped
    geodesic and measure how far its depth-0 vertices stray from H in the
    word metric.  Requires an exact membership oracle on H.
    """
    if H.oracle is None:
        raise DomainError("qc3_probe needs an exact membership oracle for H")
    ball = cusped.ball
    h_indices = [i for i, g in enumerate(ball.elements) if H.oracle(g)]
    field_to_H = ball.multi_source_distances(h_indices, depth_cap=mu_cap)
    members = [i for i in h_indices if ball.dist[i] <= n_max]
    pair_mu = []  # (max endpoint norm, mu along the geodesic)
    for ai in range(len(members)):
        for bi in range(ai + 1, len(members)):
            u, v = members[ai], members[bi]
            path = cusped.cusped_geodesic(u, v)
            mu = 0
            for idx in path:
                if idx < cusped.n_group:
                    d = int(field_to_H[idx])
                    if d < 0:
                        raise InsufficientRadiusError(
                            "distance-to-H exceeded the probe cap; raise mu_cap"
                        )
                    if ball.dist[idx] + d > ball.radius:
                        raise InsufficientRadiusError(
                            "distance-to-H not certifiable inside the ball"
                        )
                    mu = max(mu, d)
            pair_mu.append((max(ball.dist[u], ball.dist[v]), mu))
    profile = {}
    for n in range(1, n_max + 1):
        profile[n] = max((mu for bound, mu in pair_mu if bound <= n), default=0)
    return {"mu": profile, "n_max": n_max, "pairs_base": "identity-ball"}
