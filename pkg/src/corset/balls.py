"""Finite Cayley-ball graphs: BFS enumeration, exact word-metric queries,
geodesic extraction, and Hausdorff distances on finite vertex sets.

Enumeration order is shortlex for the fixed alphabet order of the group
(g1 < g1^-1 < g2 < ...), which makes every derived artifact deterministic.
"""

from collections import deque

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import DomainError, InsufficientRadiusError, ResourceBudgetError

DEFAULT_VERTEX_BUDGET = 500_000


def ball_enumerate(group, radius, budget=DEFAULT_VERTEX_BUDGET, center=None):
    """BFS enumeration of the ball of the given radius around center.

    Returns (elements, dist): elements in shortlex discovery order,
    dist[i] = word distance from the center.  Raises ResourceBudgetError
    when the ball would exceed the vertex budget.
    """
    if radius < 0:
        raise DomainError(f"radius must be >= 0: {radius}")
    start = center if center is not None else group.identity()
    letters = group.letters()
    elements = [start]
    dist = [0]
    index = {start: 0}
    frontier = deque([start])
    level = 0
    while frontier and level < radius:
        level += 1
        next_frontier = deque()
        for g in frontier:
            for letter in letters:
                h = group.apply_letter(g, letter)
                if h not in index:
                    if len(elements) >= budget:
                        raise ResourceBudgetError(
                            f"ball of radius {radius} exceeds the vertex budget {budget}",
                            budget=budget,
                        )
                    index[h] = len(elements)
                    elements.append(h)
                    dist.append(level)
                    next_frontier.append(h)
        frontier = next_frontier
    return elements, dist


class GeodesicPath:
    """An edge path whose length realizes the distance of its endpoints."""

    __slots__ = ("vertices", "word")

    def __init__(self, vertices, word):
        self.vertices = list(vertices)
        self.word = tuple(word)

    @property
    def length(self):
        return len(self.word)

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        return f"GeodesicPath(len={self.length})"


class CayleyBall:
    """The full induced subgraph on a metric ball of a Cayley graph.

    Immutable after construction; all queries are read-only.  Distance
    queries are certified: a value is returned only when every geodesic
    between the endpoints provably stays inside the enumerated ball
    ((d(c,g)+d(c,h)+d(g,h))/2 <= radius), otherwise
    InsufficientRadiusError is raised -- never a wrong number.
    """

    def __init__(self, group, radius, budget=DEFAULT_VERTEX_BUDGET, center=None):
        self.group = group
        self.radius = radius
        self.center = center if center is not None else group.identity()
        self.elements, self.dist = ball_enumerate(group, radius, budget, self.center)
        self.index = {g: i for i, g in enumerate(self.elements)}
        letters = group.letters()
        adj = []
        for g in self.elements:
            row = []
            for letter in letters:
                h = group.apply_letter(g, letter)
                j = self.index.get(h)
                if j is not None:
                    row.append((j, letter))
            adj.append(row)
        self.adj = adj
        self._csr = None
        self._field_cache = {}

    # -- basic structure -----------------------------------------------------

    distance_scale = 1  # unit edges

    def __len__(self):
        return len(self.elements)

    def weighted_neighbors(self, i):
        """Neighbors as (index, weight) in canonical (alphabet) order."""
        return [(j, 1) for j, _ in self.adj[i]]

    def __contains__(self, g):
        return g in self.index

    def vertex(self, g):
        i = self.index.get(g)
        if i is None:
            raise InsufficientRadiusError(
                f"element {self.group.format(g)} is outside the ball of radius {self.radius}"
            )
        return i

    def edges(self):
        """Directed labelled edges (i, j, letter); each undirected edge
        appears once per orientation."""
        for i, row in enumerate(self.adj):
            for j, letter in row:
                yield i, j, letter

    def csr(self):
        if self._csr is None:
            rows, cols = [], []
            for i, row in enumerate(self.adj):
                for j, _ in row:
                    rows.append(i)
                    cols.append(j)
            n = len(self.elements)
            data = np.ones(len(rows), dtype=np.int8)
            self._csr = csr_matrix((data, (rows, cols)), shape=(n, n))
        return self._csr

    def distance_field(self, i):
        """Graph distances from vertex i to every ball vertex (-1 unreachable)."""
        field = self._field_cache.get(i)
        if field is None:
            raw = dijkstra(self.csr(), indices=i, unweighted=True, directed=False)
            field = np.where(np.isinf(raw), -1, raw).astype(np.int32)
            if len(self._field_cache) < 64:
                self._field_cache[i] = field
        return field

    # -- certified metric queries ---------------------------------------------

    def _certify(self, gi, hi, d):
        if d < 0:
            raise InsufficientRadiusError(
                "endpoints are disconnected inside the ball; enlarge the radius"
            )
        if self.dist[gi] + self.dist[hi] + d > 2 * self.radius:
            raise InsufficientRadiusError(
                f"distance {d} cannot be certified inside radius {self.radius}: "
                f"a geodesic might leave the enumerated ball"
            )

    def distance(self, g, h):
        """Exact word metric d_S(g, h), certified not to clip the ball."""
        gi, hi = self.vertex(g), self.vertex(h)
        d = int(self.distance_field(hi)[gi])
        self._certify(gi, hi, d)
        return d

    def geodesic(self, g, h):
        """The shortlex-least geodesic from g to h."""
        gi, hi = self.vertex(g), self.vertex(h)
        field = self.distance_field(hi)
        d = int(field[gi])
        self._certify(gi, hi, d)
        vertices = [self.elements[gi]]
        word = []
        i = gi
        while i != hi:
            for j, letter in self.adj[i]:
                if field[j] == field[i] - 1:
                    word.append(letter)
                    vertices.append(self.elements[j])
                    i = j
                    break
        return GeodesicPath(vertices, word)

    def all_geodesics(self, g, h, cap=10_000):
        """Every geodesic from g to h, in lexicographic order; errors if
        more than cap exist."""
        gi, hi = self.vertex(g), self.vertex(h)
        field = self.distance_field(hi)
        self._certify(gi, hi, int(field[gi]))
        out = []
        stack = [(gi, [self.elements[gi]], [])]
        while stack:
            i, vertices, word = stack.pop()
            if i == hi:
                out.append(GeodesicPath(vertices, word))
                if len(out) > cap:
                    raise ResourceBudgetError(
                        f"more than {cap} geodesics between "
                        f"{self.group.format(g)} and {self.group.format(h)}",
                        budget=cap,
                    )
                continue
            # push in reverse so pops happen in alphabet order
            steps = [(j, letter) for j, letter in self.adj[i] if field[j] == field[i] - 1]
            for j, letter in reversed(steps):
                stack.append((j, vertices + [self.elements[j]], word + [letter]))
        return out

    def random_geodesic(self, g, h, rng):
        """A geodesic with uniformly random branch choices (not uniform over
        geodesics; used for randomized probing)."""
        gi, hi = self.vertex(g), self.vertex(h)
        field = self.distance_field(hi)
        self._certify(gi, hi, int(field[gi]))
        vertices = [self.elements[gi]]
        word = []
        i = gi
        while i != hi:
            steps = [(j, letter) for j, letter in self.adj[i] if field[j] == field[i] - 1]
            j, letter = steps[rng.randrange(len(steps))]
            word.append(letter)
            vertices.append(self.elements[j])
            i = j
        return GeodesicPath(vertices, word)

    def multi_source_distances(self, sources, depth_cap=None):
        """BFS distances from a vertex-index set to every ball vertex.

        Values beyond depth_cap (if given) are left at -1.  Used for
        distance-to-subgroup and distance-to-coset fields.
        """
        n = len(self.elements)
        field = np.full(n, -1, dtype=np.int32)
        queue = deque()
        for i in sorted(sources):
            if field[i] < 0:
                field[i] = 0
                queue.append(i)
        while queue:
            i = queue.popleft()
            d = field[i]
            if depth_cap is not None and d >= depth_cap:
                continue
            for j, _ in self.adj[i]:
                if field[j] < 0:
                    field[j] = d + 1
                    queue.append(j)
        return field

    def hausdorff_distance(self, A, B):
        """Hausdorff distance between two nonempty finite vertex sets,
        certified against ball clipping."""
        if not A or not B:
            raise DomainError("hausdorff_distance needs nonempty sets")
        ai = [self.vertex(g) for g in A]
        bi = [self.vertex(g) for g in B]
        d_ab = self._directed_hausdorff(ai, bi)
        d_ba = self._directed_hausdorff(bi, ai)
        return max(d_ab, d_ba)

    def _directed_hausdorff(self, ai, bi):
        field = self.multi_source_distances(bi)
        max_b = max(self.dist[i] for i in bi)
        worst = 0
        for i in ai:
            d = int(field[i])
            if d < 0 or self.dist[i] + max_b + d > 2 * self.radius:
                raise InsufficientRadiusError(
                    "hausdorff distance cannot be certified inside the ball"
                )
            worst = max(worst, d)
        return worst
