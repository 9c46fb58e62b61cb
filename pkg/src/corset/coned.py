"""Coned-off Cayley balls, relative geodesics with penetration records,
and the Bounded Coset Penetration / fineness probes.

One cone vertex is added per peripheral coset meeting the ball, joined by
length-1/2 edges to every enumerated coset member.  Restricted to group
vertices the induced path metric is the relative metric d_{S u P} (a cone
passage costs 1).  Lengths are tracked in half-units internally and
reported as floats (exact halves).
"""

import heapq
import random

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from . import metric
from .errors import (
    DomainError,
    InsufficientRadiusError,
    InvariantViolationError,
    ResourceBudgetError,
    SpecError,
)


class Penetration:
    """One coset passage of a relative path."""

    __slots__ = ("peripheral_index", "coset_id", "enter", "exit")

    def __init__(self, peripheral_index, coset_id, enter, exit):
        self.peripheral_index = peripheral_index
        self.coset_id = coset_id
        self.enter = enter
        self.exit = exit

    @property
    def coset(self):
        return (self.peripheral_index, self.coset_id)

    def __repr__(self):
        return f"Penetration(P{self.peripheral_index}#{self.coset_id})"


class RelativePath:
    """Edge path in the coned-off graph with penetration bookkeeping.

    steps alternate group entries ("g", element) and cone entries
    ("c", peripheral_index, coset_id); entering/exiting vertices of every
    penetration are group elements.
    """

    def __init__(self, steps, half_length, penetrations):
        self.steps = steps
        self.half_length = half_length
        self.penetrations = penetrations

    @property
    def length(self):
        return self.half_length / 2

    @property
    def start(self):
        return self.steps[0][1]

    @property
    def end(self):
        return self.steps[-1][1]

    def group_vertices(self):
        return [s[1] for s in self.steps if s[0] == "g"]

    def penetrated(self):
        """coset -> Penetration map (geodesics penetrate each coset once)."""
        return {p.coset: p for p in self.penetrations}

    def __repr__(self):
        return f"RelativePath(len={self.length}, penetrations={len(self.penetrations)})"


class ConedBall:
    """Coned-off Cayley graph restricted to a ball, immutable after build.

    Vertex numbering: ball vertices keep their indices; cone vertices
    follow in first-seen scan order (scan = peripherals in order, ball
    vertices in shortlex order), which makes the numbering deterministic.

    Relative distances follow the margin discipline: a result is returned
    only when the witnessing geodesic keeps a distance >= 2 from the ball
    boundary, otherwise InsufficientRadiusError.
    """

    def __init__(self, ball, peripherals):
        self.ball = ball
        self.group = ball.group
        self.peripherals = peripherals
        nb = len(ball)
        self.n_group = nb
        cones = []
        cone_index = {}
        cone_members = []
        vertex_cone = np.full((nb, max(len(peripherals), 1)), -1, dtype=np.int64)
        for pi, P in enumerate(peripherals):
            for i, g in enumerate(ball.elements):
                cid = P.coset_id(g)
                key = (pi, cid)
                j = cone_index.get(key)
                if j is None:
                    j = len(cones)
                    cone_index[key] = j
                    cones.append(key)
                    cone_members.append([])
                cone_members[j].append(i)
                vertex_cone[i, pi] = j
        self.cones = cones
        self.cone_index = cone_index
        self.cone_members = cone_members
        self._vertex_cone = vertex_cone
        # adjacency in half-units: S-edge 2, cone edge 1
        adj = []
        for i in range(nb):
            row = [(j, 2, letter) for j, letter in ball.adj[i]]
            for pi in range(len(peripherals)):
                row.append((nb + int(vertex_cone[i, pi]), 1, None))
            adj.append(row)
        for members in cone_members:
            adj.append([(i, 1, None) for i in members])
        self.adj = adj
        self._csr = None
        self._field_cache = {}

    # -- vertex handles --------------------------------------------------------

    distance_scale = 2  # adjacency weights are half-units

    def __len__(self):
        return len(self.adj)

    def weighted_neighbors(self, i):
        return [(j, w) for j, w, _ in self.adj[i]]

    @property
    def radius(self):
        return self.ball.radius

    def group_vertex(self, g):
        return self.ball.vertex(g)

    def cone_vertex(self, pi, g):
        """Cone-vertex index for the P_pi-coset of g."""
        i = self.ball.vertex(g)
        return self.n_group + int(self._vertex_cone[i, pi])

    def is_cone(self, idx):
        return idx >= self.n_group

    def cone_label(self, coset):
        pi, cid = coset
        rep = self.peripherals[pi].coset_rep(cid)
        return f"P{pi}:{self.group.format(rep)}"

    def csr(self):
        if self._csr is None:
            rows, cols, data = [], [], []
            for i, row in enumerate(self.adj):
                for j, w, _ in row:
                    rows.append(i)
                    cols.append(j)
                    data.append(w)
            n = len(self.adj)
            self._csr = csr_matrix(
                (np.array(data, dtype=np.float64), (rows, cols)), shape=(n, n)
            )
        return self._csr

    def half_field(self, idx):
        """Half-unit distances from a vertex to all vertices (-1 unreachable)."""
        field = self._field_cache.get(idx)
        if field is None:
            raw = dijkstra(self.csr(), indices=idx, directed=False)
            field = np.where(np.isinf(raw), -1, raw).astype(np.int64)
            if len(self._field_cache) < 32:
                self._field_cache[idx] = field
        return field

    # -- relative metric --------------------------------------------------------

    def _margin_check(self, group_indices, what):
        bad = [i for i in group_indices if self.ball.dist[i] > self.radius - 2]
        if bad:
            raise InsufficientRadiusError(
                f"{what}: the path grazes the ball boundary "
                f"(margin < 2 at radius {self.radius}); enlarge the ball"
            )

    def relative_distance(self, g, h):
        """d_{S u P}(g, h) as an exact half-integer float."""
        return self.relative_geodesic(g, h).length

    def relative_geodesic(self, g, h):
        """Deterministic least relative geodesic with penetration records.

        Step order at a group vertex: S-letters in alphabet order, then
        cone moves by peripheral index; cone exits by shortlex member.
        The result is verified backtracking-free.
        """
        gi, hi = self.group_vertex(g), self.group_vertex(h)
        field = self.half_field(hi)
        if field[gi] < 0:
            raise InsufficientRadiusError("endpoints disconnected in the coned ball")
        path = [gi]
        i = gi
        while i != hi:
            for j, w, _ in self.adj[i]:
                if field[j] == field[i] - w:
                    path.append(j)
                    i = j
                    break
            else:  # pragma: no cover
                raise AssertionError("no distance-decreasing step; corrupt field")
        return self._finish_path(path)

    def _finish_path(self, path):
        """Convert an index path into a RelativePath, with margin and
        backtracking verification."""
        self._margin_check(
            [i for i in path if not self.is_cone(i)], "relative geodesic"
        )
        steps = []
        penetrations = []
        half_length = 0
        prev = None
        for k, i in enumerate(path):
            if self.is_cone(i):
                pi, cid = self.cones[i - self.n_group]
                steps.append(("c", pi, cid))
                enter = self.ball.elements[path[k - 1]]
                exit_ = self.ball.elements[path[k + 1]]
                penetrations.append(Penetration(pi, cid, enter, exit_))
            else:
                steps.append(("g", self.ball.elements[i]))
            if prev is not None:
                half_length += 1 if (self.is_cone(i) or self.is_cone(prev)) else 2
            prev = i
        rp = RelativePath(steps, half_length, penetrations)
        if not self._backtracking_free(path):
            raise InvariantViolationError(
                "relative geodesic returns to a coset after leaving it", instance=rp
            )
        return rp

    def _backtracking_free(self, path):
        left = {}
        for k, i in enumerate(path):
            if self.is_cone(i):
                left[self.cones[i - self.n_group]] = k
        for (pi, cid), k in left.items():
            j = self.cone_index[(pi, cid)]
            for idx in path[k + 2 :]:
                if not self.is_cone(idx) and self._vertex_cone[idx, pi] == j:
                    return False
        return True

    # -- base-field enumeration (one distance field serves every endpoint) ----

    def base_field(self, base):
        return self.half_field(self.group_vertex(base))

    def geodesics_from(self, base_field, base_idx, target_idx, cap=100_000):
        """All relative geodesics base -> target, enumerated by descending
        the base distance field from the target (deterministic order)."""
        if base_field[target_idx] < 0:
            raise InsufficientRadiusError("endpoints disconnected in the coned ball")
        out = []
        stack = [[target_idx]]
        while stack:
            path = stack.pop()
            i = path[-1]
            if i == base_idx:
                out.append(self._finish_path(path[::-1]))
                if len(out) > cap:
                    raise ResourceBudgetError(
                        f"more than {cap} relative geodesics", budget=cap
                    )
                continue
            for j, w, _ in reversed(self.adj[i]):
                if base_field[j] >= 0 and base_field[j] == base_field[i] - w:
                    stack.append(path + [j])
        return out

    def random_geodesic_from(self, base_field, base_idx, target_idx, rng):
        """One geodesic base -> target with seeded random branch choices."""
        if base_field[target_idx] < 0:
            raise InsufficientRadiusError("endpoints disconnected in the coned ball")
        path = [target_idx]
        i = target_idx
        while i != base_idx:
            steps = [
                j
                for j, w, _ in self.adj[i]
                if base_field[j] >= 0 and base_field[j] == base_field[i] - w
            ]
            i = steps[rng.randrange(len(steps))]
            path.append(i)
        return self._finish_path(path[::-1])

    def geodesic_counts(self, base_idx):
        """Number of relative geodesics from the base to every vertex (DP
        over the distance DAG, float64: exact up to 2**53, order-of-
        magnitude beyond; used only for probe budgeting)."""
        field = self.half_field(base_idx)
        order = np.argsort(field, kind="stable")
        counts = np.zeros(len(self.adj), dtype=np.float64)
        counts[base_idx] = 1
        for i in order:
            if field[i] <= 0 and i != base_idx:
                continue
            for j, w, _ in self.adj[i]:
                if field[j] == field[i] - w:
                    counts[i] += counts[j]
        return counts


def build_coned_ball(group, peripherals, radius, budget=None, ball=None):
    """Convenience constructor: enumerate the ball, then cone it."""
    from .balls import DEFAULT_VERTEX_BUDGET, CayleyBall

    if ball is None:
        ball = CayleyBall(group, radius, budget or DEFAULT_VERTEX_BUDGET)
    return ConedBall(ball, peripherals)


class BCPReport:
    """Observed coset-penetration discrepancies for quasigeodesic pairs."""

    def __init__(self, lam, L, mode, seed):
        self.lam = lam
        self.L = L
        self.mode = mode
        self.seed = seed
        self.pair_count = 0
        self.clause1 = {}  # coset label -> max enter/exit S-spread of unmatched penetrations
        self.clause2 = {}  # coset label -> max enter-enter / exit-exit S-distance
        self.witnesses = {}

    def record(self, clause, label, value, witness):
        table = self.clause1 if clause == 1 else self.clause2
        if value > table.get(label, -1):
            table[label] = value
            self.witnesses[(clause, label)] = witness

    @property
    def clause1_max(self):
        return max(self.clause1.values(), default=0)

    @property
    def clause2_max(self):
        return max(self.clause2.values(), default=0)

    @property
    def max_observed(self):
        return max(self.clause1_max, self.clause2_max)

    def rows(self):
        out = []
        for label in sorted(self.clause1):
            out.append((self.L, 1, label, self.clause1[label]))
        for label in sorted(self.clause2):
            out.append((self.L, 2, label, self.clause2[label]))
        return out

    def __repr__(self):
        return (
            f"BCPReport(lam={self.lam}, L={self.L}, mode={self.mode}, "
            f"clause1={self.clause1_max}, clause2={self.clause2_max})"
        )


def bcp_probe(
    coned,
    lam=1,
    L=None,
    seed=0,
    pair_cap=1_000_000,
    sample_size=4000,
    path_cap=4000,
    basepoints="identity",
):
    """Probe Bounded Coset Penetration on backtracking-free (lam,0)-quasi-
    geodesic pairs with a common start, endpoints in B(L), d_S(ends) <= 1.

    Exhaustive while the number of path pairs stays below pair_cap, then a
    seeded uniform sampler takes over (mode recorded in the report).
    basepoints: "identity" roots every pair at 1 (the coned graph is left
    invariant, so observed suprema are unaffected); "all" ranges the
    common start over B(L).
    """
    if lam < 1:
        raise SpecError(f"lam must be >= 1: {lam}")
    if lam > 3:
        raise SpecError("lam > 3 is out of the probe's supported range")
    radius = coned.radius
    if L is None:
        L = radius - 2
    if L > radius - 2:
        raise InsufficientRadiusError(
            f"L={L} needs ball radius >= {L + 2} for the margin discipline"
        )
    ball = coned.ball
    endpoints = [i for i in range(coned.n_group) if ball.dist[i] <= L]
    if basepoints == "identity":
        bases = [ball.vertex(coned.group.identity())]
    elif basepoints == "all":
        bases = list(endpoints)
    else:
        raise SpecError(f"basepoints must be 'identity' or 'all': {basepoints!r}")

    pairs = []
    for y in endpoints:
        pairs.append((y, y))
        seen = {y}
        for j, _ in ball.adj[y]:
            if j not in seen and ball.dist[j] <= L:
                seen.add(j)
                if j > y:
                    pairs.append((y, j))

    rng = random.Random(seed)
    report = BCPReport(lam, L, "exhaustive", seed)

    if lam > 1:
        for x in bases:
            _bcp_quasigeodesic_pass(coned, x, pairs, lam, path_cap, pair_cap, report)
        return report

    total = 0.0
    count_fields = {}
    for x in bases:
        counts = coned.geodesic_counts(x)
        count_fields[x] = counts
        for y, y2 in pairs:
            n1, n2 = counts[y], counts[y2]
            total += n1 * n2 if y != y2 else n1 * (n1 - 1) / 2
    exhaustive = total <= pair_cap
    report.mode = "exhaustive" if exhaustive else f"sampled({sample_size})"

    for x in bases:
        field = coned.half_field(x)
        counts = count_fields[x]
        for y, y2 in pairs:
            npairs = counts[y] * counts[y2] if y != y2 else counts[y] * (counts[y] - 1) / 2
            if npairs == 0:
                continue
            if exhaustive:
                paths1 = coned.geodesics_from(field, x, y, cap=path_cap)
                paths2 = (
                    paths1 if y == y2 else coned.geodesics_from(field, x, y2, cap=path_cap)
                )
                for i1, p1 in enumerate(paths1):
                    lo = i1 + 1 if y == y2 else 0
                    for p2 in paths2[lo:]:
                        _bcp_compare(coned, p1, p2, report)
                        report.pair_count += 1
            else:
                share = max(1, round(sample_size * npairs / total))
                for _ in range(share):
                    p1 = coned.random_geodesic_from(field, x, y, rng)
                    p2 = coned.random_geodesic_from(field, x, y2, rng)
                    _bcp_compare(coned, p1, p2, report)
                    report.pair_count += 1
    return report


def _bcp_compare(coned, p1, p2, report):
    group = coned.group
    pen1, pen2 = p1.penetrated(), p2.penetrated()
    for coset, p in pen1.items():
        label = coned.cone_label(coset)
        if coset not in pen2:
            report.record(1, label, metric.distance(group, p.enter, p.exit), (p1, p2))
        else:
            q = pen2[coset]
            val = max(
                metric.distance(group, p.enter, q.enter),
                metric.distance(group, p.exit, q.exit),
            )
            report.record(2, label, val, (p1, p2))
    for coset, q in pen2.items():
        if coset not in pen1:
            label = coned.cone_label(coset)
            report.record(1, label, metric.distance(group, q.enter, q.exit), (p2, p1))


def _bcp_quasigeodesic_pass(coned, x, pairs, lam, path_cap, pair_cap, report):
    by_end = {}
    for y, y2 in pairs:
        for e in {y, y2}:
            if e not in by_end:
                by_end[e] = _quasigeodesics(coned, x, e, lam, path_cap)
    for y, y2 in pairs:
        paths1, paths2 = by_end[y], by_end[y2]
        for i1, p1 in enumerate(paths1):
            lo = i1 + 1 if y == y2 else 0
            for p2 in paths2[lo:]:
                _bcp_compare(coned, p1, p2, report)
                report.pair_count += 1
                if report.pair_count > pair_cap:
                    raise ResourceBudgetError(
                        f"quasigeodesic pair count exceeded {pair_cap}", budget=pair_cap
                    )


def _quasigeodesics(coned, src, dst, lam, cap):
    """All backtracking-free (lam,0)-quasigeodesic edge paths src -> dst:
    l(p[i..j]) <= lam * d(p_i, p_j) for every index pair.  Distance fields
    are cached per on-path vertex, so this is for small balls only.
    """
    fields = {}

    def field(i):
        if i not in fields:
            fields[i] = coned.half_field(i)
        return fields[i]

    to_dst = field(dst)
    if to_dst[src] < 0:
        raise InsufficientRadiusError("endpoints disconnected in the coned ball")
    budget = lam * int(to_dst[src])
    out = []
    stack = [([src], [0])]
    while stack:
        path, lens = stack.pop()
        i = path[-1]
        if i == dst:
            if _path_is_backtracking_free(coned, path):
                out.append(coned._finish_path(path))
                if len(out) > cap:
                    raise ResourceBudgetError(
                        f"more than {cap} quasigeodesics", budget=cap
                    )
            continue
        for j, w, _ in reversed(coned.adj[i]):
            if j in path:  # (lam,0)-quasigeodesics never revisit a vertex
                continue
            new_len = lens[-1] + w
            remaining = int(to_dst[j])
            if remaining < 0 or new_len + remaining > budget:
                continue
            ok = True
            for k, v in enumerate(path):
                if new_len - lens[k] > lam * field(v)[j]:
                    ok = False
                    break
            if ok:
                stack.append((path + [j], lens + [new_len]))
    return out


def _path_is_backtracking_free(coned, path):
    left = {}
    for k, i in enumerate(path):
        if coned.is_cone(i):
            left[coned.cones[i - coned.n_group]] = k
    for (pi, cid), k in left.items():
        j = coned.cone_index[(pi, cid)]
        for idx in path[k + 2 :]:
            if not coned.is_cone(idx) and coned._vertex_cone[idx, pi] == j:
                return False
    return True


def fineness_probe(coned, u, v, length, radius):
    """Count embedded circuits (no repeated vertices) of the given length
    through the edge (u, v), restricted to the radius-r part of the coned
    ball; cone edges count 1/2.

    u, v are vertex indices (see group_vertex / cone_vertex).  A count
    that grows with the radius at fixed length is evidence against
    fineness.
    """
    half_total = round(2 * length)
    if abs(2 * length - half_total) > 1e-9 or half_total < 2:
        raise SpecError(f"circuit length must be a positive half-integer: {length}")
    edge_w = None
    for j, w, _ in coned.adj[u]:
        if j == v:
            edge_w = w
            break
    if edge_w is None:
        raise DomainError("(u, v) is not an edge of the coned ball")
    ball = coned.ball
    allowed = np.zeros(len(coned.adj), dtype=bool)
    for i in range(coned.n_group):
        allowed[i] = ball.dist[i] <= radius
    for j, members in enumerate(coned.cone_members):
        allowed[coned.n_group + j] = any(ball.dist[i] <= radius for i in members)
    if not (allowed[u] and allowed[v]):
        raise InsufficientRadiusError("edge endpoints outside the restricted radius")

    prune = _restricted_field(coned, u, allowed)
    budget = half_total - edge_w
    count = 0
    stack = [([v], 0)]
    while stack:
        path, used = stack.pop()
        i = path[-1]
        if i == u:
            if used == budget:
                count += 1
            continue
        seen_targets = set()
        for j, w, _ in coned.adj[i]:
            if not allowed[j] or j in seen_targets:
                continue
            seen_targets.add(j)  # collapse parallel adjacency entries
            if len(path) == 1 and j == u:
                continue  # would reuse the probed edge (or a parallel twin)
            if j == u:
                if used + w == budget:
                    stack.append((path + [j], used + w))
                continue
            if j in path:
                continue
            nu = used + w
            if nu + prune[j] > budget:
                continue
            stack.append((path + [j], nu))
    return count


def _restricted_field(coned, src, allowed):
    n = len(coned.adj)
    INF = 1 << 32
    field = np.full(n, INF, dtype=np.int64)
    heap = [(0, src)]
    field[src] = 0
    while heap:
        d, i = heapq.heappop(heap)
        if d > field[i]:
            continue
        for j, w, _ in coned.adj[i]:
            if not allowed[j]:
                continue
            nd = d + w
            if nd < field[j]:
                field[j] = nd
                heapq.heappush(heap, (nd, j))
    return field
