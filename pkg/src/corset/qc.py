"""Word-metric quasiconvexity machinery: saturations, lifts, deep and
transition points of geodesics, quasiconvexity profiles, close-coset
bounds, and induced peripheral structures.

Conventions: r-neighborhoods written "< r" are open (a saturation at
threshold 0 is empty); the close-coset bound uses closed neighborhoods
"<= L" (an L of 0 means the cosets themselves).
"""

from collections import deque

import numpy as np

from . import metric
from .balls import GeodesicPath
from .errors import (
    DomainError,
    InsufficientRadiusError,
    InvariantViolationError,
    SpecError,
)


class Saturation:
    """A geodesic together with the peripheral cosets that pass within
    an S-distance < threshold of it."""

    def __init__(self, path, threshold, cosets):
        self.path = path
        self.threshold = threshold
        self.cosets = cosets  # [(peripheral index, coset id)]

    def __repr__(self):
        return f"Saturation(M={self.threshold}, cosets={len(self.cosets)})"


def saturation(coned, path, threshold):
    """All peripheral cosets at S-distance < threshold from the path.

    Exact: a coset achieving d < threshold has a member within
    max_dist(path) + threshold of the centre, so the margin precondition
    max_dist + threshold <= radius guarantees it was enumerated.
    """
    ball = coned.ball
    vertices = path.vertices if isinstance(path, GeodesicPath) else list(path)
    indices = [ball.vertex(v) for v in vertices]
    if max(ball.dist[i] for i in indices) + threshold > ball.radius:
        raise InsufficientRadiusError(
            f"saturation at threshold {threshold} needs margin {threshold} "
            f"inside radius {ball.radius}"
        )
    field = ball.multi_source_distances(indices, depth_cap=max(threshold - 1, 0))
    cosets = []
    for j, members in enumerate(coned.cone_members):
        d = min(int(field[i]) for i in members if field[i] >= 0) if any(
            field[i] >= 0 for i in members
        ) else -1
        if 0 <= d < threshold:
            cosets.append(coned.cones[j])
    return Saturation(path, threshold, cosets)


def lift(coned, rp):
    """Edge path in the Cayley graph obtained by replacing every coset
    passage of a relative path with the shortlex S-geodesic between its
    entering and exiting vertices; S-edges are kept as they are."""
    group = coned.group
    vertices = []
    word = []
    prev_group = None
    steps = rp.steps
    k = 0
    while k < len(steps):
        kind = steps[k][0]
        if kind == "g":
            g = steps[k][1]
            if prev_group is None:
                vertices.append(g)
            else:
                seg = metric.geodesic(group, prev_group, g)
                vertices.extend(seg.vertices[1:])
                word.extend(seg.word)
            prev_group = g
            k += 1
        else:
            # cone step: jump to the exiting vertex via an S-geodesic
            exit_ = steps[k + 1][1]
            seg = metric.geodesic(group, prev_group, exit_)
            vertices.extend(seg.vertices[1:])
            word.extend(seg.word)
            prev_group = exit_
            k += 2
    return GeodesicPath(vertices, word)


# -- deep and transition points --------------------------------------------------


class TransitionDecomposition:
    """Partition of a geodesic's vertices into alternating transition
    segments and deep components (index ranges are half-open)."""

    def __init__(self, path, eps, R, segments):
        self.path = path
        self.eps = eps
        self.R = R
        self.segments = segments  # ("transition"|"deep", start, stop, coset-or-None)

    def deep_components(self):
        return [s for s in self.segments if s[0] == "deep"]

    def transition_indices(self):
        out = []
        for kind, start, stop, _ in self.segments:
            if kind == "transition":
                out.extend(range(start, stop))
        return out

    def transition_vertices(self):
        return [self.path.vertices[i] for i in self.transition_indices()]

    def classification(self):
        """Per-vertex list: owning coset for deep vertices, None else."""
        out = [None] * len(self.path.vertices)
        for kind, start, stop, coset in self.segments:
            if kind == "deep":
                for i in range(start, stop):
                    out[i] = coset
        return out

    def __repr__(self):
        deep = len(self.deep_components())
        return f"TransitionDecomposition(eps={self.eps}, R={self.R}, deep_components={deep})"


def _near_cosets(coned, indices, eps):
    """For each path vertex, the set of cosets at S-distance < eps."""
    ball = coned.ball
    out = []
    for i in indices:
        near = set()
        if eps >= 1:
            # BFS around the vertex out to depth eps-1, collecting cosets
            seen = {i: 0}
            queue = deque([i])
            while queue:
                j = queue.popleft()
                for pi in range(len(coned.peripherals)):
                    near.add((pi, coned.cones[coned._vertex_cone[j, pi]][1]))
                if seen[j] + 1 < eps:
                    for k, _ in ball.adj[j]:
                        if k not in seen:
                            seen[k] = seen[j] + 1
                            queue.append(k)
            if ball.dist[i] + eps > ball.radius + 1:
                raise InsufficientRadiusError(
                    "deepness scan needs margin eps inside the ball"
                )
        out.append(near)
    return out


def vertex_deepness(coned, path, eps, R):
    """Per-vertex deepness classification by the definition: vertex i is
    deep in a coset iff it sits >= R from both endpoints and every path
    vertex within R of it lies in the open eps-neighborhood of the coset.

    Raises InvariantViolationError if any vertex is deep in two distinct
    cosets (the parameter regime is then invalid for this instance).
    """
    ball = coned.ball
    indices = [ball.vertex(v) for v in path.vertices]
    n = len(indices)
    near = _near_cosets(coned, indices, eps)
    candidates = set().union(*near) if near else set()
    deep = [None] * n
    for coset in sorted(candidates):
        flags = [coset in s for s in near]
        # prefix sums for O(1) window queries
        acc = np.cumsum([0] + [1 if f else 0 for f in flags])
        for i in range(n):
            if i < R or (n - 1 - i) < R:
                continue
            lo, hi = max(0, i - R), min(n - 1, i + R)
            if acc[hi + 1] - acc[lo] == hi - lo + 1:
                if deep[i] is not None and deep[i] != coset:
                    raise InvariantViolationError(
                        f"vertex {i} of the geodesic is ({eps},{R})-deep in two "
                        f"cosets {deep[i]} and {coset}; parameters violate the "
                        "disjointness regime on this instance",
                        instance=(path, i, deep[i], coset),
                    )
                deep[i] = coset
    return deep


def deep_decomposition(coned, path, eps, R):
    """Decompose a geodesic into transition segments and deep components."""
    deep = vertex_deepness(coned, path, eps, R)
    segments = []
    i = 0
    n = len(deep)
    while i < n:
        j = i
        while j < n and deep[j] == deep[i]:
            j += 1
        kind = "transition" if deep[i] is None else "deep"
        segments.append((kind, i, j, deep[i]))
        i = j
    return TransitionDecomposition(path, eps, R, segments)


def transition_points(coned, path, eps, R):
    """Vertices of the path that are deep in no peripheral coset."""
    return deep_decomposition(coned, path, eps, R).transition_vertices()


def _near_set_sparse(ball, sources, cap):
    """{vertex: distance} for the closed cap-neighborhood of the sources."""
    field = {i: 0 for i in sources}
    queue = deque(sorted(field))
    while queue:
        i = queue.popleft()
        if field[i] >= cap:
            continue
        for j, _ in ball.adj[i]:
            if j not in field:
                field[j] = field[i] + 1
                queue.append(j)
    return field


def isolation_diameter(coned, M):
    """Max diameter of the closed M-neighborhood intersection over
    distinct peripheral-coset pairs meeting the ball; the default deepness
    radius R is this value + 1."""
    ball = coned.ball
    buckets = {}
    for j, members in enumerate(coned.cone_members):
        for i in _near_set_sparse(ball, members, M):
            buckets.setdefault(i, []).append(j)
    pair_sets = {}
    for i, cosets in buckets.items():
        for a in range(len(cosets)):
            for b in range(a + 1, len(cosets)):
                pair_sets.setdefault((cosets[a], cosets[b]), []).append(i)
    diam = 0
    for verts in pair_sets.values():
        for a in range(len(verts)):
            for b in range(a + 1, len(verts)):
                d = metric.distance(
                    coned.group, ball.elements[verts[a]], ball.elements[verts[b]]
                )
                diam = max(diam, d)
    return diam


def default_deep_params(coned, eps=1):
    """(eps, R) with R = observed isolation diameter + 1."""
    return eps, isolation_diameter(coned, eps) + 1


# -- quasiconvexity profiles ----------------------------------------------------


class QCReport:
    """Per-radius quasiconvexity constants with a three-valued verdict."""

    def __init__(self, kind, subgroup_name, table, verdict, params, extras=None):
        self.kind = kind
        self.subgroup_name = subgroup_name
        self.table = table  # {n: value}
        self.verdict = verdict
        self.params = params
        self.extras = extras or {}

    def __repr__(self):
        return f"QCReport({self.kind}, {self.subgroup_name}, {self.verdict}, {self.table})"


def _verdict(table, window=3):
    """Three-valued verdict from the last `window` radii: a flat window is
    consistent-with-quasiconvex; a net increase across a non-decreasing
    window is growth-detected (profiles are cumulative maxima, so growth
    shows up as stairs rather than strict pointwise increase); anything
    else is inconclusive."""
    ns = sorted(table)
    if len(ns) < window:
        return "inconclusive"
    tail = [table[n] for n in ns[-window:]]
    if all(v == tail[0] for v in tail):
        return "consistent-with-quasiconvex"
    if tail[-1] > tail[0] and all(tail[i] <= tail[i + 1] for i in range(len(tail) - 1)):
        return "growth-detected"
    return "inconclusive"


def _subgroup_indices(ball, H):
    if H.oracle is None:
        raise DomainError("profiles need an exact membership oracle for the subgroup")
    return [i for i, g in enumerate(ball.elements) if H.oracle(g)]


def _distance_to_set_field(ball, indices, weights=None, group=None):
    """d(v, set) for every ball vertex; exact S-word metric (unit weights)
    or a weighted word metric when weights are given."""
    if weights is None:
        return ball.multi_source_distances(indices)
    import heapq

    n = len(ball)
    field = np.full(n, -1, dtype=np.int64)
    heap = [(0, i) for i in sorted(indices)]
    for _, i in heap:
        field[i] = 0
    heapq.heapify(heap)
    while heap:
        d, i = heapq.heappop(heap)
        if field[i] >= 0 and d > field[i]:
            continue
        for j, letter in ball.adj[i]:
            nd = d + weights[abs(letter) - 1]
            if field[j] < 0 or nd < field[j]:
                field[j] = nd
                heapq.heappush(heap, (nd, j))
    return field


def _certified(ball, idx, value):
    if value < 0 or ball.dist[idx] + value > ball.radius:
        raise InsufficientRadiusError(
            "distance to the subgroup cannot be certified inside the ball"
        )
    return int(value)


def qc5_profile(coned, H, n_max, d_metric="word", weights=None, window=3):
    """kappa(n) = over pairs of subgroup elements in B_S(n), the farthest
    (in the chosen proper metric d) that a group vertex of the
    deterministic least relative geodesic strays from the subgroup.

    Verdict: consistent-with-quasiconvex iff kappa plateaus over the last
    `window` radii; growth-detected iff strictly increasing there.
    """
    ball = coned.ball
    if n_max > ball.radius - 2:
        raise InsufficientRadiusError(
            f"qc5_profile at n_max={n_max} needs ball radius >= {n_max + 2}"
        )
    h_indices = _subgroup_indices(ball, H)
    field = _distance_to_set_field(ball, h_indices, weights=weights)
    members = [i for i in h_indices if ball.dist[i] <= n_max]
    # kappa(n) can never exceed the global field max, so once a level
    # reaches it every later level equals it too (kappa is monotone)
    global_cap = int(field.max()) if len(members) else 0
    table = {}
    running = 0
    for n in range(1, n_max + 1):
        if running >= global_cap > 0:
            table[n] = running
            continue
        level = [i for i in members if ball.dist[i] <= n]
        for bi in range(len(level)):
            v = level[bi]
            bound_v = ball.dist[v]
            hf = coned.half_field(v)
            for ai in range(bi):
                u = level[ai]
                if max(ball.dist[u], bound_v) < n:
                    continue  # the pair was already scanned at a lower level
                rp = _least_geodesic_between(coned, u, v, hf)
                for g in rp.group_vertices():
                    gi = ball.vertex(g)
                    running = max(running, _certified(ball, gi, field[gi]))
            if running >= global_cap > 0:
                break
        table[n] = running
    params = {
        "n_max": n_max,
        "d_metric": d_metric if weights is None else "weighted",
        "weights": weights,
        "radius": ball.radius,
        "window": window,
        "peripherals": len(coned.peripherals),
    }
    return QCReport("qc5", H.name or repr(H), table, _verdict(table, window), params)


def transition_criterion_check(coned, H, eps, R, n_max, window=3):
    """kappa'(n) over S-geodesics between subgroup pairs in B_S(n): the
    farthest a transition point strays from the subgroup, plus the
    Hausdorff distance between the transition set and the group vertices
    of the companion relative geodesic."""
    ball = coned.ball
    if n_max > ball.radius - 2:
        raise InsufficientRadiusError(
            f"transition check at n_max={n_max} needs ball radius >= {n_max + 2}"
        )
    h_indices = _subgroup_indices(ball, H)
    field = _distance_to_set_field(ball, h_indices)
    members = [i for i in h_indices if ball.dist[i] <= n_max]
    pair_values = []
    for bi in range(len(members)):
        v = members[bi]
        sfield = ball.distance_field(v)
        hf = coned.half_field(v)
        for ai in range(bi):
            u = members[ai]
            c = _ball_geodesic_margin(ball, u, v, sfield)
            decomposition = deep_decomposition(coned, c, eps, R)
            tp = decomposition.transition_vertices()
            worst = 0
            for g in tp:
                gi = ball.vertex(g)
                worst = max(worst, _certified(ball, gi, field[gi]))
            rp = _least_geodesic_between(coned, u, v, hf)
            hd = _small_hausdorff(ball, tp, rp.group_vertices()) if tp else 0
            pair_values.append((max(ball.dist[u], ball.dist[v]), worst, hd))
    table = {}
    hausdorff = {}
    for n in range(1, n_max + 1):
        in_range = [pv for pv in pair_values if pv[0] <= n]
        table[n] = max((pv[1] for pv in in_range), default=0)
        hausdorff[n] = max((pv[2] for pv in in_range), default=0)
    params = {
        "n_max": n_max,
        "eps": eps,
        "R": R,
        "radius": ball.radius,
        "window": window,
        "peripherals": len(coned.peripherals),
    }
    return QCReport(
        "transition",
        H.name or repr(H),
        table,
        _verdict(table, window),
        params,
        extras={"hausdorff": hausdorff},
    )


def _small_hausdorff(ball, A, B):
    """Hausdorff distance between small element sets: exact closed-form
    norms when the group has them, otherwise the certified ball routine."""
    if set(A) == set(B):
        return 0
    group = ball.group
    if group.norm(group.identity()) is None:
        return ball.hausdorff_distance(A, B)
    d_ab = max(min(metric.distance(group, a, b) for b in B) for a in A)
    d_ba = max(min(metric.distance(group, a, b) for a in A) for b in B)
    return max(d_ab, d_ba)


def _least_geodesic_between(coned, ui, vi, field_v):
    """Canonical relative geodesic for the ordered index pair using a
    precomputed distance field of the target."""
    if field_v[ui] < 0:
        raise InsufficientRadiusError("endpoints disconnected in the coned ball")
    path = [ui]
    i = ui
    while i != vi:
        for j, w, _ in coned.adj[i]:
            if field_v[j] == field_v[i] - w:
                path.append(j)
                i = j
                break
        else:  # pragma: no cover
            raise AssertionError("no distance-decreasing step; corrupt field")
    return coned._finish_path(path)


def _ball_geodesic_margin(ball, ui, vi, field=None):
    """Shortlex geodesic inside the ball under the margin discipline (the
    strict any-geodesic certificate would demand radius ~ |u|+|v|; the
    found path must instead keep margin 2 from the boundary)."""
    if field is None:
        field = ball.distance_field(vi)
    if field[ui] < 0:
        raise InsufficientRadiusError("endpoints disconnected inside the ball")
    indices = [ui]
    word = []
    i = ui
    while i != vi:
        for j, letter in ball.adj[i]:
            if field[j] == field[i] - 1:
                indices.append(j)
                word.append(letter)
                i = j
                break
        else:  # pragma: no cover
            raise AssertionError("no distance-decreasing step; corrupt field")
    if max(ball.dist[k] for k in indices) > ball.radius - 2:
        raise InsufficientRadiusError("S-geodesic grazes the ball boundary (margin < 2)")
    return GeodesicPath([ball.elements[k] for k in indices], word)


# -- close cosets and induced peripheral structure --------------------------------


def coset_intersection_bound(ball, x, H, y, K, L, n_max):
    """Observed L' with N_L(xH) n N_L(yK) <= N_L'(xHx^-1 n yKy^-1),
    scanned over B(n_max) with closed L-neighborhoods; reports the value
    at n_max and n_max - 1 for stability."""
    if H.oracle is None or K.oracle is None:
        raise DomainError("close-coset bound needs membership oracles")
    group = ball.group
    if n_max + L + 1 > ball.radius:
        raise InsufficientRadiusError(
            f"close-coset scan needs radius >= n_max + L + 1 = {n_max + L + 1}"
        )
    xinv, yinv = group.invert(x), group.invert(y)
    xh = [i for i, g in enumerate(ball.elements) if H.oracle(group.multiply(xinv, g))]
    yk = [i for i, g in enumerate(ball.elements) if K.oracle(group.multiply(yinv, g))]
    fx = ball.multi_source_distances(xh)
    fy = ball.multi_source_distances(yk)

    def conj_member(g):
        return H.oracle(group.multiply(group.multiply(xinv, g), x)) and K.oracle(
            group.multiply(group.multiply(yinv, g), y)
        )

    target = [i for i, g in enumerate(ball.elements) if conj_member(g)]
    ft = ball.multi_source_distances(target)
    values = {}
    zones = {}
    for n in (n_max - 1, n_max):
        zone = [
            i
            for i in range(len(ball))
            if ball.dist[i] <= n and 0 <= fx[i] <= L and 0 <= fy[i] <= L
        ]
        worst = 0
        for i in zone:
            worst = max(worst, _certified(ball, i, ft[i]))
        values[n] = worst
        zones[n] = len(zone)
    return {
        "L": L,
        "observed": values[n_max],
        "previous": values[n_max - 1],
        "stable": values[n_max] == values[n_max - 1],
        "zone_sizes": zones,
        "n_max": n_max,
    }


def _minimal_witnesses(group, candidates, cap=3):
    """Greedy generating set for the observed intersection elements:
    shortlex-ascending candidates are dropped when an exact oracle for the
    already-chosen witnesses certifies them as redundant."""
    from .membership import detect_oracle

    chosen = []
    oracle = None
    for g in candidates:
        if oracle is not None and oracle(g):
            continue
        chosen.append(g)
        if len(chosen) >= cap:
            break
        oracle = detect_oracle(group, chosen)
    return chosen


def induced_peripheral_probe(coned, H, radii=None, dedupe_radius=None):
    """For every peripheral coset meeting the ball, enumerate
    H n gPg^-1 inside the ball at several radii and classify it as
    trivial / finite-so-far / growing; growing intersections are the
    infinite-heuristic, and the strong flag is set when none grows.

    Records are deduplicated by H-conjugacy inside the ball (left
    translation of cosets by enumerated subgroup elements).
    """
    ball = coned.ball
    group = coned.group
    if H.oracle is None:
        raise DomainError("induced peripheral probe needs an oracle for H")
    if radii is None:
        r = ball.radius
        radii = [r - 2, r - 1, r]
    radii = sorted(radii)
    h_indices = _subgroup_indices(ball, H)
    if dedupe_radius is None:
        dedupe_radius = min(4, ball.radius)
    h_elements = [
        ball.elements[i] for i in h_indices if ball.dist[i] <= dedupe_radius
    ]

    records = []
    for j, (pi, cid) in enumerate(coned.cones):
        P = coned.peripherals[pi]
        rep = P.coset_rep(cid)
        rinv = group.invert(rep)
        # intersection members are subgroup elements, so scan those only
        hits = []
        for i in h_indices:
            g = ball.elements[i]
            if P.oracle(group.multiply(group.multiply(rinv, g), rep)):
                hits.append(i)
        counts = [sum(1 for i in hits if ball.dist[i] <= r) for r in radii]
        witnesses = _minimal_witnesses(
            group, [ball.elements[i] for i in hits if ball.dist[i] > 0]
        )
        if counts[-1] == 1:
            cls = "trivial"
        elif all(counts[k] < counts[k + 1] for k in range(len(counts) - 1)):
            cls = "growing"
        else:
            cls = "finite-so-far"
        records.append(
            {
                "coset": (pi, cid),
                "label": coned.cone_label((pi, cid)),
                "counts": dict(zip(radii, counts)),
                "class": cls,
                "generators_found": witnesses,
            }
        )

    # dedupe by H-conjugacy: h (gP) defines the same intersection up to
    # conjugacy in H
    canon = {}
    for rec in records:
        pi, cid = rec["coset"]
        P = coned.peripherals[pi]
        rep = P.coset_rep(cid)
        orbit = {(pi, cid)}
        for h in h_elements:
            hg = group.multiply(h, rep)
            if hg in ball.index:
                orbit.add((pi, P.coset_id(hg)))
        key = (pi, min(cid2 for _, cid2 in orbit))
        cur = canon.get(key)
        if cur is None or rec["coset"] < cur["coset"]:
            rec = dict(rec)
            rec["orbit_size_in_ball"] = len(orbit)
            canon[key] = rec
    deduped = [canon[k] for k in sorted(canon)]
    strong = not any(rec["class"] == "growing" for rec in deduped)
    return {
        "records": deduped,
        "strong_relatively_quasiconvex_flag": strong,
        "radii": radii,
        "subgroup": H.name or repr(H),
    }
