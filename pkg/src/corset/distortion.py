"""Subgroup distortion tables, superadditive closures, dominance, and the
distortion sandwich f <= Delta <= f-bar built from induced peripheral
intersections.

All tables are exact on a finite range 0..N and never extrapolate; the
dominance relation f(r) <= C g(Cr+C) + Cr + C is checked on the largest
r-range the tables support, with clipping recorded.
"""

from collections import deque

from . import metric
from .balls import DEFAULT_VERTEX_BUDGET, ball_enumerate
from .errors import DomainError, ResourceBudgetError, SpecError
from .subgroups import SubgroupSpec


class GrowthFunction:
    """Integer-indexed monotone table f(0..N)."""

    def __init__(self, values, provenance="synthetic", monotonize=True):
        values = [int(v) for v in values]
        if any(v < 0 for v in values):
            raise DomainError("growth functions take non-negative values")
        self.monotonized = False
        if monotonize:
            for i in range(1, len(values)):
                if values[i] < values[i - 1]:
                    values[i] = values[i - 1]
                    self.monotonized = True
        self.values = values
        self.provenance = provenance

    @classmethod
    def from_callable(cls, fn, N, provenance="synthetic"):
        return cls([fn(n) for n in range(N + 1)], provenance=provenance)

    @property
    def N(self):
        return len(self.values) - 1

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __eq__(self, other):
        return isinstance(other, GrowthFunction) and self.values == other.values

    def __repr__(self):
        return f"GrowthFunction({self.values})"


def superadditive_closure(f):
    """Smallest superadditive majorant on 0..N: the max of sum f(n_i) over
    all compositions, via closure(n) = max(f(n), max_k closure(k) +
    closure(n-k))."""
    values = list(f.values if isinstance(f, GrowthFunction) else f)
    out = [values[0]]
    for n in range(1, len(values)):
        best = values[n]
        for k in range(1, n // 2 + 1):
            best = max(best, out[k] + out[n - k])
        out.append(best)
    return GrowthFunction(out, provenance="synthetic", monotonize=False)


def dominance_check(f, g, C_max):
    """Smallest C <= C_max with f(r) <= C g(Cr+C) + Cr + C on the widest
    r-range the g-table allows; None if no C works.  Returns a dict with
    the witness C, the tested range, and whether it was clipped."""
    fv = f.values if isinstance(f, GrowthFunction) else list(f)
    gv = g.values if isinstance(g, GrowthFunction) else list(g)
    Nf, Ng = len(fv) - 1, len(gv) - 1
    for C in range(1, C_max + 1):
        r_max = min(Nf, (Ng - C) // C)
        if r_max < 1:
            continue
        ok = all(fv[r] <= C * gv[C * r + C] + C * r + C for r in range(r_max + 1))
        if ok:
            return {
                "C": C,
                "r_range": (0, r_max),
                "clipped": r_max < Nf,
            }
    return {"C": None, "r_range": None, "clipped": None}


class DistortionTable:
    """Delta(n) = max |h|_T over subgroup elements with |h|_S <= n."""

    def __init__(self, subgroup_name, ambient_name, values):
        self.subgroup_name = subgroup_name
        self.ambient_name = ambient_name
        self.values = list(values)

    @property
    def N(self):
        return len(self.values) - 1

    def __getitem__(self, n):
        return self.values[n]

    def growth(self, provenance="measured"):
        return GrowthFunction(self.values, provenance=provenance, monotonize=False)

    def __repr__(self):
        return f"DistortionTable({self.subgroup_name} <= {self.ambient_name}, {self.values})"


def _table_from_pairs(pairs, N):
    """pairs: (ambient length, subgroup length); exact on the scanned set."""
    values = [0] * (N + 1)
    for s_len, t_len in pairs:
        if s_len <= N:
            values[s_len] = max(values[s_len], t_len)
    for n in range(1, N + 1):
        values[n] = max(values[n], values[n - 1])
    return values


def distortion_table(group, H, N, budget=DEFAULT_VERTEX_BUDGET, ball=None):
    """Exact distortion of (H, T) in (G, S) on 0..N.

    Needs an exact membership oracle on H; |h|_T is computed by BFS in
    the subgroup's abstract Cayley graph and errors (rather than
    truncates) if the enumeration budget is exceeded.
    """
    if H.oracle is None:
        raise DomainError("distortion_table needs an exact membership oracle for H")
    if ball is not None:
        elements, dist = ball.elements, ball.dist
        if ball.radius < N:
            raise DomainError(f"supplied ball has radius {ball.radius} < N={N}")
    else:
        elements, dist = ball_enumerate(group, N, budget)
    members = [(g, dist[i]) for i, g in enumerate(elements) if dist[i] <= N and H.oracle(g)]
    t_lengths = H.word_lengths([g for g, _ in members], budget=budget)
    pairs = [(s_len, t_lengths[g]) for g, s_len in members]
    return DistortionTable(
        H.name or repr(H), type(group).__name__, _table_from_pairs(pairs, N)
    )


def subgroup_pair_distortion(ambient_sub, inner_sub, N, budget=DEFAULT_VERTEX_BUDGET):
    """Distortion of inner_sub inside ambient_sub, both given as subgroup
    specs of one catalog group: ambient lengths are word lengths over
    ambient_sub's generators, inner lengths over inner_sub's generators."""
    if inner_sub.oracle is None:
        raise DomainError("subgroup_pair_distortion needs an oracle for the inner subgroup")
    amb_ball = ambient_sub.ball(N, budget=budget)
    members = [(g, alen) for g, alen in amb_ball.items() if inner_sub.oracle(g)]
    t_lengths = inner_sub.word_lengths([g for g, _ in members], budget=budget)
    pairs = [(alen, t_lengths[g]) for g, alen in members]
    return DistortionTable(
        inner_sub.name or repr(inner_sub),
        ambient_sub.name or repr(ambient_sub),
        _table_from_pairs(pairs, N),
    )


def distortion_sandwich_check(
    coned,
    H,
    N,
    C_max,
    budget=DEFAULT_VERTEX_BUDGET,
    probe_radii=None,
):
    """Check f <= Delta <= f-bar on 0..N, where f is the pointwise max of
    the distortions of the induced peripheral intersections O = H n gPg^-1
    (each measured in gPg^-1 with conjugated peripheral generators), f-bar
    the superadditive closure, and Delta the measured distortion of H.
    """
    from .qc import induced_peripheral_probe

    group = coned.group
    ball = coned.ball
    if ball.radius < N:
        raise DomainError(f"coned ball radius {ball.radius} < N={N}")
    probe = induced_peripheral_probe(coned, H, radii=probe_radii)
    o_tables = []
    for rec in probe["records"]:
        if rec["class"] != "growing":
            continue
        pi, cid = rec["coset"]
        P = coned.peripherals[pi]
        rep = P.coset_rep(cid)
        rinv = group.invert(rep)
        # gPg^-1 with the conjugated peripheral generators
        conj_gens = [
            group.multiply(group.multiply(rep, t), rinv) for t in P.gens
        ]
        ambient_sub = SubgroupSpec(group, conj_gens, name=f"conj[{rec['label']}]")
        inner_gens = rec["generators_found"]
        if not inner_gens:
            continue
        inner = SubgroupSpec(group, inner_gens, name=f"O[{rec['label']}]")
        if inner.oracle is None:
            # compose an exact oracle from H and the conjugated peripheral
            inner.oracle = lambda z, _P=P, _r=rep, _ri=rinv, _H=H: (
                _H.oracle(z) and _P.oracle(group.multiply(group.multiply(_ri, z), _r))
            )
        o_tables.append(subgroup_pair_distortion(ambient_sub, inner, N, budget=budget))
    if o_tables:
        f = GrowthFunction(
            [max(t[n] for t in o_tables) for n in range(N + 1)],
            provenance="measured",
            monotonize=False,
        )
    else:
        f = GrowthFunction([0] * (N + 1), provenance="measured", monotonize=False)
    fbar = superadditive_closure(f)
    delta = distortion_table(group, H, N, budget=budget, ball=ball)
    lower = dominance_check(f, delta.growth(), C_max)
    upper = dominance_check(delta.growth(), fbar, C_max)
    return {
        "f": f,
        "f_closure": fbar,
        "delta": delta,
        "lower": lower,
        "upper": upper,
        "holds": lower["C"] is not None and upper["C"] is not None,
        "induced": probe,
        "N": N,
        "C_max": C_max,
    }


def relative_subgroup_lengths(H, o_element_sets, targets, budget=DEFAULT_VERTEX_BUDGET):
    """Word lengths over T u O: BFS in H where one step multiplies by a
    subgroup generator or by any enumerated element of an induced
    peripheral subgroup (a coset jump inside H's own relative graph)."""
    amb = H.ambient
    jumps = []
    for oset in o_element_sets:
        jumps.extend(o for o in oset if o != amb.identity())
    remaining = set(targets)
    out = {}
    seen = {amb.identity(): 0}
    if amb.identity() in remaining:
        out[amb.identity()] = 0
        remaining.discard(amb.identity())
    frontier = deque([amb.identity()])
    level = 0
    while frontier and remaining:
        level += 1
        nxt = deque()
        for g in frontier:
            steps = [H.step(g, letter) for letter in H.letters()]
            steps.extend(amb.multiply(g, o) for o in jumps)
            for h in steps:
                if h not in seen:
                    if len(seen) >= budget:
                        raise ResourceBudgetError(
                            f"relative length search exceeded budget {budget}",
                            budget=budget,
                        )
                    seen[h] = level
                    nxt.append(h)
                    if h in remaining:
                        out[h] = level
                        remaining.discard(h)
        frontier = nxt
    if remaining:
        raise ResourceBudgetError(
            f"{len(remaining)} targets unreachable in the relative subgroup graph"
        )
    return out


def affine_embedding_bounds(pairs, C_max=64):
    """Smallest integer C with x/C - C <= y <= Cx + C over measured
    (domain, image) pairs; None if no C <= C_max works."""
    for C in range(1, C_max + 1):
        if all(x / C - C <= y <= C * x + C for x, y in pairs):
            return C
    return None
