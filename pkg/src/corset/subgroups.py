"""Subgroup specifications, membership queries, and peripheral structures.

A SubgroupSpec is a finite generator list inside an ambient marked group,
with an exact membership oracle when the catalog provides one and a BFS
semi-decision otherwise.  PeripheralSubgroup adds the data the relative
geometries need: a mandatory exact oracle, the subgroup's own word metric
(optionally weighted), and a per-run coset-id registry.
"""

import heapq
import json
from collections import deque

from .balls import DEFAULT_VERTEX_BUDGET
from .errors import DomainError, ResourceBudgetError, SpecError
from .membership import detect_oracle


class MembershipAnswer:
    """yes(witness word) / no / no-within-radius."""

    __slots__ = ("verdict", "witness")

    def __init__(self, verdict, witness=None):
        self.verdict = verdict
        self.witness = witness

    def __bool__(self):
        return self.verdict == "yes"

    def __repr__(self):
        if self.verdict == "yes":
            return f"yes(witness length {len(self.witness)})"
        return self.verdict


class SubgroupSpec:
    """H = <generators> inside an ambient catalog group."""

    def __init__(self, ambient, generators, name=None):
        self.ambient = ambient
        self.gens = []
        for g in generators:
            ambient.check_element(g)
            if g != ambient.identity() and g not in self.gens:
                self.gens.append(g)
        self.name = name
        self.oracle = detect_oracle(ambient, self.gens)

    @classmethod
    def from_words(cls, ambient, words, name=None):
        return cls(ambient, [ambient.parse(w) for w in words], name=name)

    @classmethod
    def from_spec(cls, ambient, spec, name=None):
        if isinstance(spec, str):
            spec = json.loads(spec)
        words = spec.get("generators")
        if not isinstance(words, list) or not all(isinstance(w, str) for w in words):
            raise SpecError(f"subgroup spec needs a 'generators' list of word strings: {spec!r}")
        return cls.from_words(ambient, words, name=name or spec.get("name"))

    def __repr__(self):
        label = self.name or ", ".join(self.ambient.format(g) for g in self.gens)
        return f"Subgroup<{label}>"

    # -- T-metric enumeration ------------------------------------------------

    def letters(self):
        out = []
        for i in range(1, len(self.gens) + 1):
            out.append(i)
            out.append(-i)
        return out

    def step(self, g, letter):
        gen = self.gens[abs(letter) - 1]
        if letter < 0:
            gen = self.ambient.invert(gen)
        return self.ambient.multiply(g, gen)

    def ball(self, radius, budget=DEFAULT_VERTEX_BUDGET):
        """{element: |element|_T} for the T-ball of the given radius, BFS
        over the subgroup's own generators evaluated in the ambient group."""
        out = {self.ambient.identity(): 0}
        frontier = deque([self.ambient.identity()])
        level = 0
        while frontier and level < radius:
            level += 1
            next_frontier = deque()
            for g in frontier:
                for letter in self.letters():
                    h = self.step(g, letter)
                    if h not in out:
                        if len(out) >= budget:
                            raise ResourceBudgetError(
                                f"subgroup ball of radius {radius} exceeds budget {budget}",
                                budget=budget,
                            )
                        out[h] = level
                        next_frontier.append(h)
            frontier = next_frontier
        return out

    def word_lengths(self, targets, budget=DEFAULT_VERTEX_BUDGET):
        """Exact |h|_T for each target (all must lie in H); grows the T-ball
        until every target is found, erroring on budget rather than truncating."""
        remaining = set(targets)
        out = {}
        seen = {self.ambient.identity(): 0}
        if self.ambient.identity() in remaining:
            out[self.ambient.identity()] = 0
            remaining.discard(self.ambient.identity())
        frontier = deque([self.ambient.identity()])
        level = 0
        while frontier and remaining:
            level += 1
            next_frontier = deque()
            for g in frontier:
                for letter in self.letters():
                    h = self.step(g, letter)
                    if h not in seen:
                        if len(seen) >= budget:
                            raise ResourceBudgetError(
                                f"T-length search exceeded budget {budget} at radius {level}",
                                budget=budget,
                            )
                        seen[h] = level
                        next_frontier.append(h)
                        if h in remaining:
                            out[h] = level
                            remaining.discard(h)
            frontier = next_frontier
        if remaining:
            raise ResourceBudgetError(
                f"{len(remaining)} elements were not reached in the subgroup "
                "Cayley graph; are they really in the subgroup?"
            )
        return out

    # -- membership ------------------------------------------------------------

    def contains(self, g, radius=None, budget=DEFAULT_VERTEX_BUDGET):
        """Exact yes/no with an oracle; otherwise yes/no-within-radius by BFS.

        The witness word (over the subgroup generators, as signed letters)
        is produced by BFS in both cases.
        """
        if self.oracle is not None:
            if not self.oracle(g):
                return MembershipAnswer("no")
            witness = self._witness(g, budget)
            return MembershipAnswer("yes", witness)
        if radius is None:
            raise DomainError("no exact oracle for this subgroup: a search radius is required")
        witness = self._witness(g, budget, radius=radius)
        if witness is None:
            return MembershipAnswer("no-within-radius")
        return MembershipAnswer("yes", witness)

    def _witness(self, g, budget, radius=None):
        seen = {self.ambient.identity(): ()}
        if g == self.ambient.identity():
            return ()
        frontier = deque([self.ambient.identity()])
        level = 0
        while frontier and (radius is None or level < radius):
            level += 1
            next_frontier = deque()
            for x in frontier:
                for letter in self.letters():
                    y = self.step(x, letter)
                    if y not in seen:
                        if len(seen) >= budget:
                            raise ResourceBudgetError(
                                f"membership witness search exceeded budget {budget}",
                                budget=budget,
                            )
                        seen[y] = seen[x] + (letter,)
                        if y == g:
                            return seen[y]
                        next_frontier.append(y)
            frontier = next_frontier
        return None

    def conjugate(self, g):
        """The subgroup g H g^-1 (oracle wrapped accordingly)."""
        amb = self.ambient
        ginv = amb.invert(g)
        gens = [amb.multiply(amb.multiply(g, t), ginv) for t in self.gens]
        sub = SubgroupSpec(amb, gens, name=f"({amb.format(g)})*{self.name or 'H'}*(...)^-1")
        if sub.oracle is None and self.oracle is not None:
            inner = self.oracle
            sub.oracle = lambda z, _g=g, _gi=ginv: inner(amb.multiply(amb.multiply(_gi, z), _g))
        return sub


class PeripheralSubgroup(SubgroupSpec):
    """A peripheral subgroup: exact oracle required; carries its own
    (optionally weighted) word metric and a coset-id registry."""

    def __init__(self, ambient, generators, name=None, weights=None):
        super().__init__(ambient, generators, name=name)
        if self.oracle is None:
            raise SpecError(
                f"peripheral subgroup {self!r} has no exact membership oracle; "
                "peripherals must be catalog cases with decidable membership"
            )
        if weights is None:
            weights = [1] * len(self.gens)
        if len(weights) != len(self.gens) or any(w < 1 or not isinstance(w, int) for w in weights):
            raise SpecError("weights must be positive ints, one per generator")
        self.weights = list(weights)
        self._coset_reps = []
        self._key_to_id = {}

    def check_infinite(self, R=8, budget=DEFAULT_VERTEX_BUDGET):
        """Require >= 2R+1 distinct elements in the T-ball of radius 2R+1."""
        need = 2 * R + 1
        ball = self.ball(need, budget=budget)
        if len(ball) < need:
            raise SpecError(
                f"peripheral {self!r} looks finite: only {len(ball)} elements "
                f"in its radius-{need} ball"
            )

    # -- coset ids -------------------------------------------------------------

    def coset_id(self, g):
        """Index of the left coset g P; canonical representative is the
        first (and, under shortlex scans, shortlex-least) member seen."""
        keyfn = getattr(self.oracle, "coset_key", None)
        key = keyfn(g) if keyfn is not None else None
        if key is not None:
            cid = self._key_to_id.get(key)
            if cid is None:
                cid = len(self._coset_reps)
                self._key_to_id[key] = cid
                self._coset_reps.append(g)
            return cid
        # no canonical form: linear registry scan (exotic peripherals only)
        amb = self.ambient
        for i, rep in enumerate(self._coset_reps):
            if self.oracle(amb.multiply(amb.invert(rep), g)):
                return i
        self._coset_reps.append(g)
        return len(self._coset_reps) - 1

    def coset_rep(self, cid):
        return self._coset_reps[cid]

    def same_coset(self, g, h):
        return self.oracle(self.ambient.multiply(self.ambient.invert(g), h))

    # -- internal metric ---------------------------------------------------------

    def internal_distances(self, members, budget=DEFAULT_VERTEX_BUDGET):
        """Pairwise d_i distances among coset members (all in one coset).

        The metric is the (weighted) word metric of the subgroup's own
        generators, transported to the coset by left translation.
        """
        amb = self.ambient
        base = members[0]
        rel = [amb.multiply(amb.invert(base), m) for m in members]
        inv = [amb.invert(r) for r in rel]
        n = len(members)
        quotients = [[amb.multiply(inv[j], rel[k]) for k in range(n)] for j in range(n)]
        # left invariance: d_i(m_j, m_k) = |rel_j^-1 rel_k|_T, so one search
        # from the identity covers every pair
        found = self._distances_from_identity(
            {q for row in quotients for q in row}, budget
        )
        return [[found[quotients[j][k]] for k in range(n)] for j in range(n)]

    def _distances_from_identity(self, targets, budget):
        amb = self.ambient
        targets = set(targets)
        out = {}
        heap = [(0, 0, amb.identity())]
        dist = {amb.identity(): 0}
        counter = 1
        while heap and targets:
            d, _, x = heapq.heappop(heap)
            if d > dist.get(x, -1):
                continue
            if x in targets:
                out[x] = d
                targets.discard(x)
            for letter in self.letters():
                y = self.step(x, letter)
                nd = d + self.weights[abs(letter) - 1]
                if y not in dist or nd < dist[y]:
                    if len(dist) >= budget:
                        raise ResourceBudgetError(
                            f"internal metric search exceeded budget {budget}",
                            budget=budget,
                        )
                    dist[y] = nd
                    heapq.heappush(heap, (nd, counter, y))
                    counter += 1
        if targets:
            raise ResourceBudgetError("internal metric search exhausted without finding targets")
        return out


class PeripheralStructure:
    """A finite list of peripheral subgroups with exact oracles."""

    def __init__(self, subgroups, check_infinite=True):
        self.subgroups = list(subgroups)
        for p in self.subgroups:
            if not isinstance(p, PeripheralSubgroup):
                raise SpecError("peripheral structure entries must be PeripheralSubgroup")
            if check_infinite:
                p.check_infinite()

    def __len__(self):
        return len(self.subgroups)

    def __iter__(self):
        return iter(self.subgroups)

    def __getitem__(self, i):
        return self.subgroups[i]

    @classmethod
    def from_specs(cls, ambient, specs, check_infinite=True):
        subs = []
        for spec in specs:
            if isinstance(spec, str):
                spec = json.loads(spec)
            words = spec.get("generators")
            if not words:
                raise SpecError(f"peripheral spec needs 'generators': {spec!r}")
            subs.append(
                PeripheralSubgroup(
                    ambient,
                    [ambient.parse(w) for w in words],
                    name=spec.get("name"),
                    weights=spec.get("weights"),
                )
            )
        return cls(subs, check_infinite=check_infinite)
