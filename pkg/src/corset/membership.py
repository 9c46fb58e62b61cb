"""Exact membership oracles for catalog subgroups.

Coverage (auto-detected from the ambient kind and the generator shapes):

* free groups: any finitely generated subgroup, via Stallings foldings;
* f.g. abelian groups: any subgroup, via integer lattice solving;
* Heisenberg: cyclic subgroups and the full group;
* free products: subgroups generated by single-syllable elements
  (syllable-wise membership through recursive factor oracles);
* mapping tori: fiber subgroups, <t>, and cyclic subgroups.

Everything else returns None and callers fall back to the BFS
semi-decision of SubgroupSpec.contains.
"""

from .words import free_invert, free_multiply


class StallingsGraph:
    """Folded subgroup graph of a f.g. subgroup of a free group.

    Membership: a freely reduced word lies in the subgroup iff it traces a
    closed loop at the basepoint using only defined edges.
    """

    def __init__(self, words):
        self._out = [{}]  # vertex -> {letter: vertex}
        for word in words:
            self._add_loop(word)
        self._fold()

    def _new_vertex(self):
        self._out.append({})
        return len(self._out) - 1

    def _add_edge(self, u, letter, v):
        self._out[u][letter] = v
        self._out[v][-letter] = u

    def _add_loop(self, word):
        if not word:
            return
        u = 0
        for letter in word[:-1]:
            v = self._new_vertex()
            self._add_edge(u, letter, v)
            u = v
        self._add_edge(u, word[-1], 0)

    def _fold(self):
        # fixpoint folding: identify targets of same-labelled edges until no
        # vertex carries two distinct edges with one label (desk-scale sizes,
        # so the repeated full rescan is harmless)
        parent = list(range(len(self._out)))

        def find(v):
            root = v
            while parent[root] != root:
                root = parent[root]
            while parent[v] != root:
                parent[v], v = root, parent[v]
            return root

        changed = True
        while changed:
            changed = False
            edges = {}
            for v in range(len(self._out)):
                for letter, u in self._out[v].items():
                    edges.setdefault((find(v), letter), set()).add(find(u))
            for targets in edges.values():
                targets = sorted(targets)
                for b in targets[1:]:
                    ra, rb = find(targets[0]), find(b)
                    if ra != rb:
                        parent[rb] = ra
                        changed = True
        out = {}
        for v in range(len(self._out)):
            for letter, u in self._out[v].items():
                out.setdefault(find(v), {})[letter] = find(u)
        self._base = find(0)
        out.setdefault(self._base, {})
        self._out = out

    def contains(self, word):
        v = self._base
        for letter in word:
            v = self._out.get(v, {}).get(letter)
            if v is None:
                return False
        return v == self._base

    def is_full(self, rank):
        """True iff the subgroup is the whole free group of that rank."""
        for i in range(1, rank + 1):
            if self._out[self._base].get(i) != self._base:
                return False
        # base must also be the only core vertex reachable by loops;
        # with every letter looping at the base, the base alone certifies it
        return True

    def right_coset_key(self, word):
        """Canonical key for the right coset P*word: the automaton state
        reached plus the unread tail (the tail descends into a hanging
        tree of the Schreier graph, so it is canonical for reduced words)."""
        v = self._base
        for i, letter in enumerate(word):
            nxt = self._out.get(v, {}).get(letter)
            if nxt is None:
                return (v, word[i:])
            v = nxt
        return (v, ())


def echelon_basis(columns, n):
    """Lower-triangular (Hermite-style) basis of the integer column span:
    pivot rows strictly increase and every non-basis column is zeroed at
    each pivot row.  Exact integer arithmetic; desk-scale sizes."""
    cols = [list(c) for c in columns if any(c)]
    basis = []
    for row in range(n):
        while True:
            nonzero = [c for c in cols if c[row] != 0]
            if len(nonzero) <= 1:
                break
            nonzero.sort(key=lambda c: abs(c[row]))
            c0 = nonzero[0]
            for c in nonzero[1:]:
                q = c[row] // c0[row]
                for i in range(n):
                    c[i] -= q * c0[i]
        nonzero = [c for c in cols if c[row] != 0]
        if nonzero:
            pivot = nonzero[0]
            if pivot[row] < 0:
                for i in range(n):
                    pivot[i] = -pivot[i]
            basis.append(pivot)
            cols = [c for c in cols if c is not pivot and any(c)]
    return basis


def lattice_residue(basis, target):
    """Canonical residue of target modulo the echelon basis; the residue is
    the zero vector exactly when target lies in the lattice."""
    t = list(target)
    for col in basis:
        row = next(i for i, x in enumerate(col) if x != 0)
        q = t[row] // col[row]
        if q:
            for i in range(len(t)):
                t[i] -= q * col[i]
    return tuple(t)


class FreeOracle:
    def __init__(self, group, gens):
        self.graph = StallingsGraph([g for g in gens])

    def __call__(self, g):
        return self.graph.contains(g)

    def coset_key(self, g):
        # gP = hP iff Pg^-1 = Ph^-1, so key the right coset of g^-1
        return self.graph.right_coset_key(free_invert(g))


class AbelianOracle:
    def __init__(self, group, gens):
        self.group = group
        cols = [list(g) for g in gens]
        # torsion relations are implicit generators
        total = group.free_rank + len(group.torsion)
        for j, m in enumerate(group.torsion):
            col = [0] * total
            col[group.free_rank + j] = m
            cols.append(col)
        self.basis = echelon_basis(cols, total)

    def __call__(self, g):
        return all(x == 0 for x in lattice_residue(self.basis, g))

    def coset_key(self, g):
        return lattice_residue(self.basis, g)


class HeisenbergCyclicOracle:
    def __init__(self, group, gen):
        self.group = group
        # normalize the generator direction so coset keys are canonical
        alpha, beta, gamma = gen
        if alpha < 0 or (alpha == 0 and beta < 0) or (alpha == 0 and beta == 0 and gamma < 0):
            gen = group.invert(gen)
        self.gen = gen

    def _power(self, k):
        alpha, beta, gamma = self.gen
        return (k * alpha, k * beta, k * gamma + (k * (k - 1) // 2) * alpha * beta)

    def __call__(self, g):
        alpha, beta, gamma = self.gen
        a, b, c = g
        if alpha:
            if a % alpha:
                return False
            k = a // alpha
        elif beta:
            if b % beta:
                return False
            k = b // beta
        elif gamma:
            if a or b or c % gamma:
                return False
            k = c // gamma
        else:
            return g == self.group.identity()
        return g == self._power(k)

    def coset_key(self, g):
        alpha, beta, gamma = self.gen
        a, b, c = g
        if alpha:
            k = -(a // alpha)
        elif beta:
            k = -(b // beta)
        elif gamma:
            k = -(c // gamma)
        else:
            return g
        return self.group.multiply(g, self._power(k))


class FullOracle:
    def __init__(self, group):
        self.group = group

    def __call__(self, g):
        return True

    def coset_key(self, g):
        return 0


class FreeProductSyllableOracle:
    """Membership for <A_0 u A_1 u ...> with A_i inside factor i: the
    subgroup is the free product of the <A_i>, so an element belongs iff
    every factor-i syllable lies in <A_i>."""

    def __init__(self, group, factor_oracles):
        self.group = group
        self.factor_oracles = factor_oracles

    def __call__(self, g):
        for fi, x in g:
            oracle = self.factor_oracles.get(fi)
            if oracle is None or not oracle(x):
                return False
        return True

    def coset_key(self, g):
        # peel absorbable trailing syllables; canonicalize the last one
        g = list(g)
        while g:
            fi, x = g[-1]
            sub = self.factor_oracles.get(fi)
            if sub is None:
                break
            if sub(x):
                g.pop()
                continue
            keyfn = getattr(sub, "coset_key", None)
            if keyfn is None:
                return None
            return (tuple(g[:-1]), fi, keyfn(x))
        return (tuple(g), None, None)


class FiberOracle:
    """Subgroup of a mapping torus contained in the fiber F2."""

    def __init__(self, group, fiber_words):
        self.graph = StallingsGraph(fiber_words)

    def __call__(self, g):
        k, w = g
        return k == 0 and self.graph.contains(w)

    def coset_key(self, g):
        k, w = g
        return (k, self.graph.right_coset_key(free_invert(w)))


class TorusCyclicOracle:
    def __init__(self, group, gen):
        self.group = group
        self.gen = gen  # (k0, w0) with k0 != 0

    def __call__(self, g):
        k0 = self.gen[0]
        k, w = g
        if k % k0:
            return False
        m = k // k0
        power = self.group.identity()
        step = self.gen if m >= 0 else self.group.invert(self.gen)
        for _ in range(abs(m)):
            power = self.group.multiply(power, step)
        return power == g

    def coset_key(self, g):
        if self.gen[1]:
            return None  # only the pure <t> case has a cheap canonical form
        k, w = g
        return self.group._phi_power(w, k)


def detect_oracle(group, gens):
    """Best exact membership oracle for <gens> <= group, or None."""
    gens = [g for g in gens if g != group.identity()]
    kind = group.kind
    if kind == "free":
        return FreeOracle(group, gens)
    if kind == "abelian":
        return AbelianOracle(group, gens)
    if kind == "heisenberg":
        closure = set(gens) | {group.invert(g) for g in gens}
        marked = {group.generator(i) for i in (1, 2, 3)}
        if marked <= closure:
            return FullOracle(group)
        if len({g for g in closure}) <= 2 and gens:
            return HeisenbergCyclicOracle(group, gens[0])
        return None
    if kind == "free_product":
        by_factor = {}
        for g in gens:
            if len(g) != 1:
                return None
            fi, x = g[0]
            by_factor.setdefault(fi, []).append(x)
        factor_oracles = {}
        for fi, xs in by_factor.items():
            sub = detect_oracle(group.factors[fi], xs)
            if sub is None:
                return None
            factor_oracles[fi] = sub
        return FreeProductSyllableOracle(group, factor_oracles)
    if kind == "mapping_torus":
        if all(g[0] == 0 for g in gens):
            return FiberOracle(group, [g[1] for g in gens])
        if len(gens) == 1:
            return TorusCyclicOracle(group, gens[0])
        closure = set(gens) | {group.invert(g) for g in gens}
        if closure == {(1, ()), (-1, ())}:
            return TorusCyclicOracle(group, (1, ()))
        return None
    return None
