"""Marked-group catalog: exact arithmetic for a family of concrete groups.

Every group presents the same oracle surface: identity, multiply, invert,
a symmetrized marked generating set, unique normal forms (equality is
normal-form equality), parsing/formatting of words, and an optional
closed-form word norm.

Catalog kinds: free groups, finitely generated abelian groups, the integer
Heisenberg group (upper-triangular 3x3 matrix normal form (a, b, c)),
free products of catalog groups (alternating syllable normal form), and
F2-by-Z mapping tori with elements stored as (k, w) meaning t^k w and
multiplication (k1, w1)(k2, w2) = (k1 + k2, phi^(-k2)(w1) w2).
"""

import json

from .errors import RepresentationError, SpecError
from .words import (
    free_invert,
    free_multiply,
    free_reduce,
    format_word,
    parse_word,
    substitute,
)

DEFAULT_NAMES = "abcdefghijklmnopqrstuvwxyz"


def _letter_rank(letter):
    # alphabet order a < a^-1 < b < b^-1 < ...
    return 2 * (abs(letter) - 1) + (0 if letter > 0 else 1)


class MarkedGroup:
    """Base class; concrete kinds override the arithmetic."""

    kind = None

    def __init__(self, gen_names):
        if len(set(gen_names)) != len(gen_names):
            raise SpecError(f"duplicate generator names: {gen_names}")
        for name in gen_names:
            if not name.isalpha() or name != name.lower():
                raise SpecError(f"generator names must be lowercase alphabetic: {name!r}")
        self.gen_names = list(gen_names)

    # -- oracle surface ----------------------------------------------------

    def identity(self):
        raise NotImplementedError

    def multiply(self, g, h):
        raise NotImplementedError

    def invert(self, g):
        raise NotImplementedError

    def generator(self, letter):
        """Element for a signed letter (+i / -i, 1-based)."""
        g = self._positive_generator(abs(letter))
        return g if letter > 0 else self.invert(g)

    def apply_letter(self, g, letter):
        """g * generator(letter); kinds override with a fast path."""
        return self.multiply(g, self.generator(letter))

    def check_element(self, g):
        """Raise RepresentationError unless g is a valid normal form."""
        raise NotImplementedError

    def norm(self, g):
        """Exact word length of g over the marked generators, or None
        when no closed form exists for this kind (BFS is used instead)."""
        return None

    def order_key(self, g):
        """Deterministic total-order key (flat int tuple); used only for
        reproducible tie-breaking, not as the word metric."""
        raise NotImplementedError

    # -- marked generating set ---------------------------------------------

    @property
    def rank(self):
        return len(self.gen_names)

    def letters(self):
        """Symmetrized alphabet in the fixed order g1, g1^-1, g2, g2^-1, ..."""
        out = []
        for i in range(1, self.rank + 1):
            out.append(i)
            out.append(-i)
        return out

    def generators(self):
        return [(name, self._positive_generator(i + 1)) for i, name in enumerate(self.gen_names)]

    def parse(self, text):
        """Evaluate a word string like "a b A" (uppercase = inverse)."""
        g = self.identity()
        for letter in parse_word(text, self.gen_names):
            g = self.apply_letter(g, letter)
        return g

    def format(self, g):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({','.join(self.gen_names)})"


class FreeGroup(MarkedGroup):
    kind = "free"

    def identity(self):
        return ()

    def multiply(self, g, h):
        return free_multiply(g, h)

    def invert(self, g):
        return free_invert(g)

    def _positive_generator(self, i):
        return (i,)

    def apply_letter(self, g, letter):
        if g and g[-1] == -letter:
            return g[:-1]
        return g + (letter,)

    def check_element(self, g):
        if not isinstance(g, tuple):
            raise RepresentationError(f"free-group element must be a tuple: {g!r}")
        for i, letter in enumerate(g):
            if not isinstance(letter, int) or letter == 0 or abs(letter) > self.rank:
                raise RepresentationError(f"bad letter {letter!r} in {g!r}")
            if i and g[i - 1] == -letter:
                raise RepresentationError(f"word not freely reduced: {g!r}")

    def norm(self, g):
        return len(g)

    def order_key(self, g):
        return (len(g),) + tuple(_letter_rank(l) for l in g)

    def format(self, g):
        return format_word(g, self.gen_names)


class AbelianGroup(MarkedGroup):
    """Z^rank x Z/m1 x ... with coordinatewise addition; torsion
    coordinates are stored reduced mod m_i."""

    kind = "abelian"

    def __init__(self, rank, torsion=(), gen_names=None):
        self.free_rank = rank
        self.torsion = tuple(torsion)
        if any(m < 2 for m in self.torsion):
            raise SpecError("torsion moduli must be >= 2")
        total = rank + len(self.torsion)
        super().__init__(gen_names or list(DEFAULT_NAMES[:total]))
        if len(self.gen_names) != total:
            raise SpecError("abelian group needs one generator name per coordinate")

    def identity(self):
        return (0,) * (self.free_rank + len(self.torsion))

    def _reduce(self, coords):
        coords = list(coords)
        for j, m in enumerate(self.torsion):
            coords[self.free_rank + j] %= m
        return tuple(coords)

    def multiply(self, g, h):
        return self._reduce(x + y for x, y in zip(g, h))

    def invert(self, g):
        return self._reduce(-x for x in g)

    def _positive_generator(self, i):
        coords = [0] * (self.free_rank + len(self.torsion))
        coords[i - 1] = 1
        return self._reduce(coords)

    def check_element(self, g):
        total = self.free_rank + len(self.torsion)
        if not (isinstance(g, tuple) and len(g) == total and all(isinstance(x, int) for x in g)):
            raise RepresentationError(f"bad abelian element {g!r}")
        for j, m in enumerate(self.torsion):
            if not 0 <= g[self.free_rank + j] < m:
                raise RepresentationError(f"torsion coordinate out of range in {g!r}")

    def norm(self, g):
        n = sum(abs(x) for x in g[: self.free_rank])
        for j, m in enumerate(self.torsion):
            c = g[self.free_rank + j]
            n += min(c, m - c)
        return n

    def order_key(self, g):
        return (self.norm(g),) + tuple(g)

    def format(self, g):
        if all(x == 0 for x in g):
            return "1"
        parts = []
        for name, x in zip(self.gen_names, g):
            if x:
                parts.append(name if x == 1 else f"{name}^{x}")
        return " ".join(parts)


class HeisenbergGroup(MarkedGroup):
    """Integer Heisenberg group; (a, b, c) is the matrix [[1,a,c],[0,1,b],[0,0,1]],
    equivalently the normal form x^a y^b z^(c-ab) with z = [x,y] central."""

    kind = "heisenberg"

    def __init__(self, gen_names=None):
        super().__init__(gen_names or ["x", "y", "z"])
        if len(self.gen_names) != 3:
            raise SpecError("heisenberg group has exactly 3 marked generators")

    def identity(self):
        return (0, 0, 0)

    def multiply(self, g, h):
        a1, b1, c1 = g
        a2, b2, c2 = h
        return (a1 + a2, b1 + b2, c1 + c2 + a1 * b2)

    def invert(self, g):
        a, b, c = g
        return (-a, -b, a * b - c)

    def _positive_generator(self, i):
        return ((1, 0, 0), (0, 1, 0), (0, 0, 1))[i - 1]

    def check_element(self, g):
        if not (isinstance(g, tuple) and len(g) == 3 and all(isinstance(x, int) for x in g)):
            raise RepresentationError(f"bad Heisenberg element {g!r}")

    def order_key(self, g):
        return (abs(g[0]) + abs(g[1]) + abs(g[2]),) + tuple(g)

    def format(self, g):
        a, b, c = g
        x, y, z = self.gen_names
        e = c - a * b  # exponent of the central generator in x^a y^b z^e
        parts = []
        for name, k in ((x, a), (y, b), (z, e)):
            if k:
                parts.append(name if k == 1 else f"{name}^{k}")
        return " ".join(parts) or "1"


class FreeProductGroup(MarkedGroup):
    """Free product of catalog groups; elements are alternating tuples of
    (factor index, nontrivial factor element) syllables."""

    kind = "free_product"

    def __init__(self, factors):
        if len(factors) < 2:
            raise SpecError("free product needs at least 2 factors")
        self.factors = list(factors)
        names = []
        self._letter_map = []  # global letter -> (factor index, factor letter)
        for fi, factor in enumerate(self.factors):
            names.extend(factor.gen_names)
            for i in range(1, factor.rank + 1):
                self._letter_map.append((fi, i))
        super().__init__(names)

    def identity(self):
        return ()

    def multiply(self, g, h):
        out = list(g)
        for syllable in h:
            fi, x = syllable
            if out and out[-1][0] == fi:
                merged = self.factors[fi].multiply(out[-1][1], x)
                out.pop()
                if merged != self.factors[fi].identity():
                    out.append((fi, merged))
            else:
                out.append(syllable)
        return tuple(out)

    def invert(self, g):
        return tuple((fi, self.factors[fi].invert(x)) for fi, x in reversed(g))

    def _positive_generator(self, i):
        fi, fl = self._letter_map[i - 1]
        return ((fi, self.factors[fi]._positive_generator(fl)),)

    def check_element(self, g):
        if not isinstance(g, tuple):
            raise RepresentationError(f"bad free-product element {g!r}")
        prev = None
        for fi, x in g:
            if not 0 <= fi < len(self.factors):
                raise RepresentationError(f"bad factor index in {g!r}")
            if fi == prev:
                raise RepresentationError(f"adjacent syllables share a factor: {g!r}")
            if x == self.factors[fi].identity():
                raise RepresentationError(f"identity syllable in {g!r}")
            self.factors[fi].check_element(x)
            prev = fi

    def norm(self, g):
        total = 0
        for fi, x in g:
            n = self.factors[fi].norm(x)
            if n is None:
                return None
            total += n
        return total

    def order_key(self, g):
        key = (len(g),)
        for fi, x in g:
            key += (fi,) + tuple(self.factors[fi].order_key(x))
        return key

    def format(self, g):
        if not g:
            return "1"
        return " ".join(self.factors[fi].format(x) for fi, x in g)


DEFAULT_PHI = {"a": "a b", "b": "a"}
DEFAULT_PHI_INV = {"a": "b", "b": "B a"}


class MappingTorusGroup(MarkedGroup):
    """F2 semidirect Z for an automorphism phi of F2, elements (k, w) = t^k w.

    phi and its inverse are supplied as substitutions on the fiber
    generators; the pair is validated exactly (phi o phi_inv = id on
    generators).  The fiber alphabet is {a, b}; the stable letter is t.
    """

    kind = "mapping_torus"

    def __init__(self, phi=None, phi_inv=None):
        super().__init__(["t", "a", "b"])
        fiber_names = ["a", "b"]
        phi = phi or DEFAULT_PHI
        phi_inv = phi_inv or DEFAULT_PHI_INV
        self.phi_images = tuple(parse_word(phi[n], fiber_names) for n in fiber_names)
        self.phi_inv_images = tuple(parse_word(phi_inv[n], fiber_names) for n in fiber_names)
        for i, name in enumerate(fiber_names):
            gen = (i + 1,)
            if substitute(substitute(gen, self.phi_inv_images), self.phi_images) != gen:
                raise SpecError(f"phi(phi_inv({name})) != {name}; not a valid automorphism pair")
            if substitute(substitute(gen, self.phi_images), self.phi_inv_images) != gen:
                raise SpecError(f"phi_inv(phi({name})) != {name}; not a valid automorphism pair")

    def _phi_power(self, w, k):
        images = self.phi_images if k > 0 else self.phi_inv_images
        for _ in range(abs(k)):
            w = substitute(w, images)
        return w

    def identity(self):
        return (0, ())

    def multiply(self, g, h):
        k1, w1 = g
        k2, w2 = h
        return (k1 + k2, free_multiply(self._phi_power(w1, -k2), w2))

    def invert(self, g):
        k, w = g
        return (-k, self._phi_power(free_invert(w), k))

    def _positive_generator(self, i):
        return (1, ()) if i == 1 else (0, (i - 1,))

    def apply_letter(self, g, letter):
        k, w = g
        if abs(letter) == 1:
            step = 1 if letter > 0 else -1
            return (k + step, self._phi_power(w, -step))
        fl = (abs(letter) - 1) * (1 if letter > 0 else -1)
        if w and w[-1] == -fl:
            return (k, w[:-1])
        return (k, w + (fl,))

    def check_element(self, g):
        if not (isinstance(g, tuple) and len(g) == 2 and isinstance(g[0], int)):
            raise RepresentationError(f"bad mapping-torus element {g!r}")
        k, w = g
        for i, letter in enumerate(w):
            if letter == 0 or abs(letter) > 2:
                raise RepresentationError(f"bad fiber letter in {g!r}")
            if i and w[i - 1] == -letter:
                raise RepresentationError(f"fiber word not reduced: {g!r}")

    def order_key(self, g):
        k, w = g
        return (abs(k) + len(w), k) + tuple(_letter_rank(l) for l in w)

    def format(self, g):
        k, w = g
        parts = []
        if k:
            parts.append("t" if k == 1 else f"t^{k}")
        if w:
            parts.append(format_word(w, ["a", "b"]))
        return " ".join(parts) or "1"


def group_from_spec(spec):
    """Build a catalog group from a JSON-style dict (or JSON text).

    Schema: {"kind": "free"|"abelian"|"heisenberg"|"free_product"|"mapping_torus",
             ...kind-specific fields...}; see README for the grammar.
    """
    if isinstance(spec, str):
        spec = json.loads(spec)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SpecError(f"group spec must be a dict with a 'kind': {spec!r}")
    kind = spec["kind"]
    if kind == "free":
        rank = spec.get("rank", 2)
        if not isinstance(rank, int) or rank < 1:
            raise SpecError(f"free group rank must be a positive int: {rank!r}")
        names = spec.get("names") or list(DEFAULT_NAMES[:rank])
        return FreeGroup(names)
    if kind == "abelian":
        rank = spec.get("rank", 2)
        if not isinstance(rank, int) or rank < 0:
            raise SpecError(f"abelian rank must be a non-negative int: {rank!r}")
        return AbelianGroup(rank, spec.get("torsion", ()), spec.get("names"))
    if kind == "heisenberg":
        return HeisenbergGroup(spec.get("names"))
    if kind == "free_product":
        factors = spec.get("factors")
        if not factors:
            raise SpecError("free_product spec needs a 'factors' list")
        return FreeProductGroup([group_from_spec(f) for f in factors])
    if kind == "mapping_torus":
        phi = spec.get("phi")
        phi_inv = spec.get("phi_inv")
        if (phi is None) != (phi_inv is None):
            raise SpecError("custom phi must be supplied together with phi_inv")
        return MappingTorusGroup(phi, phi_inv)
    raise SpecError(f"unknown group kind {kind!r}")
