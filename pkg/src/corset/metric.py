"""Exact word-metric helpers that avoid building oversized balls.

d_S is left invariant, so d_S(g, h) = |g^-1 h|_S.  When the group has a
closed-form norm (free, f.g. abelian, free products of such) queries are
O(word length); otherwise the norm is found by growing a ball around the
identity (any geodesic from 1 to w of length n stays inside B(n), so the
answer is certified as soon as w is discovered).
"""

from collections import deque

from .balls import DEFAULT_VERTEX_BUDGET, GeodesicPath
from .errors import ResourceBudgetError


def norm(group, g, budget=DEFAULT_VERTEX_BUDGET):
    """Exact word length |g|_S over the marked generators."""
    n = group.norm(g)
    if n is not None:
        return n
    return norms(group, [g], budget)[g]


def norms(group, targets, budget=DEFAULT_VERTEX_BUDGET):
    """Exact |g|_S for several elements with one BFS sweep."""
    out = {}
    missing = set()
    for g in targets:
        n = group.norm(g)
        if n is not None:
            out[g] = n
        else:
            missing.add(g)
    if missing:
        for g, d, _ in _bfs_from_identity(group, missing, budget):
            out[g] = d
    return out


def distance(group, g, h, budget=DEFAULT_VERTEX_BUDGET):
    """Exact d_S(g, h) via left invariance."""
    return norm(group, group.multiply(group.invert(g), h), budget)


def geodesic(group, g, h, budget=DEFAULT_VERTEX_BUDGET):
    """The shortlex-least geodesic from g to h in the full Cayley graph."""
    w = group.multiply(group.invert(g), h)
    if group.norm(w) is not None:
        word = _greedy_word(group, w)
    else:
        word = _bfs_word(group, w, budget)
    vertices = [g]
    for letter in word:
        vertices.append(group.apply_letter(vertices[-1], letter))
    return GeodesicPath(vertices, word)


def _greedy_word(group, w):
    """Walk 1 -> w choosing the first norm-decreasing letter at each step;
    this realizes the shortlex-least geodesic word."""
    word = []
    v = group.identity()
    remaining = group.norm(w)
    while remaining:
        for letter in group.letters():
            u = group.apply_letter(v, letter)
            if group.norm(group.multiply(group.invert(u), w)) == remaining - 1:
                word.append(letter)
                v = u
                remaining -= 1
                break
        else:  # pragma: no cover - norm closed forms are consistent
            raise AssertionError("no norm-decreasing step; inconsistent norm")
    return tuple(word)


def _bfs_word(group, w, budget):
    for g, _, word in _bfs_from_identity(group, {w}, budget):
        return word
    raise AssertionError("unreachable")


def _bfs_from_identity(group, targets, budget):
    """Yield (target, distance, shortlex word) as targets are discovered."""
    targets = set(targets)
    start = group.identity()
    letters = group.letters()
    seen = {start: ()}
    if start in targets:
        yield start, 0, ()
        targets.discard(start)
    frontier = deque([start])
    depth = 0
    while frontier and targets:
        depth += 1
        next_frontier = deque()
        for g in frontier:
            gword = seen[g]
            for letter in letters:
                h = group.apply_letter(g, letter)
                if h not in seen:
                    if len(seen) >= budget:
                        raise ResourceBudgetError(
                            f"norm search exceeded the vertex budget {budget} "
                            f"at radius {depth}",
                            budget=budget,
                        )
                    hword = gword + (letter,)
                    seen[h] = hword
                    next_frontier.append(h)
                    if h in targets:
                        yield h, depth, hword
                        targets.discard(h)
                        if not targets:
                            return
        frontier = next_frontier
    if targets:
        raise ResourceBudgetError(
            f"{len(targets)} elements not reached before the search frontier emptied",
            budget=budget,
        )
