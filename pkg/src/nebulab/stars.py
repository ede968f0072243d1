"""Backward-edge graphs, star components, and nebula/galaxy ordering recognition.

A star component is classified by where its center sits among the component's
positions: strictly first (left), strictly last (right), or in between
(central).  Components with two vertices have an arbitrary center and are kept
as GENERAL; they satisfy the plain nebula predicate but none of the
three-vertex-kind predicates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from .core import Ordering, Tournament, check_ordering
from .errors import BudgetError

ORDERING_SEARCH_BUDGET = 10


@dataclass(frozen=True)
class BackwardEdgeGraph:
    """Undirected graph of the backward pairs of a tournament under an ordering."""

    n: int
    edges: frozenset[frozenset[int]]

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def neighbors(self, v: int) -> set[int]:
        out = set()
        for e in self.edges:
            if v in e:
                out |= e - {v}
        return out

    def components(self) -> list[frozenset[int]]:
        parent = list(range(self.n))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edges:
            a, b = tuple(e)
            parent[find(a)] = find(b)
        groups: dict[int, set[int]] = {}
        for v in range(self.n):
            groups.setdefault(find(v), set()).add(v)
        return sorted((frozenset(g) for g in groups.values()), key=min)


class StarKind(Enum):
    SINGLETON = "singleton"
    LEFT = "left"
    RIGHT = "right"
    CENTRAL = "central"
    GENERAL = "general"
    NON_STAR = "non-star"


@dataclass(frozen=True)
class StarComponent:
    vertices: frozenset[int]
    center: Optional[int]
    kind: StarKind
    positions: tuple[int, ...]

    @property
    def leaves(self) -> frozenset[int]:
        if self.center is None:
            return frozenset()
        return self.vertices - {self.center}


def backward_graph(t: Tournament, order: Ordering) -> BackwardEdgeGraph:
    """B(T, order): vertices u,v are adjacent iff their edge points backward."""
    pos = check_ordering(order, t.n)
    edges = set()
    for u in range(t.n):
        for v in range(u + 1, t.n):
            if t.has_edge(u, v):
                later, earlier = (u, v) if pos[u] > pos[v] else (v, u)
            else:
                later, earlier = (v, u) if pos[v] > pos[u] else (u, v)
            if t.has_edge(later, earlier) and pos[later] > pos[earlier]:
                edges.add(frozenset((u, v)))
    return BackwardEdgeGraph(t.n, frozenset(edges))


def _star_center(graph: BackwardEdgeGraph, comp: frozenset[int]) -> Optional[int]:
    """The hub of a star component with >= 3 vertices, None if not a star."""
    degs = {v: graph.degree(v) for v in comp}
    hubs = [v for v in comp if degs[v] == len(comp) - 1]
    if len(hubs) != 1:
        return None
    hub = hubs[0]
    if all(degs[v] == 1 for v in comp if v != hub):
        return hub
    return None


def classify_components(graph: BackwardEdgeGraph, order: Ordering) -> list[StarComponent]:
    """Partition the vertex set into classified backward components."""
    pos = check_ordering(order, graph.n)
    out = []
    for comp in graph.components():
        comp_pos = tuple(sorted(pos[v] for v in comp))
        if len(comp) == 1:
            out.append(StarComponent(comp, None, StarKind.SINGLETON, comp_pos))
            continue
        if len(comp) == 2:
            out.append(StarComponent(comp, min(comp), StarKind.GENERAL, comp_pos))
            continue
        hub = _star_center(graph, comp)
        if hub is None:
            out.append(StarComponent(comp, None, StarKind.NON_STAR, comp_pos))
            continue
        hub_pos = pos[hub]
        leaf_pos = [pos[v] for v in comp if v != hub]
        if hub_pos < min(leaf_pos):
            kind = StarKind.LEFT
        elif hub_pos > max(leaf_pos):
            kind = StarKind.RIGHT
        else:
            kind = StarKind.CENTRAL
        out.append(StarComponent(comp, hub, kind, comp_pos))
    return out


@dataclass(frozen=True)
class NebulaVerdict:
    kind: str
    holds: bool
    ordering: Optional[Ordering]
    components: tuple[StarComponent, ...]


def is_nebula_ordering(t: Tournament, order: Ordering) -> bool:
    """Every backward component is a star or a singleton."""
    comps = classify_components(backward_graph(t, order), order)
    return all(c.kind is not StarKind.NON_STAR for c in comps)


def _is_three_star_ordering(t: Tournament, order: Ordering, kind: StarKind) -> bool:
    comps = classify_components(backward_graph(t, order), order)
    return all(
        c.kind is StarKind.SINGLETON or (c.kind is kind and len(c.vertices) == 3)
        for c in comps
    )


def is_left_nebula_ordering(t: Tournament, order: Ordering) -> bool:
    """Every backward component is a singleton or a 3-vertex left star."""
    return _is_three_star_ordering(t, order, StarKind.LEFT)


def is_right_nebula_ordering(t: Tournament, order: Ordering) -> bool:
    return _is_three_star_ordering(t, order, StarKind.RIGHT)


def is_central_nebula_ordering(t: Tournament, order: Ordering) -> bool:
    return _is_three_star_ordering(t, order, StarKind.CENTRAL)


def _galaxy_positions_ok(stars: list[tuple[int, list[int]]]) -> bool:
    """No star center may sit strictly between two leaves of another star.

    Stars are given as (center position, leaf positions).
    """
    for i, (center, _) in enumerate(stars):
        for j, (_, leaves) in enumerate(stars):
            if i == j or len(leaves) < 2:
                continue
            if min(leaves) < center < max(leaves):
                return False
    return True


def is_galaxy_ordering(t: Tournament, order: Ordering) -> bool:
    """Components are left/right stars or singletons, with no star center
    positioned between two leaves of another star.

    Two-vertex components have an arbitrary center; the predicate holds if
    some assignment of their centers satisfies the positional rule.
    """
    pos = check_ordering(order, t.n)
    comps = classify_components(backward_graph(t, order), order)
    fixed = []
    ambiguous = []
    for c in comps:
        if c.kind is StarKind.SINGLETON:
            continue
        if c.kind is StarKind.GENERAL:
            ambiguous.append(sorted(pos[v] for v in c.vertices))
            continue
        if c.kind not in (StarKind.LEFT, StarKind.RIGHT):
            return False
        fixed.append((pos[c.center], [pos[v] for v in c.leaves]))
    for choice in itertools.product((0, 1), repeat=len(ambiguous)):
        stars = list(fixed)
        for flip, (p0, p1) in zip(choice, ambiguous):
            center, leaf = (p0, p1) if flip == 0 else (p1, p0)
            stars.append((center, [leaf]))
        if _galaxy_positions_ok(stars):
            return True
    return not fixed and not ambiguous


PREDICATES: dict[str, Callable[[Tournament, Ordering], bool]] = {
    "nebula": is_nebula_ordering,
    "left": is_left_nebula_ordering,
    "right": is_right_nebula_ordering,
    "central": is_central_nebula_ordering,
    "galaxy": is_galaxy_ordering,
}


def _prefix_viable(t: Tournament, placed: list[int], kind: str) -> bool:
    """Can a partial ordering still extend to one satisfying the predicate?

    The backward graph restricted to placed vertices is final, so a component
    that is already a non-star (or violates the requested 3-vertex kind) kills
    the whole subtree.
    """
    graph = _partial_backward(t, placed)
    comps = classify_components_partial(graph, placed)
    for c in comps:
        if c.kind is StarKind.NON_STAR:
            return False
        if kind in ("left", "right", "central"):
            if len(c.vertices) > 3:
                return False
            if len(c.vertices) == 3:
                want = {"left": StarKind.LEFT, "right": StarKind.RIGHT,
                        "central": StarKind.CENTRAL}[kind]
                if c.kind is not want:
                    return False
            if kind == "right" and len(c.vertices) == 2:
                # a right star's hub arrives last and attaches to all leaves
                # at once, so no valid prefix ever holds a 2-vertex component
                return False
        if kind == "galaxy" and len(c.vertices) >= 3:
            if c.kind not in (StarKind.LEFT, StarKind.RIGHT):
                return False
    if kind == "galaxy":
        fixed = []
        for c in comps:
            if c.kind in (StarKind.LEFT, StarKind.RIGHT) and len(c.vertices) >= 3:
                center = min(c.positions) if c.kind is StarKind.LEFT else max(c.positions)
                fixed.append((center, [p for p in c.positions if p != center]))
        if not _galaxy_positions_ok(fixed):
            return False
    return True


def _partial_backward(t: Tournament, placed: list[int]) -> BackwardEdgeGraph:
    edges = set()
    for p, u in enumerate(placed):
        for q in range(p + 1, len(placed)):
            w = placed[q]
            if t.has_edge(w, u):
                edges.add(frozenset((u, w)))
    return BackwardEdgeGraph(t.n, frozenset(edges))


def classify_components_partial(
    graph: BackwardEdgeGraph, placed: list[int]
) -> list[StarComponent]:
    """Classify components among placed vertices only (positions = list index)."""
    pos = {v: i for i, v in enumerate(placed)}
    placed_set = set(placed)
    seen: set[int] = set()
    out = []
    for v in placed:
        if v in seen:
            continue
        comp = {v}
        frontier = [v]
        while frontier:
            x = frontier.pop()
            for y in graph.neighbors(x):
                if y in placed_set and y not in comp:
                    comp.add(y)
                    frontier.append(y)
        seen |= comp
        comp_f = frozenset(comp)
        comp_pos = tuple(sorted(pos[u] for u in comp))
        if len(comp) == 1:
            out.append(StarComponent(comp_f, None, StarKind.SINGLETON, comp_pos))
            continue
        if len(comp) == 2:
            out.append(StarComponent(comp_f, min(comp_f), StarKind.GENERAL, comp_pos))
            continue
        hub = _star_center(graph, comp_f)
        if hub is None:
            out.append(StarComponent(comp_f, None, StarKind.NON_STAR, comp_pos))
            continue
        hub_pos = pos[hub]
        leaf_pos = [pos[u] for u in comp if u != hub]
        if hub_pos < min(leaf_pos):
            kind = StarKind.LEFT
        elif hub_pos > max(leaf_pos):
            kind = StarKind.RIGHT
        else:
            kind = StarKind.CENTRAL
        out.append(StarComponent(comp_f, hub, kind, comp_pos))
    return out


def find_ordering(
    t: Tournament,
    predicate: Callable[[Tournament, Ordering], bool],
    budget: int = ORDERING_SEARCH_BUDGET,
) -> Optional[Ordering]:
    """Exhaustive ordering search with prefix pruning.

    Returns the lexicographically first ordering satisfying the predicate, or
    None after exhausting all n! candidates (pruned).
    """
    if t.n > budget:
        raise BudgetError(f"ordering search limited to n <= {budget}, got {t.n}")
    kind = next((k for k, p in PREDICATES.items() if p is predicate), "nebula")

    def descend(placed: list[int], remaining: list[int]) -> Optional[Ordering]:
        if not remaining:
            order = tuple(placed)
            return order if predicate(t, order) else None
        for v in remaining:
            placed.append(v)
            if _prefix_viable(t, placed, kind):
                found = descend(placed, [w for w in remaining if w != v])
                if found is not None:
                    placed.pop()
                    return found
            placed.pop()
        return None

    return descend([], list(range(t.n)))


def nebula_verdict(t: Tournament, kind: str, order: Optional[Ordering] = None,
                   budget: int = ORDERING_SEARCH_BUDGET) -> NebulaVerdict:
    """Check or search for an ordering of the requested kind."""
    predicate = PREDICATES[kind]
    if order is None:
        order = find_ordering(t, predicate, budget=budget)
        if order is None:
            return NebulaVerdict(kind, False, None, ())
    holds = predicate(t, order)
    comps = tuple(classify_components(backward_graph(t, order), order))
    return NebulaVerdict(kind, holds, order, comps)
