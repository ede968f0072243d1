"""Tournament representation and the fundamental exact solvers.

Vertices are integers 0..n-1.  The adjacency relation is bit-packed: row u is
an int whose bit v is set iff the edge u->v is present.  Python ints are
unbounded, so the same code is the fast path for n <= 64 and the general path
beyond.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional

from .errors import BudgetError

Ordering = tuple[int, ...]

TR_BUDGET = 24
CANONICAL_BUDGET = 12
ENUMERATION_BUDGET = 8


@dataclass(frozen=True)
class Tournament:
    """A complete antisymmetric digraph on vertices 0..n-1."""

    n: int
    rows: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("tournament needs at least one vertex")
        if len(self.rows) != self.n:
            raise ValueError("row count does not match vertex count")
        full = (1 << self.n) - 1
        for u, row in enumerate(self.rows):
            if row & ~full:
                raise ValueError(f"row {u} has bits outside the vertex range")
            if row >> u & 1:
                raise ValueError(f"self-edge at vertex {u}")
        for u in range(self.n):
            for v in range(u + 1, self.n):
                if (self.rows[u] >> v & 1) == (self.rows[v] >> u & 1):
                    raise ValueError(f"pair ({u},{v}) is not oriented exactly once")

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u] >> v & 1)

    def out_mask(self, u: int) -> int:
        return self.rows[u]

    def in_mask(self, u: int) -> int:
        full = (1 << self.n) - 1
        return full & ~self.rows[u] & ~(1 << u)

    def out_degree(self, u: int) -> int:
        return bin(self.rows[u]).count("1")

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n):
            for v in range(self.n):
                if u != v and self.rows[u] >> v & 1:
                    yield (u, v)


def from_edges(n: int, edges: Iterable[tuple[int, int]]) -> Tournament:
    rows = [0] * n
    for u, v in edges:
        rows[u] |= 1 << v
    return Tournament(n, tuple(rows))


def positions(order: Ordering) -> dict[int, int]:
    """Map vertex -> position for an ordering given as the vertex sequence."""
    pos = {v: p for p, v in enumerate(order)}
    if len(pos) != len(order):
        raise ValueError("ordering repeats a vertex")
    return pos


def check_ordering(order: Ordering, n: int) -> dict[int, int]:
    pos = positions(order)
    if len(order) != n or set(order) != set(range(n)):
        raise ValueError("ordering is not a permutation of the vertex set")
    return pos


def from_backward_edges(
    n: int, order: Ordering, back_edges: Iterable[tuple[int, int]]
) -> Tournament:
    """Build the tournament whose backward edges under ``order`` are exactly
    ``back_edges``.

    Each pair (w, u) requests the edge w->u and must point from a later
    position to an earlier one; every unlisted pair is oriented forward along
    the ordering.
    """
    pos = check_ordering(order, n)
    back = set()
    for w, u in back_edges:
        if not (0 <= w < n and 0 <= u < n):
            raise ValueError(f"backward edge ({w},{u}) leaves the vertex range")
        if pos[u] >= pos[w]:
            raise ValueError(f"pair ({w},{u}) is oriented forward under the ordering")
        if (w, u) in back:
            raise ValueError(f"duplicate backward edge ({w},{u})")
        back.add((w, u))
    rows = [0] * n
    for p in range(n):
        for q in range(p + 1, n):
            u, w = order[p], order[q]
            if (w, u) in back:
                rows[w] |= 1 << u
            else:
                rows[u] |= 1 << w
    return Tournament(n, tuple(rows))


def backward_edges(t: Tournament, order: Ordering) -> set[tuple[int, int]]:
    """The set of edges of ``t`` pointing from a later to an earlier position."""
    pos = check_ordering(order, t.n)
    return {(u, v) for u, v in t.edges() if pos[u] > pos[v]}


def transitive_tournament(n: int) -> Tournament:
    rows = tuple(((1 << n) - 1) >> (u + 1) << (u + 1) for u in range(n))
    return Tournament(n, rows)


def cyclic_triangle() -> Tournament:
    return from_edges(3, [(0, 1), (1, 2), (2, 0)])


def random_tournament(n: int, rng: random.Random) -> Tournament:
    rows = [0] * n
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < 0.5:
                rows[u] |= 1 << v
            else:
                rows[v] |= 1 << u
    return Tournament(n, tuple(rows))


def complement(t: Tournament) -> Tournament:
    """Reverse the direction of every edge."""
    full = (1 << t.n) - 1
    return Tournament(t.n, tuple(full & ~row & ~(1 << u) for u, row in enumerate(t.rows)))


def induced(t: Tournament, vertices: Iterable[int]) -> Tournament:
    """Subtournament induced by ``vertices``, relabelled by increasing id."""
    sub = sorted(set(vertices))
    if not sub:
        raise ValueError("cannot induce on the empty set")
    if sub[0] < 0 or sub[-1] >= t.n:
        raise ValueError("vertex outside the tournament")
    index = {v: i for i, v in enumerate(sub)}
    rows = [0] * len(sub)
    for v in sub:
        for w in sub:
            if v != w and t.has_edge(v, w):
                rows[index[v]] |= 1 << index[w]
    return Tournament(len(sub), tuple(rows))


def is_transitive(t: Tournament) -> bool:
    """True iff the tournament has no directed triangle."""
    for u in range(t.n):
        out = t.rows[u]
        back = t.in_mask(u)
        v_bits = out
        while v_bits:
            v = (v_bits & -v_bits).bit_length() - 1
            v_bits &= v_bits - 1
            if t.rows[v] & back:
                return False
    return True


def is_transitive_subset(t: Tournament, mask: int) -> bool:
    """True iff the subtournament on the vertex bitmask is transitive."""
    bits = mask
    while bits:
        u = (bits & -bits).bit_length() - 1
        bits &= bits - 1
        out = t.rows[u] & mask
        back = t.in_mask(u) & mask
        v_bits = out
        while v_bits:
            v = (v_bits & -v_bits).bit_length() - 1
            v_bits &= v_bits - 1
            if t.rows[v] & back:
                return False
    return True


def largest_transitive(t: Tournament, budget: int = TR_BUDGET) -> frozenset[int]:
    """An exact maximum transitive vertex set, via memoized chain search.

    A transitive set ordered as v1,...,vk has every vi beating all later
    members, so best(mask) = max over v in mask of 1 + best(mask & out(v)).
    """
    if t.n > budget:
        raise BudgetError(f"exact transitive solver limited to n <= {budget}, got {t.n}")
    memo: dict[int, int] = {0: 0}

    def best(mask: int) -> int:
        cached = memo.get(mask)
        if cached is not None:
            return cached
        result = 0
        bits = mask
        while bits:
            v = (bits & -bits).bit_length() - 1
            bits &= bits - 1
            result = max(result, 1 + best(mask & t.rows[v]))
        memo[mask] = result
        return result

    chain = []
    mask = (1 << t.n) - 1
    size = best(mask)
    while size:
        bits = mask
        while bits:
            v = (bits & -bits).bit_length() - 1
            bits &= bits - 1
            if 1 + best(mask & t.rows[v]) == size:
                chain.append(v)
                mask &= t.rows[v]
                size -= 1
                break
    return frozenset(chain)


def density(t: Tournament, a: Iterable[int], b: Iterable[int]) -> Fraction:
    """d(A,B): fraction of the |A||B| pairs oriented from A to B."""
    a_set, b_set = set(a), set(b)
    if not a_set or not b_set:
        raise ValueError("density needs nonempty sets")
    if a_set & b_set:
        raise ValueError("density needs disjoint sets")
    b_mask = 0
    for v in b_set:
        b_mask |= 1 << v
    edges = sum(bin(t.rows[u] & b_mask).count("1") for u in a_set)
    return Fraction(edges, len(a_set) * len(b_set))


# ---------------------------------------------------------------------------
# Canonical forms, isomorphism, enumeration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CanonicalForm:
    """Isomorphism-invariant minimal adjacency encoding.

    The encoding lists, for each position q = 1..n-1, the column of bits
    edge(placed[i] -> placed[q]) for i < q, chosen so that the column sequence
    is lexicographically minimal over all vertex orderings.
    """

    n: int
    data: bytes


def _minimal_columns(t: Tournament) -> tuple[int, ...]:
    """Lexicographically minimal column encoding over all orderings.

    Depth-first search placing one vertex per position.  At each level only
    the candidates achieving the minimal next column are explored (columns at
    later levels cannot compensate a larger column here), which keeps the tie
    tree near the automorphism group's size.
    """
    n = t.n
    best: list[Optional[tuple[int, ...]]] = [None]

    def descend(placed: list[int], remaining: list[int], cols: list[int]) -> None:
        if not remaining:
            cand = tuple(cols)
            if best[0] is None or cand < best[0]:
                best[0] = cand
            return
        if not placed:
            for v in remaining:
                descend([v], [w for w in remaining if w != v], cols)
            return
        scored = []
        for v in remaining:
            col = 0
            for u in placed:
                col = col << 1 | (t.rows[u] >> v & 1)
            scored.append((col, v))
        low = min(col for col, _ in scored)
        level = len(cols)  # index of the column about to be fixed
        if best[0] is not None:
            if cols == list(best[0][:level]) and low > best[0][level]:
                return
        for col, v in sorted(scored):
            if col != low:
                break
            placed.append(v)
            cols.append(col)
            descend(placed, [w for w in remaining if w != v], cols)
            placed.pop()
            cols.pop()

    descend([], list(range(n)), [])
    assert best[0] is not None
    return best[0]


def _columns_to_bytes(n: int, cols: tuple[int, ...]) -> bytes:
    acc = 0
    for q, col in enumerate(cols, start=1):
        acc = acc << q | col
    nbits = n * (n - 1) // 2
    return bytes([n]) + acc.to_bytes((nbits + 7) // 8 or 1, "big")


def _tournament_from_columns(n: int, cols: tuple[int, ...]) -> Tournament:
    rows = [0] * n
    for q, col in enumerate(cols, start=1):
        for i in range(q):
            if col >> (q - 1 - i) & 1:
                rows[i] |= 1 << q
            else:
                rows[q] |= 1 << i
    return Tournament(n, tuple(rows))


def canonical_form(t: Tournament, budget: int = CANONICAL_BUDGET) -> CanonicalForm:
    if t.n > budget:
        raise BudgetError(f"canonical form limited to n <= {budget}, got {t.n}")
    return CanonicalForm(t.n, _columns_to_bytes(t.n, _minimal_columns(t)))


def isomorphic(t1: Tournament, t2: Tournament, budget: int = CANONICAL_BUDGET) -> bool:
    if t1.n != t2.n:
        return False
    return canonical_form(t1, budget) == canonical_form(t2, budget)


def enumerate_tournaments(n: int, budget: int = ENUMERATION_BUDGET) -> Iterator[Tournament]:
    """One representative per isomorphism class, by iterated one-vertex extension.

    Representatives are rebuilt from their canonical encodings, so the stream
    is deterministic and sorted by encoding.
    """
    if n > budget:
        raise BudgetError(f"enumeration limited to n <= {budget}, got {n}")
    if n < 1:
        raise ValueError("n must be positive")
    reps = {(): None}  # canonical column tuples at the current size
    size = 1
    while size < n:
        extended = set()
        for cols in reps:
            base = _tournament_from_columns(size, cols)
            for out_bits in range(1 << size):
                rows = list(base.rows) + [out_bits]
                for v in range(size):
                    if not (out_bits >> v & 1):
                        rows[v] |= 1 << size
                bigger = Tournament(size + 1, tuple(rows))
                extended.add(_minimal_columns(bigger))
        reps = dict.fromkeys(extended)
        size += 1
    for cols in sorted(reps):
        yield _tournament_from_columns(n, cols)


# ---------------------------------------------------------------------------
# Homogeneous sets and primality
# ---------------------------------------------------------------------------


def _module_closure(t: Tournament, u: int, v: int) -> int:
    """Bitmask of the minimal homogeneous set containing {u, v}.

    Grows the set by absorbing every splitter: a vertex with edges both into
    and out of the current set can never stay outside a containing module.
    """
    mask = 1 << u | 1 << v
    changed = True
    while changed:
        changed = False
        for w in range(t.n):
            if mask >> w & 1:
                continue
            inside = t.rows[w] & mask
            if inside != 0 and inside != mask:
                mask |= 1 << w
                changed = True
    return mask


def find_module(t: Tournament) -> Optional[frozenset[int]]:
    """A homogeneous set X with 2 <= |X| < n, or None if the tournament is prime.

    Every vertex outside X is complete to X or complete from X.  The minimal
    module containing each pair is computed by splitter closure; a nontrivial
    module exists iff some pair closure is proper.
    """
    full = (1 << t.n) - 1
    for u in range(t.n):
        for v in range(u + 1, t.n):
            mask = _module_closure(t, u, v)
            if mask != full:
                return frozenset(w for w in range(t.n) if mask >> w & 1)
    return None


def is_prime(t: Tournament) -> bool:
    return find_module(t) is None


def find_module_exhaustive(t: Tournament, budget: int = 16) -> Optional[frozenset[int]]:
    """Oracle for find_module: scan every subset of size 2..n-1."""
    if t.n > budget:
        raise BudgetError(f"exhaustive module search limited to n <= {budget}")
    full = (1 << t.n) - 1
    for mask in range(3, full):
        size = bin(mask).count("1")
        if size < 2:
            continue
        if all(
            (t.rows[w] & mask) in (0, mask)
            for w in range(t.n)
            if not mask >> w & 1
        ):
            return frozenset(v for v in range(t.n) if mask >> v & 1)
    return None
