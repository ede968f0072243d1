"""Density structures, ordered-triple classification, and witness extraction.

Triple positions are 1-based (sets S_1, S_2, S_3) so the (i,j) case names
match the usual notation.  All half-thresholds are compared as 2*|set| vs
cardinality, keeping the arithmetic integral.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence, Union

from .containment import Embedding
from .core import Tournament, induced, is_transitive, largest_transitive
from .errors import CoverageTieError, InvariantError, LambdaTooLargeError
from .product import Placement, ProductResult, product
from .stars import StarKind


# ---------------------------------------------------------------------------
# Strong (c, lambda, w)-structures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    check: str
    detail: dict


@dataclass(frozen=True)
class StructureCertificate:
    passed: bool
    violations: tuple[Violation, ...]
    c: Fraction
    lam: Fraction
    strong: bool


@dataclass(frozen=True)
class StrongStructure:
    """Disjoint host subsets with density parameters; w entries of 1 ask for
    transitive parts sized against tr(host) instead of n (unused by the main
    algorithm, kept for fidelity)."""

    host: Tournament
    parts: tuple[frozenset[int], ...]
    c: Fraction
    lam: Fraction
    w: tuple[int, ...] = ()

    def verify(self, strong: bool = True) -> "StructureCertificate":
        w = self.w if self.w else None
        return verify_structure(self.host, self.parts, self.c, self.lam, strong, w)


def verify_structure(
    host: Tournament,
    subsets: Sequence[frozenset[int]],
    c: Fraction,
    lam: Fraction,
    strong: bool = False,
    w: Optional[Sequence[int]] = None,
) -> StructureCertificate:
    """Check every condition of a (c, lambda, w)-structure, listing violations.

    With ``strong`` the per-vertex density conditions are checked as well.
    The w-vector defaults to all zeros; a 1-entry asks for a transitive part
    of size at least c*tr(host) instead of c*n.
    """
    c, lam = Fraction(c), Fraction(lam)
    parts = [frozenset(s) for s in subsets]
    if w is None:
        w = [0] * len(parts)
    if len(w) != len(parts):
        raise ValueError("w-vector length does not match the subset count")
    seen: set[int] = set()
    for s in parts:
        if s & seen:
            raise ValueError("subsets overlap")
        seen |= s
    violations: list[Violation] = []
    n = host.n
    tr_size: Optional[int] = None
    for i, s in enumerate(parts):
        if w[i] == 0:
            if len(s) < c * n:
                violations.append(
                    Violation("size", {"part": i, "size": len(s), "bound": c * n})
                )
        else:
            if not s or not is_transitive(induced(host, s)):
                violations.append(Violation("transitive-part", {"part": i}))
            if tr_size is None:
                tr_size = len(largest_transitive(host))
            if len(s) < c * tr_size:
                violations.append(
                    Violation("size-tr", {"part": i, "size": len(s), "bound": c * tr_size})
                )
    for i, j in combinations(range(len(parts)), 2):
        d = _density_masks(host, parts[i], parts[j])
        if d < 1 - lam:
            violations.append(Violation("pair-density", {"i": i, "j": j, "d": d}))
    if strong:
        for i, s in enumerate(parts):
            for j, other in enumerate(parts):
                if i == j:
                    continue
                for v in sorted(s):
                    if i < j:
                        d = _density_masks(host, frozenset((v,)), other)
                        kind = "strong-out"
                    else:
                        d = _density_masks(host, other, frozenset((v,)))
                        kind = "strong-in"
                    if d < 1 - lam:
                        violations.append(
                            Violation(kind, {"i": i, "j": j, "vertex": v, "d": d})
                        )
    return StructureCertificate(not violations, tuple(violations), c, lam, strong)


def _density_masks(host: Tournament, a: frozenset[int], b: frozenset[int]) -> Fraction:
    b_mask = 0
    for v in b:
        b_mask |= 1 << v
    edges = sum(bin(host.rows[u] & b_mask).count("1") for u in a)
    return Fraction(edges, len(a) * len(b))


# ---------------------------------------------------------------------------
# Ordered triples and the coverage trichotomy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Triple:
    sets: tuple[frozenset[int], frozenset[int], frozenset[int]]

    def __post_init__(self) -> None:
        if len(self.sets) != 3:
            raise ValueError("a triple holds exactly three sets")
        if any(not s for s in self.sets):
            raise ValueError("triple sets must be nonempty")
        if sum(len(s) for s in self.sets) != len(
            self.sets[0] | self.sets[1] | self.sets[2]
        ):
            raise ValueError("triple sets must be pairwise disjoint")

    def get(self, index: int) -> frozenset[int]:
        return self.sets[index - 1]


def make_triple(s1, s2, s3) -> Triple:
    return Triple((frozenset(s1), frozenset(s2), frozenset(s3)))


def neighborhood(host: Tournament, sigma: Triple, v: int, j: int) -> frozenset[int]:
    """N(v, j): in-neighbours of v inside S_j when j is later than v's set,
    out-neighbours when earlier."""
    i = next((k for k in (1, 2, 3) if v in sigma.get(k)), None)
    if i is None:
        raise ValueError(f"vertex {v} is in no set of the triple")
    if j == i or j not in (1, 2, 3):
        raise ValueError(f"invalid target index {j} for vertex in S_{i}")
    target = sigma.get(j)
    if j > i:
        return frozenset(w for w in target if host.has_edge(w, v))
    return frozenset(w for w in target if host.has_edge(v, w))


@dataclass(frozen=True)
class CompletePair:
    a: frozenset[int]
    b: frozenset[int]

    def validate(self, host: Tournament) -> bool:
        if not self.a or not self.b or self.a & self.b:
            return False
        return all(host.has_edge(u, v) for u in self.a for v in self.b)


@dataclass(frozen=True)
class TripleClass:
    """(i, j) verdict: coverage of S_j reaches half no later than S_l's."""

    i: int
    j: int
    l: int
    ordering: tuple[int, ...]
    k_j: int
    k_l: int
    coverage_j: tuple[int, ...]
    coverage_l: tuple[int, ...]


TripleVerdict = Union[CompletePair, TripleClass]


def _coverage_profile(
    host: Tournament, sigma: Triple, i: int, j: int, ordering: Sequence[int]
) -> tuple[tuple[int, ...], frozenset[int], list[frozenset[int]]]:
    """Cumulative union cardinalities of N(v, j) along the ordering of S_i."""
    union: set[int] = set()
    profile = []
    prefix_sets = []
    for v in ordering:
        union |= neighborhood(host, sigma, v, j)
        profile.append(len(union))
        prefix_sets.append(frozenset(union))
    return tuple(profile), frozenset(union), prefix_sets


def classify_triple(host: Tournament, sigma: Triple, i: int, j: int) -> TripleVerdict:
    """The trichotomy: a complete pair, an (i,j)-triple, or an (i,l)-triple.

    If a total neighbourhood union misses half of its target, the untouched
    half is complete to S_i (or the reverse) and a CompletePair is emitted.
    Otherwise S_i is ordered by ascending id and the verdict follows the
    first-to-half comparison of the two cumulative coverages; ties go to the
    queried j.
    """
    if i not in (1, 2, 3) or j not in (1, 2, 3) or i == j:
        raise ValueError(f"invalid triple indices ({i},{j})")
    l = 6 - i - j
    ordering = tuple(sorted(sigma.get(i)))
    prof_j, total_j, _ = _coverage_profile(host, sigma, i, j, ordering)
    prof_l, total_l, _ = _coverage_profile(host, sigma, i, l, ordering)
    for target, total in ((j, total_j), (l, total_l)):
        size = len(sigma.get(target))
        if 2 * len(total) < size:
            untouched = sigma.get(target) - total
            if target > i:
                pair = CompletePair(sigma.get(i), untouched)
            else:
                pair = CompletePair(untouched, sigma.get(i))
            return pair
    k_j = next(k for k, cov in enumerate(prof_j, 1) if 2 * cov >= len(sigma.get(j)))
    k_l = next(k for k, cov in enumerate(prof_l, 1) if 2 * cov >= len(sigma.get(l)))
    if k_j <= k_l:
        return TripleClass(i, j, l, ordering, k_j, k_l, prof_j, prof_l)
    return TripleClass(i, l, j, ordering, k_l, k_j, prof_l, prof_j)


# ---------------------------------------------------------------------------
# Witness extraction: vertex patterns or guaranteed complete pairs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WitnessTriple:
    """(v1, v2, v3) with v_m in S_m and the pattern's three edges present."""

    vertices: tuple[int, int, int]
    pattern: StarKind

    def validate(self, host: Tournament, sigma: Triple) -> bool:
        vs = self.vertices
        if any(vs[m - 1] not in sigma.get(m) for m in (1, 2, 3)):
            return False
        return all(
            host.has_edge(vs[a - 1], vs[b - 1]) for a, b in PATTERN_EDGES[self.pattern]
        )


# pattern edges as (source position, target position), positions 1..3
PATTERN_EDGES = {
    StarKind.LEFT: ((2, 1), (3, 1), (2, 3)),
    StarKind.RIGHT: ((3, 1), (3, 2), (1, 2)),
    StarKind.CENTRAL: ((2, 1), (3, 2), (1, 3)),
}

# (i, j) -> (pattern, A side, B side); 'cov' takes the coverage prefix set in
# S_index, 'compl' its complement; A is complete to B
WITNESS_TABLE: dict[tuple[int, int], tuple[StarKind, tuple[str, int], tuple[str, int]]] = {
    (2, 1): (StarKind.LEFT, ("cov", 1), ("compl", 3)),
    (3, 1): (StarKind.LEFT, ("cov", 1), ("compl", 2)),
    (2, 3): (StarKind.RIGHT, ("compl", 1), ("cov", 3)),
    (1, 3): (StarKind.RIGHT, ("compl", 2), ("cov", 3)),
    (1, 2): (StarKind.CENTRAL, ("cov", 2), ("compl", 3)),
    (3, 2): (StarKind.CENTRAL, ("compl", 1), ("cov", 2)),
}


def _find_pattern_triple(
    host: Tournament, sigma: Triple, pattern: StarKind
) -> Optional[WitnessTriple]:
    edges = PATTERN_EDGES[pattern]
    s1, s2, s3 = (sorted(sigma.get(m)) for m in (1, 2, 3))
    for v1 in s1:
        for v2 in s2:
            for v3 in s3:
                vs = (v1, v2, v3)
                if all(host.has_edge(vs[a - 1], vs[b - 1]) for a, b in edges):
                    return WitnessTriple(vs, pattern)
    return None


def witness(
    host: Tournament, sigma: Triple, verdict: TripleClass
) -> Union[WitnessTriple, CompletePair]:
    """Extract the star pattern promised by an (i,j)-verdict, or a half-sized
    complete pair built from the coverage prefixes when no pattern exists.

    The pair construction needs a step k at which the j-coverage has reached
    half while the l-coverage has not exceeded it; when the two coverages
    cross half at the same step and no vertex pattern exists, no k qualifies
    and a CoverageTieError is raised instead of returning an undersized pair.
    """
    key = (verdict.i, verdict.j)
    if key not in WITNESS_TABLE:
        raise ValueError(f"no witness pattern for verdict {key}")
    pattern, a_spec, b_spec = WITNESS_TABLE[key]
    found = _find_pattern_triple(host, sigma, pattern)
    if found is not None:
        return found
    _, _, prefixes_j = _coverage_profile(
        host, sigma, verdict.i, verdict.j, verdict.ordering
    )
    _, _, prefixes_l = _coverage_profile(
        host, sigma, verdict.i, verdict.l, verdict.ordering
    )
    size_j = len(sigma.get(verdict.j))
    size_l = len(sigma.get(verdict.l))
    for k in range(1, len(verdict.ordering) + 1):
        cov_j = prefixes_j[k - 1]
        cov_l = prefixes_l[k - 1]
        if 2 * len(cov_j) >= size_j and 2 * len(cov_l) <= size_l:
            sides = {}
            for label, (role, index) in (("a", a_spec), ("b", b_spec)):
                cov = cov_j if index == verdict.j else cov_l
                sides[label] = cov if role == "cov" else sigma.get(index) - cov
            pair = CompletePair(frozenset(sides["a"]), frozenset(sides["b"]))
            if not pair.validate(host):
                raise InvariantError(
                    "coverage pair failed completeness despite missing pattern"
                )
            return pair
    raise CoverageTieError(
        f"verdict ({verdict.i},{verdict.j}) with k_j={verdict.k_j}, k_l={verdict.k_l}: "
        "no step satisfies both half bounds"
    )


def witness_left(
    host: Tournament, sigma: Triple, verdict: Optional[TripleClass] = None
) -> Union[WitnessTriple, CompletePair]:
    return _witness_kind(host, sigma, verdict, StarKind.LEFT, default_query=(2, 1))


def witness_right(
    host: Tournament, sigma: Triple, verdict: Optional[TripleClass] = None
) -> Union[WitnessTriple, CompletePair]:
    return _witness_kind(host, sigma, verdict, StarKind.RIGHT, default_query=(2, 3))


def witness_central(
    host: Tournament, sigma: Triple, verdict: Optional[TripleClass] = None
) -> Union[WitnessTriple, CompletePair]:
    return _witness_kind(host, sigma, verdict, StarKind.CENTRAL, default_query=(1, 2))


def _witness_kind(host, sigma, verdict, kind, default_query):
    if verdict is None:
        verdict = classify_triple(host, sigma, *default_query)
        if isinstance(verdict, CompletePair):
            return verdict
    expected, _, _ = WITNESS_TABLE.get((verdict.i, verdict.j), (None, None, None))
    if expected is not kind:
        raise ValueError(
            f"verdict ({verdict.i},{verdict.j}) does not match the {kind.value} pattern"
        )
    return witness(host, sigma, verdict)


# ---------------------------------------------------------------------------
# (H, phi)-normality and product extraction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalPart:
    """One component of a normal family: the tournament, its part map, and
    per-part row orderings (orderings[part index][row] = vertex)."""

    pattern: Tournament
    phi: dict[int, int]
    orderings: dict[int, tuple[int, ...]]


def is_normal(
    host: Tournament,
    parts: Sequence[frozenset[int]],
    pattern: Tournament,
    phi: dict[int, int],
    orderings: dict[int, tuple[int, ...]],
) -> bool:
    """Row-by-row check that the indexed rows each induce a copy of the pattern."""
    sizes = {len(p) for p in parts}
    if len(sizes) != 1:
        raise ValueError("normality needs equal part sizes")
    t = sizes.pop()
    if sorted(phi) != list(range(pattern.n)) or len(set(phi.values())) != pattern.n:
        raise ValueError("phi must be injective over the pattern's vertex set")
    for h, part_index in phi.items():
        ordering = orderings.get(part_index)
        if ordering is None or sorted(ordering) != sorted(parts[part_index]):
            return False
        if len(ordering) != t:
            return False
    for row in range(t):
        for a in range(pattern.n):
            for b in range(pattern.n):
                if a == b:
                    continue
                va = orderings[phi[a]][row]
                vb = orderings[phi[b]][row]
                if host.has_edge(va, vb) != pattern.has_edge(a, b):
                    return False
    return True


@dataclass(frozen=True)
class ProductEmbedding:
    product: ProductResult
    embedding: Embedding
    rows_used: tuple[int, ...]
    turan_gate: dict


def turan_threshold(p: int, max_part: int) -> Optional[Fraction]:
    """Density slack below which the row graph is guaranteed a p-clique."""
    if p <= 1:
        return None
    return Fraction(1, (p - 1) ** 2 * max_part**2)


def extract_product(
    host: Tournament,
    parts: Sequence[frozenset[int]],
    components: Sequence[NormalPart],
    lam: Fraction,
) -> ProductEmbedding:
    """Find one fully slot-consistent row per component and return the union
    embedding, validated as a copy of the slot product of the components.

    The clique search runs regardless of lambda; LambdaTooLargeError is
    raised only when it fails.
    """
    if not components:
        raise ValueError("extract_product needs at least one component")
    used_indices: set[int] = set()
    for comp in components:
        if set(comp.phi.values()) & used_indices:
            raise ValueError("component part maps overlap")
        used_indices |= set(comp.phi.values())
        if not is_normal(host, parts, comp.pattern, comp.phi, comp.orderings):
            raise ValueError("structure is not normal for a component")
    t = len(parts[0])
    p = len(components)

    def row_vertices(m: int, s: int) -> list[tuple[int, int]]:
        comp = components[m]
        return [(comp.phi[h], comp.orderings[comp.phi[h]][s]) for h in range(comp.pattern.n)]

    def rows_compatible(m1: int, s1: int, m2: int, s2: int) -> bool:
        for k1, v1 in row_vertices(m1, s1):
            for k2, v2 in row_vertices(m2, s2):
                if k1 < k2:
                    if not host.has_edge(v1, v2):
                        return False
                elif not host.has_edge(v2, v1):
                    return False
        return True

    edge_count = 0
    adjacency: dict[tuple[int, int], set[int]] = {}
    for m1 in range(p):
        for m2 in range(m1 + 1, p):
            for s1 in range(t):
                ok = {s2 for s2 in range(t) if rows_compatible(m1, s1, m2, s2)}
                adjacency[(m1 * t + s1, m2)] = ok
                edge_count += len(ok)

    chosen: list[int] = []

    def descend(m: int) -> bool:
        if m == p:
            return True
        for s in range(t):
            if all(
                s in adjacency[(m_prev * t + chosen[m_prev], m)]
                for m_prev in range(m)
            ):
                chosen.append(s)
                if descend(m + 1):
                    return True
                chosen.pop()
        return False

    max_part = max(comp.pattern.n for comp in components)
    threshold = turan_threshold(p, max_part)
    total_vertices = p * t
    gate = {
        "edges": edge_count,
        "vertices": total_vertices,
        "epsilon": lam * max_part**2,
        "bound": Fraction(total_vertices**2, 2)
        * (1 - Fraction(1, p))
        * (1 - lam * max_part**2)
        if p > 1
        else Fraction(0),
        "threshold": threshold,
    }
    if not descend(0):
        raise LambdaTooLargeError(lam, threshold)

    placements: list[tuple[Tournament, Placement]] = [
        (comp.pattern, dict(comp.phi)) for comp in components
    ]
    prod = product([(pat, {v: slot + 1 for v, slot in pl.items()}) for pat, pl in placements])
    mapping = [0] * prod.tournament.n
    for m, comp in enumerate(components):
        for h in range(comp.pattern.n):
            prod_vertex = prod.vertex_map[(m, h)]
            mapping[prod_vertex] = comp.orderings[comp.phi[h]][chosen[m]]
    embedding = Embedding(tuple(mapping))
    if not embedding.validate(host, prod.tournament):
        raise InvariantError("extracted rows do not induce the product")
    return ProductEmbedding(prod, embedding, tuple(chosen), gate)


# ---------------------------------------------------------------------------
# Exact clique search on small undirected graphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UGraph:
    n: int
    adj: tuple[int, ...]  # symmetric bitmask rows, no loops

    def __post_init__(self) -> None:
        for u in range(self.n):
            if self.adj[u] >> u & 1:
                raise ValueError("loops are not allowed")
            for v in range(u + 1, self.n):
                if (self.adj[u] >> v & 1) != (self.adj[v] >> u & 1):
                    raise ValueError("adjacency must be symmetric")

    def edge_count(self) -> int:
        return sum(bin(r).count("1") for r in self.adj) // 2


def ugraph_from_edges(n: int, edges) -> UGraph:
    adj = [0] * n
    for u, v in edges:
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    return UGraph(n, tuple(adj))


def turan_clique(g: UGraph, p: int) -> Optional[tuple[int, ...]]:
    """Exact search for a p-clique, lexicographically least, None if absent."""
    if p <= 0:
        return ()
    best: list[Optional[tuple[int, ...]]] = [None]

    def descend(chosen: list[int], cand: int) -> bool:
        if len(chosen) == p:
            best[0] = tuple(chosen)
            return True
        if len(chosen) + bin(cand).count("1") < p:
            return False
        bits = cand
        while bits:
            v = (bits & -bits).bit_length() - 1
            bits &= bits - 1
            chosen.append(v)
            if descend(chosen, cand & g.adj[v] & ~((1 << (v + 1)) - 1)):
                return True
            chosen.pop()
        return False

    descend([], (1 << g.n) - 1)
    return best[0]
