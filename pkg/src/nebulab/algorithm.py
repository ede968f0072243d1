"""The phase algorithm: triple-classification coloring of part triples,
monochromatic clique selection, capacity-tracked star harvesting, and
forbidden-copy extraction from saturated vectors.

Parts are indexed 0..t-1.  Each k-subset of parts keeps one vector per
forbidden nebula, with one entry per component star; entries collect
vertex-disjoint witness triples up to the capacity ceil(W / (9k * C(t,k))).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence, Union

from .containment import Embedding
from .core import TR_BUDGET, Tournament, largest_transitive
from .errors import InvariantError, NebulabError
from .product import SMALL_STARS, PlacementNebula
from .stars import StarKind
from .structures import (
    CompletePair,
    NormalPart,
    Triple,
    TripleClass,
    WitnessTriple,
    classify_triple,
    extract_product,
    verify_structure,
    witness,
)


class ExtractionError(NebulabError):
    """Nonsaturation extraction failed a verification stage; carries details."""

    def __init__(self, stage: str, detail) -> None:
        super().__init__(f"extraction failed at {stage}")
        self.stage = stage
        self.detail = detail


@dataclass(frozen=True)
class CaseSpec:
    query: tuple[int, int]  # classify_triple query; its own j means white
    white: StarKind
    black: StarKind


CASES = {
    "LR": CaseSpec((2, 1), StarKind.LEFT, StarKind.RIGHT),
    "LC": CaseSpec((3, 1), StarKind.LEFT, StarKind.CENTRAL),
    "RC": CaseSpec((1, 2), StarKind.CENTRAL, StarKind.RIGHT),
}

SUBSET_BUDGET = 200_000


@dataclass(frozen=True)
class AlgorithmConfig:
    case: str
    nebulae: dict[StarKind, PlacementNebula]
    k: int
    t: int
    part_size: int
    c: Fraction
    lam: Fraction

    def __post_init__(self) -> None:
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case}")
        spec = CASES[self.case]
        if set(self.nebulae) != {spec.white, spec.black}:
            raise ValueError(
                f"case {self.case} needs nebulae for {spec.white.value} and {spec.black.value}"
            )
        if not 1 <= self.k <= self.t:
            raise ValueError("need 1 <= k <= t")
        for nebula in self.nebulae.values():
            if nebula.width > self.k:
                raise ValueError("nebula slots exceed the configured width k")
        if math.comb(self.t, self.k) > SUBSET_BUDGET:
            raise ValueError("t choose k exceeds the enumeration budget")
        if self.part_size < 1:
            raise ValueError("part size must be positive")

    @property
    def spec(self) -> CaseSpec:
        return CASES[self.case]

    @property
    def subsets(self) -> list[tuple[int, ...]]:
        return list(combinations(range(self.t), self.k))

    @property
    def capacity(self) -> int:
        denom = 9 * self.k * math.comb(self.t, self.k)
        return -(-self.part_size // denom)

    def phase_bound(self) -> int:
        return 2 * self.k * math.comb(self.t, self.k) * self.capacity

    def lambda_warning(self) -> Optional[str]:
        """The guarantee threshold from the saturation argument, when finite."""
        spec = CASES[self.case]
        c1 = self.nebulae[spec.white].star_count
        c2 = self.nebulae[spec.black].star_count
        if c1 <= 1 or c2 <= 1:
            return None
        denom = (
            3 * self.k * math.comb(self.t, self.k) * (c1 - 1) ** 2 * (c2 - 1) ** 2 * 81
        )
        threshold = Fraction(1, denom)
        if self.lam >= threshold:
            return f"lambda {self.lam} is not below the guarantee threshold {threshold}"
        return None


StoredTriple = tuple[int, int, int]


@dataclass
class PhaseState:
    phase: int
    sets: list[set[int]]
    initial_sets: tuple[frozenset[int], ...]
    vectors: dict[StarKind, list[list[list[StoredTriple]]]]
    used: set[int] = field(default_factory=set)


def initial_state(parts: Sequence[frozenset[int]], config: AlgorithmConfig) -> PhaseState:
    subsets = config.subsets
    vectors = {
        kind: [[[] for _ in nebula.placements] for _ in subsets]
        for kind, nebula in config.nebulae.items()
    }
    return PhaseState(
        phase=0,
        sets=[set(p) for p in parts],
        initial_sets=tuple(frozenset(p) for p in parts),
        vectors=vectors,
    )


# ---------------------------------------------------------------------------
# Outcomes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompletePairOutcome:
    pair: CompletePair
    state_label: int  # 0: uncolored edge, 2: witness fallback
    phase: int
    edge: tuple[int, ...]


@dataclass(frozen=True)
class ForbiddenCopyOutcome:
    kind: StarKind
    nebula: PlacementNebula
    pattern: Tournament
    embedding: Embedding
    phase: int
    subset_index: int


@dataclass(frozen=True)
class NoCliqueOutcome:
    phase: int
    white_edges: int
    black_edges: int


@dataclass(frozen=True)
class PhaseLimitOutcome:
    phase: int


Outcome = Union[CompletePairOutcome, ForbiddenCopyOutcome, NoCliqueOutcome, PhaseLimitOutcome]


@dataclass
class RunResult:
    outcome: Outcome
    phases: int
    trace: list[dict]


# ---------------------------------------------------------------------------
# One phase
# ---------------------------------------------------------------------------


ColorEntry = Union[tuple[str, TripleClass], tuple[str, CompletePair]]


def color_hyperedges(
    host: Tournament, sets: Sequence[set[int]], config: AlgorithmConfig
) -> dict[tuple[int, int, int], ColorEntry]:
    """Classify every 3-subset of parts; white when the case query's own j is
    emitted, black for the sibling verdict, uncolored with the complete pair
    otherwise."""
    i_q, j_q = config.spec.query
    coloring: dict[tuple[int, int, int], ColorEntry] = {}
    for edge in combinations(range(config.t), 3):
        for part in edge:
            if not sets[part]:
                raise InvariantError(
                    f"part {part} emptied: parameters are outside the accounting regime"
                )
        sigma = Triple(tuple(frozenset(sets[part]) for part in edge))
        verdict = classify_triple(host, sigma, i_q, j_q)
        if isinstance(verdict, CompletePair):
            coloring[edge] = ("uncolored", verdict)
        elif verdict.j == j_q:
            coloring[edge] = ("white", verdict)
        else:
            coloring[edge] = ("black", verdict)
    return coloring


def find_monochromatic_clique(
    coloring: dict[tuple[int, int, int], ColorEntry], t: int, k: int
) -> Optional[tuple[tuple[int, ...], str]]:
    """First all-white k-subset in lex order, else first all-black, else None."""
    for want in ("white", "black"):
        for subset in combinations(range(t), k):
            if all(
                coloring[edge][0] == want for edge in combinations(subset, 3)
            ):
                return subset, want
    return None


def run_phase(
    host: Tournament, state: PhaseState, config: AlgorithmConfig
) -> tuple[Optional[Outcome], dict]:
    """Execute one phase; returns (terminal outcome or None, trace record)."""
    coloring = color_hyperedges(host, state.sets, config)
    record: dict = {"phase": state.phase}
    for edge in sorted(coloring):
        label, payload = coloring[edge]
        if label == "uncolored":
            record.update(action="state-0", edge=list(edge))
            return (
                CompletePairOutcome(payload, 0, state.phase, edge),
                record,
            )
    record["white"] = sum(1 for v in coloring.values() if v[0] == "white")
    record["black"] = len(coloring) - record["white"]
    found = find_monochromatic_clique(coloring, config.t, config.k)
    if found is None:
        record.update(action="no-clique")
        return (
            NoCliqueOutcome(state.phase, record["white"], record["black"]),
            record,
        )
    subset, color = found
    kind = config.spec.white if color == "white" else config.spec.black
    subset_index = config.subsets.index(subset)
    record.update(clique=list(subset), color=color, kind=kind.value)
    nebula = config.nebulae[kind]
    vec = state.vectors[kind][subset_index]
    entry_index = next(
        (z for z, entry in enumerate(vec) if len(entry) < config.capacity), None
    )
    if entry_index is None:
        record.update(action="saturated")
        outcome = nonsaturation_extract(host, state, config, subset_index, kind)
        return outcome, record
    slots = nebula.placements[entry_index]
    x = tuple(subset[s - 1] for s in slots)
    sigma = Triple(tuple(frozenset(state.sets[part]) for part in x))
    verdict = coloring[x][1]
    assert isinstance(verdict, TripleClass)
    result = witness(host, sigma, verdict)
    if isinstance(result, CompletePair):
        record.update(action="state-2", edge=list(x))
        return CompletePairOutcome(result, 2, state.phase, x), record
    assert isinstance(result, WitnessTriple)
    vec[entry_index].append(result.vertices)
    for v in result.vertices:
        for part in state.sets:
            part.discard(v)
        state.used.add(v)
    record.update(
        action="append",
        entry=[kind.value, subset_index, entry_index],
        witness=list(result.vertices),
    )
    state.phase += 1
    return None, record


# ---------------------------------------------------------------------------
# Nonsaturation extraction
# ---------------------------------------------------------------------------


def nonsaturation_extract(
    host: Tournament,
    state: PhaseState,
    config: AlgorithmConfig,
    subset_index: int,
    kind: StarKind,
) -> ForbiddenCopyOutcome:
    """Turn a saturated vector into a validated copy of its forbidden nebula.

    The stored triples of each star fill one structure part per slot; the
    parts form a strong (c*theta, lambda/theta)-structure with
    theta = 1/(9k*C(t,k)), normal for every star, so the product extraction
    applies.  Any verification failure raises ExtractionError rather than
    fabricating a copy.
    """
    nebula = config.nebulae[kind]
    vec = state.vectors[kind][subset_index]
    cap = config.capacity
    if any(len(entry) != cap for entry in vec):
        raise ValueError("extraction requires every entry at capacity")
    subset = config.subsets[subset_index]
    slot_sources: dict[int, tuple[int, int]] = {}
    for z, slots in enumerate(nebula.placements):
        for m, slot in enumerate(slots):
            slot_sources[slot] = (z, m)
    used_slots = sorted(slot_sources)
    omega_sets: list[frozenset[int]] = []
    orderings: dict[int, tuple[int, ...]] = {}
    position_of_slot: dict[int, int] = {}
    for pos, slot in enumerate(used_slots):
        z, m = slot_sources[slot]
        column = tuple(entry[m] for entry in vec[z])
        omega_sets.append(frozenset(column))
        orderings[pos] = column
        position_of_slot[slot] = pos
        part_id = subset[slot - 1]
        if not set(column) <= state.initial_sets[part_id]:
            raise ExtractionError(
                "slot-membership", {"slot": slot, "part": part_id}
            )
    theta = Fraction(1, 9 * config.k * math.comb(config.t, config.k))
    cert = verify_structure(
        host, omega_sets, config.c * theta, config.lam / theta, strong=True
    )
    if not cert.passed:
        raise ExtractionError("strong-structure", cert)
    star, _ = SMALL_STARS[kind]()
    components = []
    for z, slots in enumerate(nebula.placements):
        phi = {m: position_of_slot[slots[m]] for m in range(3)}
        comp_orderings = {phi[m]: orderings[phi[m]] for m in range(3)}
        components.append(NormalPart(star, phi, comp_orderings))
    extraction = extract_product(
        host, omega_sets, components, lam=config.lam / theta
    )
    pattern = nebula.build().tournament
    if extraction.product.tournament != pattern:
        raise ExtractionError(
            "pattern-mismatch",
            {"extracted": extraction.product.tournament, "nebula": pattern},
        )
    if not extraction.embedding.validate(host, pattern):
        raise ExtractionError("embedding", extraction.embedding)
    return ForbiddenCopyOutcome(
        kind, nebula, pattern, extraction.embedding, state.phase, subset_index
    )


# ---------------------------------------------------------------------------
# Full runs
# ---------------------------------------------------------------------------


def check_state(host: Tournament, state: PhaseState, config: AlgorithmConfig) -> None:
    """Raise InvariantError on any violated phase invariant."""
    cap = config.capacity
    floor = Fraction(config.part_size, 3) - 6 * config.k * math.comb(config.t, config.k)
    stored: list[int] = []
    for kind, per_subset in state.vectors.items():
        nebula = config.nebulae[kind]
        star, _ = SMALL_STARS[kind]()
        for subset_index, vec in enumerate(per_subset):
            subset = config.subsets[subset_index]
            for z, entry in enumerate(vec):
                if len(entry) > cap:
                    raise InvariantError(
                        f"entry ({kind.value},{subset_index},{z}) exceeds capacity"
                    )
                slots = nebula.placements[z]
                for triple in entry:
                    stored.extend(triple)
                    for m in range(3):
                        part_id = subset[slots[m] - 1]
                        if triple[m] not in state.initial_sets[part_id]:
                            raise InvariantError(
                                f"stored vertex {triple[m]} outside its slot part"
                            )
                    for a in range(3):
                        for b in range(3):
                            if a != b and host.has_edge(triple[a], triple[b]) != star.has_edge(a, b):
                                raise InvariantError(
                                    f"stored triple {triple} does not induce the {kind.value} star"
                                )
    if len(stored) != len(set(stored)):
        raise InvariantError("stored triples are not vertex-disjoint")
    if set(stored) != state.used:
        raise InvariantError("used-vertex ledger out of sync")
    for j, current in enumerate(state.sets):
        if not current <= state.initial_sets[j]:
            raise InvariantError(f"part {j} grew beyond its initial set")
        if current & state.used:
            raise InvariantError(f"part {j} still holds stored vertices")
        if floor > 0 and len(current) < floor:
            raise InvariantError(f"part {j} fell below the size floor {floor}")
    removed = set().union(*state.initial_sets) - set().union(*state.sets)
    if removed != state.used:
        raise InvariantError("vertex conservation failed")


def run(
    host: Tournament,
    parts: Sequence[frozenset[int]],
    config: AlgorithmConfig,
    verify_input: bool = True,
) -> RunResult:
    """Run phases until a terminal outcome, re-validating every payload."""
    parts = [frozenset(p) for p in parts]
    if len(parts) != config.t:
        raise ValueError("structure part count does not match config.t")
    if any(len(p) != config.part_size for p in parts):
        raise ValueError("structure parts must all have size W")
    if verify_input:
        cert = verify_structure(host, parts, config.c, config.lam, strong=True)
        if not cert.passed:
            raise ValueError(
                f"initial structure fails strong verification: {cert.violations[:3]}"
            )
    state = initial_state(parts, config)
    trace: list[dict] = []
    warning = config.lambda_warning()
    if warning:
        trace.append({"phase": -1, "action": "warning", "message": warning})
    bound = config.phase_bound()
    outcome: Optional[Outcome] = None
    while state.phase < bound:
        outcome, record = run_phase(host, state, config)
        trace.append(record)
        check_state(host, state, config)
        if outcome is not None:
            break
    if outcome is None:
        outcome = PhaseLimitOutcome(state.phase)
        trace.append({"phase": state.phase, "action": "phase-limit"})
    _validate_outcome(host, outcome)
    trace.append({"phase": state.phase, "action": "terminal", "outcome": type(outcome).__name__})
    return RunResult(outcome, state.phase, trace)


def _validate_outcome(host: Tournament, outcome: Outcome) -> None:
    if isinstance(outcome, CompletePairOutcome):
        if not outcome.pair.validate(host):
            raise InvariantError("terminal complete pair failed edge re-validation")
    elif isinstance(outcome, ForbiddenCopyOutcome):
        if not outcome.embedding.validate(host, outcome.pattern):
            raise InvariantError("terminal forbidden copy failed re-validation")


def find_strong_structure(
    host: Tournament,
    t: int,
    part_size: int,
    c: Fraction,
    lam: Fraction,
    seed: int = 0,
    tries: int = 50,
) -> Optional[list[frozenset[int]]]:
    """Sampled search for a verifying strong structure: contiguous blocks
    first, then seeded random partitions."""
    need = t * part_size
    if need > host.n:
        return None
    candidates = [list(range(need))]
    rng = random.Random(seed)
    for _ in range(tries):
        candidates.append(rng.sample(range(host.n), need))
    for vertices in candidates:
        parts = [
            frozenset(vertices[i * part_size : (i + 1) * part_size]) for i in range(t)
        ]
        if verify_structure(host, parts, c, lam, strong=True).passed:
            return parts
    return None


def eh_induction_step(
    host: Tournament,
    pair: CompletePair,
    solver=None,
) -> frozenset[int]:
    """Combine transitive sets found in both halves of a complete pair.

    ``solver`` maps a subtournament to a transitive local vertex set; the
    default is the exact solver under its budget and the log-size extractor
    beyond it.  The union is transitive because A is complete to B; this is
    re-checked.
    """
    from .regularity import stearns_transitive

    if solver is None:

        def solver(sub: Tournament) -> frozenset[int]:
            if sub.n <= TR_BUDGET:
                return largest_transitive(sub)
            return frozenset(stearns_transitive(sub))

    if not pair.validate(host):
        raise ValueError("pair is not complete from A to B")
    from .core import induced, is_transitive

    combined: set[int] = set()
    for side in (pair.a, pair.b):
        ordered = sorted(side)
        local = solver(induced(host, ordered))
        combined |= {ordered[i] for i in local}
    if not is_transitive(induced(host, combined)):
        raise InvariantError("combined transitive sets are not transitive")
    return frozenset(combined)
