"""Density-regularity machinery and the strong-structure pipeline.

Thresholds are exact: an epsilon given as a float is read through its decimal
representation (``Fraction(str(eps))``), so 0.25 means exactly 1/4.  All
pair checks reduce to integer comparisons.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence, Union

import numpy as np

from .containment import Embedding
from .core import Tournament, density, from_edges
from .errors import BudgetError
from .structures import UGraph, turan_clique, ugraph_from_edges

EXACT_PAIR_BUDGET = 12


def to_fraction(eps) -> Fraction:
    if isinstance(eps, Fraction):
        return eps
    if isinstance(eps, float):
        return Fraction(str(eps))
    return Fraction(eps)


@dataclass(frozen=True)
class ViolatingPair:
    x: frozenset[int]
    y: frozenset[int]
    d_xy: Fraction
    d_ab: Fraction


@dataclass(frozen=True)
class PairVerdict:
    passed: bool
    violator: Optional[ViolatingPair]
    exact: bool
    trials: int = 0


def regular_pair_exact(
    host: Tournament,
    a: Sequence[int],
    b: Sequence[int],
    eps,
    budget: int = EXACT_PAIR_BUDGET,
) -> PairVerdict:
    """Exhaustive scan over all qualifying subset pairs.

    Passes iff no X in A, Y in B with |X| >= eps|A|, |Y| >= eps|B| has
    |d(X,Y) - d(A,B)| > eps; otherwise reports the first violator.
    """
    a, b = sorted(set(a)), sorted(set(b))
    if set(a) & set(b):
        raise ValueError("pair sets must be disjoint")
    if len(a) > budget or len(b) > budget:
        raise BudgetError(f"exact pair check limited to sides <= {budget}")
    eps = to_fraction(eps)
    num, den = eps.numerator, eps.denominator
    # the int64 sweep multiplies num/den by at most (|A||B|)^2
    if max(num, den) * (len(a) * len(b)) ** 2 > 2**62:
        raise ValueError("epsilon numerator/denominator too large for the exact sweep")
    na, nb = len(a), len(b)
    base = np.array(
        [[1 if host.has_edge(u, v) else 0 for v in b] for u in a], dtype=np.int64
    )
    counts = np.zeros((1 << na, nb), dtype=np.int64)
    for mask in range(1, 1 << na):
        low = mask & -mask
        counts[mask] = counts[mask ^ low] + base[low.bit_length() - 1]
    y_masks = np.arange(1 << nb, dtype=np.int64)
    member = np.array(
        [[(m >> i) & 1 for m in range(1 << nb)] for i in range(nb)], dtype=np.int64
    )
    y_sizes = member.sum(axis=0)
    y_ok = (y_sizes * den >= num * nb) & (y_sizes > 0)
    e0 = int(counts[(1 << na) - 1].sum())
    ab = na * nb
    for xmask in range(1, 1 << na):
        x_size = bin(xmask).count("1")
        if x_size * den < num * na:
            continue
        e1 = counts[xmask] @ member
        lhs = np.abs(e1 * ab - e0 * x_size * y_sizes) * den
        rhs = num * x_size * y_sizes * ab
        bad = y_ok & (lhs > rhs)
        if bad.any():
            ymask = int(y_masks[bad][0])
            x = frozenset(a[i] for i in range(na) if xmask >> i & 1)
            y = frozenset(b[i] for i in range(nb) if ymask >> i & 1)
            return PairVerdict(
                False,
                ViolatingPair(x, y, density(host, x, y), Fraction(e0, ab)),
                exact=True,
            )
    return PairVerdict(True, None, exact=True)


def regular_pair_sampled(
    host: Tournament,
    a: Sequence[int],
    b: Sequence[int],
    eps,
    trials: int = 200,
    seed: int = 0,
) -> PairVerdict:
    """Randomized surrogate: a Fail carries a concrete violator and is
    definitive; a Pass only means no violator was sampled."""
    a, b = sorted(set(a)), sorted(set(b))
    eps = to_fraction(eps)
    num, den = eps.numerator, eps.denominator
    rng = random.Random(seed)
    na, nb = len(a), len(b)
    min_x = max(1, -(-num * na // den))
    min_y = max(1, -(-num * nb // den))
    d_ab = density(host, a, b)
    for _ in range(trials):
        x = frozenset(rng.sample(a, rng.randint(min_x, na)))
        y = frozenset(rng.sample(b, rng.randint(min_y, nb)))
        d_xy = density(host, x, y)
        if abs(d_xy - d_ab) > eps:
            return PairVerdict(False, ViolatingPair(x, y, d_xy, d_ab), exact=False, trials=trials)
    return PairVerdict(True, None, exact=False, trials=trials)


@dataclass(frozen=True)
class PartitionCertificate:
    passed: bool
    exceptional_ok: bool
    equal_sizes: bool
    irregular_pairs: tuple[tuple[int, int], ...]
    irregular_bound: int
    method: str


def verify_regular_partition(
    host: Tournament,
    exceptional: Sequence[int],
    parts: Sequence[Sequence[int]],
    eps,
    method: str = "exact",
    trials: int = 200,
    seed: int = 0,
) -> PartitionCertificate:
    """Check the three partition conditions and count irregular pairs."""
    eps_f = to_fraction(eps)
    v0 = set(exceptional)
    all_parts = [sorted(set(p)) for p in parts]
    covered: set[int] = set(v0)
    for p in all_parts:
        if covered & set(p):
            raise ValueError("partition classes overlap")
        covered |= set(p)
    if covered != set(range(host.n)):
        raise ValueError("partition does not cover the vertex set")
    k = len(all_parts)
    exceptional_ok = len(v0) * eps_f.denominator <= eps_f.numerator * host.n
    equal_sizes = len({len(p) for p in all_parts}) <= 1
    irregular = []
    for i, j in combinations(range(k), 2):
        if method == "exact":
            verdict = regular_pair_exact(host, all_parts[i], all_parts[j], eps_f)
        else:
            verdict = regular_pair_sampled(
                host, all_parts[i], all_parts[j], eps_f, trials=trials,
                seed=seed + 31 * i + j,
            )
        if not verdict.passed:
            irregular.append((i, j))
    bound_ok = len(irregular) * eps_f.denominator <= eps_f.numerator * k * k
    return PartitionCertificate(
        exceptional_ok and equal_sizes and bound_ok,
        exceptional_ok,
        equal_sizes,
        tuple(irregular),
        math.floor(eps_f * k * k),
        method,
    )


def embed_via_regular_parts(
    host: Tournament,
    parts: Sequence[Sequence[int]],
    pattern: Tournament,
    eta,
    lam_density,
) -> Optional[Embedding]:
    """Greedy one-vertex-per-part embedding with candidate tracking.

    Each part hosts one pattern vertex; candidates are filtered by the
    orientation toward every placed vertex, and the pick maximizes the worst
    remaining candidate count.  Returns None when candidates run out; the
    guarantee threshold eta(k, lambda) is never computed, so None is
    inconclusive.
    """
    if len(parts) != pattern.n:
        raise ValueError("need exactly one part per pattern vertex")
    lam_f = to_fraction(lam_density)
    part_sets = [sorted(set(p)) for p in parts]
    for i, j in combinations(range(len(part_sets)), 2):
        if density(host, part_sets[i], part_sets[j]) < lam_f or density(
            host, part_sets[j], part_sets[i]
        ) < lam_f:
            raise ValueError(f"parts {i},{j} miss the density floor {lam_f}")
    candidates = [set(p) for p in part_sets]
    chosen: list[int] = []
    for i in range(pattern.n):
        best_v, best_score = None, None
        for v in sorted(candidates[i]):
            futures = []
            feasible = True
            for j in range(i + 1, pattern.n):
                if pattern.has_edge(i, j):
                    allowed = {w for w in candidates[j] if host.has_edge(v, w)}
                else:
                    allowed = {w for w in candidates[j] if host.has_edge(w, v)}
                if not allowed:
                    feasible = False
                    break
                futures.append(len(allowed))
            if not feasible:
                continue
            score = min(futures) if futures else 0
            if best_score is None or score > best_score:
                best_v, best_score = v, score
        if best_v is None:
            return None
        chosen.append(best_v)
        for j in range(i + 1, pattern.n):
            if pattern.has_edge(i, j):
                candidates[j] = {w for w in candidates[j] if host.has_edge(best_v, w)}
            else:
                candidates[j] = {w for w in candidates[j] if host.has_edge(w, best_v)}
    emb = Embedding(tuple(chosen))
    return emb if emb.validate(host, pattern) else None


def stearns_transitive(t: Tournament) -> list[int]:
    """Transitive chain of size at least floor(log2 n) + 1.

    Recursive majority: pick the vertex whose larger side is largest, keep
    that side, and put the vertex before its out-side or after its in-side.
    """

    def chain(mask: int) -> list[int]:
        if mask == 0:
            return []
        best_v, best_size, best_out = -1, -1, 0
        bits = mask
        while bits:
            v = (bits & -bits).bit_length() - 1
            bits &= bits - 1
            out = bin(t.rows[v] & mask).count("1")
            inn = bin(t.in_mask(v) & mask).count("1")
            size = max(out, inn)
            if size > best_size:
                best_v, best_size, best_out = v, size, out >= inn
        if best_out:
            return [best_v] + chain(t.rows[best_v] & mask)
        return chain(t.in_mask(best_v) & mask) + [best_v]

    return chain((1 << t.n) - 1)


# ---------------------------------------------------------------------------
# The strong-structure pipeline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StageFailure:
    stage: str
    inequality: str
    detail: object = None


@dataclass(frozen=True)
class PipelineReport:
    selected: tuple[int, ...]
    pair_labels: dict
    stable_parts: tuple[int, ...]
    t_hat_edges: tuple[tuple[int, int], ...]
    chain: tuple[int, ...]
    q_sizes: dict
    f_sizes: tuple[int, ...]
    finals: tuple[tuple[int, ...], ...]
    c: Fraction
    turan_u: Optional[int]
    bullets: dict


def _turan_u(eta: Fraction, k_target: int, cap: int = 10_000) -> Optional[int]:
    """Smallest u with C(u,2) - eta*u^2 > (k-2)/(2(k-1)) * u^2 for all u' >= u."""
    if k_target < 2:
        return None
    rhs_coeff = Fraction(k_target - 2, 2 * (k_target - 1))
    u = None
    for cand in range(cap, 1, -1):
        lhs = Fraction(cand * (cand - 1), 2) - eta * cand * cand
        if lhs > rhs_coeff * cand * cand:
            u = cand
        else:
            break
    return u


def strong_structure_pipeline(
    host: Tournament,
    exceptional: Sequence[int],
    parts: Sequence[Sequence[int]],
    pattern: Tournament,
    p_target: int,
    lam,
    eta,
    pair_method: str = "exact",
    seed: int = 0,
) -> Union[PipelineReport, StageFailure]:
    """Stages: regular-part selection, good/bad labelling, the clique/stable
    dichotomy, the derived part tournament, log-size chain extraction, and
    the per-vertex density filtering that equalizes the final sets."""
    lam_f = to_fraction(lam)
    eta_f = to_fraction(eta)
    big_lam = lam_f / (4 * p_target)
    part_sets = [sorted(set(p)) for p in parts]
    r = len(part_sets)

    cert = verify_regular_partition(
        host, exceptional, part_sets, eta_f, method=pair_method, seed=seed
    )
    if not cert.passed:
        return StageFailure("partition", "partition certificate failed", cert)

    regular_edges = [
        (i, j)
        for i, j in combinations(range(r), 2)
        if (i, j) not in cert.irregular_pairs
    ]
    g = ugraph_from_edges(r, regular_edges)
    selected: Optional[tuple[int, ...]] = None
    for size in range(r, 0, -1):
        clique = turan_clique(g, size)
        if clique is not None:
            selected = clique
            break
    needed = 2 ** (p_target - 1)
    if selected is None or len(selected) < needed:
        return StageFailure(
            "turan-selection",
            f"largest pairwise-regular family has {0 if selected is None else len(selected)}"
            f" parts, need at least {needed}",
        )
    turan_u = _turan_u(eta_f, len(selected))

    labels = {}
    for i, j in combinations(selected, 2):
        d = density(host, part_sets[i], part_sets[j])
        labels[(i, j)] = "good" if big_lam <= d <= 1 - big_lam else "bad"

    good_graph = ugraph_from_edges(
        len(selected),
        [
            (selected.index(i), selected.index(j))
            for (i, j), label in labels.items()
            if label == "good"
        ],
    )
    full = (1 << len(selected)) - 1
    complement_graph = UGraph(
        len(selected),
        tuple(full & ~row & ~(1 << v) for v, row in enumerate(good_graph.adj)),
    )
    stable_local = turan_clique(complement_graph, needed)
    if stable_local is None:
        h_clique = turan_clique(good_graph, pattern.n)
        if h_clique is None:
            return StageFailure(
                "ramsey-dichotomy",
                f"no {needed} pairwise-bad parts and no {pattern.n} pairwise-good parts",
            )
        h_parts = [part_sets[selected[i]] for i in h_clique]
        emb = embed_via_regular_parts(host, h_parts, pattern, eta_f, big_lam)
        if emb is not None:
            return StageFailure(
                "found-h", "good clique embeds the forbidden pattern", emb
            )
        return StageFailure(
            "embedding-inconclusive",
            "good clique exists but the greedy embedding failed",
        )
    if big_lam >= Fraction(1, 2):
        return StageFailure("lambda-range", f"lambda/(4P) = {big_lam} must be below 1/2")
    stable = tuple(selected[i] for i in stable_local)

    t_hat_edges = []
    for a, b in combinations(range(len(stable)), 2):
        d = density(host, part_sets[stable[a]], part_sets[stable[b]])
        if d > 1 - big_lam:
            t_hat_edges.append((a, b))
        elif 1 - d > 1 - big_lam:
            t_hat_edges.append((b, a))
        else:
            return StageFailure(
                "derived-tournament",
                f"pair ({stable[a]},{stable[b]}) labelled bad but neither direction "
                f"exceeds 1 - {big_lam}",
            )
    t_hat = from_edges(len(stable), t_hat_edges)
    chain_local = stearns_transitive(t_hat)
    if len(chain_local) < p_target:
        return StageFailure(
            "stearns", f"chain of {len(chain_local)} parts, need {p_target}"
        )
    chain = tuple(stable[i] for i in chain_local[:p_target])

    q_sizes = {}
    f_sets = []
    for ii, wi in enumerate(chain):
        f_i = set(part_sets[wi])
        for jj, wj in enumerate(chain):
            if ii == jj:
                continue
            q = set()
            for v in part_sets[wi]:
                if ii < jj:
                    d = density(host, [v], part_sets[wj])
                else:
                    d = density(host, part_sets[wj], [v])
                if d >= 1 - 2 * p_target * big_lam:
                    q.add(v)
            q_sizes[(ii, jj)] = len(q)
            bound = Fraction(len(part_sets[wi])) * (1 - Fraction(1, 2 * p_target))
            if len(q) < bound:
                return StageFailure(
                    "q-filter",
                    f"|Q^{ii}_{jj}| = {len(q)} below |W_{ii}|(1 - 1/(2P)) = {bound}",
                )
            f_i &= q
        half = -(-len(part_sets[wi]) // 2)
        if len(f_i) < half:
            return StageFailure(
                "f-filter", f"|F_{ii}| = {len(f_i)} below half of |W_{ii}|"
            )
        f_sets.append(sorted(f_i))
    half = -(-len(part_sets[chain[0]]) // 2)
    finals = tuple(tuple(f[:half]) for f in f_sets)

    bullets = _final_bullets(host, finals, lam_f)
    if not bullets["passed"]:
        return StageFailure("final-bullets", "final sets fail a required condition", bullets)
    return PipelineReport(
        selected=tuple(selected),
        pair_labels=labels,
        stable_parts=stable,
        t_hat_edges=tuple(t_hat_edges),
        chain=chain,
        q_sizes=q_sizes,
        f_sizes=tuple(len(f) for f in f_sets),
        finals=finals,
        c=Fraction(len(finals[0]), host.n),
        turan_u=turan_u,
        bullets=bullets,
    )


def _final_bullets(host: Tournament, finals, lam: Fraction) -> dict:
    """Independent re-check of the four final-set conditions."""
    sizes_equal = len({len(f) for f in finals}) == 1
    forward_ok = True
    backward_ok = True
    for i, j in combinations(range(len(finals)), 2):
        for v in finals[i]:
            if density(host, [v], finals[j]) < 1 - lam:
                forward_ok = False
        for v in finals[j]:
            if density(host, finals[i], [v]) < 1 - lam:
                backward_ok = False
    c = Fraction(len(finals[0]), host.n) if finals else Fraction(0)
    return {
        "passed": sizes_equal and forward_ok and backward_ok and c > 0,
        "equal_sizes": sizes_equal,
        "per_vertex_forward": forward_ok,
        "per_vertex_backward": backward_ok,
        "c": c,
    }
