"""Exact subtournament containment, freeness, and the experiment harness."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterable, Optional, Sequence

from .core import TR_BUDGET, Tournament, largest_transitive, random_tournament
from .errors import BudgetError

BRUTE_FORCE_BUDGET = 5_000_000


@dataclass(frozen=True)
class Embedding:
    """Injective orientation-preserving map; mapping[h] is the host vertex."""

    mapping: tuple[int, ...]

    def validate(self, host: Tournament, pattern: Tournament) -> bool:
        m = self.mapping
        if len(m) != pattern.n or len(set(m)) != pattern.n:
            return False
        if any(not 0 <= v < host.n for v in m):
            return False
        return all(
            host.has_edge(m[a], m[b]) == pattern.has_edge(a, b)
            for a in range(pattern.n)
            for b in range(pattern.n)
            if a != b
        )


def contains(host: Tournament, pattern: Tournament) -> Optional[Embedding]:
    """Search for an induced copy of ``pattern`` in ``host`` (exact).

    Backtracking over a static pattern-vertex order, most unbalanced degrees
    first, with bitset candidate filtering; every pattern pair constrains the
    candidates because tournaments are complete.
    """
    h, n = pattern.n, host.n
    if h > n:
        return None
    host_out = [host.out_degree(v) for v in range(n)]
    pat_out = [pattern.out_degree(v) for v in range(h)]
    order = sorted(range(h), key=lambda v: (-abs(2 * pat_out[v] - (h - 1)), v))
    base = []
    for hv in order:
        need_out, need_in = pat_out[hv], h - 1 - pat_out[hv]
        mask = 0
        for tv in range(n):
            if host_out[tv] >= need_out and n - 1 - host_out[tv] >= need_in:
                mask |= 1 << tv
        base.append(mask)

    assignment = [0] * h

    def descend(level: int, cands: list[int], used: int) -> bool:
        if level == h:
            return True
        bits = cands[level] & ~used
        while bits:
            tv = (bits & -bits).bit_length() - 1
            bits &= bits - 1
            hv = order[level]
            next_cands = list(cands)
            ok = True
            for later in range(level + 1, h):
                hu = order[later]
                allowed = host.rows[tv] if pattern.has_edge(hv, hu) else host.in_mask(tv)
                next_cands[later] &= allowed
                if not next_cands[later] & ~(used | 1 << tv):
                    ok = False
                    break
            if ok:
                assignment[hv] = tv
                if descend(level + 1, next_cands, used | 1 << tv):
                    return True
        return False

    if descend(0, base, 0):
        return Embedding(tuple(assignment))
    return None


def brute_force_contains(
    host: Tournament, pattern: Tournament, budget: int = BRUTE_FORCE_BUDGET
) -> Optional[Embedding]:
    """Oracle for ``contains``: scan every vertex subset and every bijection."""
    h, n = pattern.n, host.n
    if h > n:
        return None
    work = math.comb(n, h) * math.factorial(h)
    if work > budget:
        raise BudgetError(f"brute force needs {work} checks, budget is {budget}")
    for subset in combinations(range(n), h):
        for image in permutations(subset):
            emb = Embedding(image)
            if emb.validate(host, pattern):
                return emb
    return None


def is_free(host: Tournament, family: Iterable[Tournament]) -> bool:
    return all(contains(host, member) is None for member in family)


def random_free_tournament(
    n: int,
    family: Sequence[Tournament],
    seed: int,
    max_tries: int = 500,
) -> Optional[Tournament]:
    """Rejection sampling with a local repair step.

    When a forbidden copy is found, the edges among its image are
    re-randomized and the tournament is retried; None after max_tries.
    """
    rng = random.Random(seed)
    t = random_tournament(n, rng)
    for _ in range(max_tries):
        found = None
        for member in family:
            emb = contains(t, member)
            if emb is not None:
                found = emb
                break
        if found is None:
            return t
        rows = list(t.rows)
        image = sorted(found.mapping)
        for i, u in enumerate(image):
            for v in image[i + 1 :]:
                rows[u] &= ~(1 << v)
                rows[v] &= ~(1 << u)
                if rng.random() < 0.5:
                    rows[u] |= 1 << v
                else:
                    rows[v] |= 1 << u
        t = Tournament(n, tuple(rows))
    return None


@dataclass(frozen=True)
class ExponentReport:
    """Log-log fit of exact transitive sizes against host sizes."""

    samples: tuple[tuple[int, int], ...]  # (n, tr)
    slope: float
    intercept: float
    band: tuple[float, float]  # slope +- 2 standard errors
    failure_rates: tuple[tuple[int, float], ...]
    flagged_sizes: tuple[int, ...]  # generation failure rate above one half


def empirical_eh_exponent(
    family: Sequence[Tournament],
    sizes: Sequence[int],
    samples_per_size: int,
    seed: int,
    tr_budget: int = TR_BUDGET,
    max_tries: int = 200,
) -> ExponentReport:
    if any(n > tr_budget for n in sizes):
        raise BudgetError(f"sizes exceed the exact transitive budget {tr_budget}")
    samples: list[tuple[int, int]] = []
    failure_rates: list[tuple[int, float]] = []
    flagged: list[int] = []
    for n in sizes:
        failures = 0
        for index in range(samples_per_size):
            t = random_free_tournament(
                n, family, seed=hash((seed, n, index)) & 0x7FFFFFFF, max_tries=max_tries
            )
            if t is None:
                failures += 1
                continue
            samples.append((n, len(largest_transitive(t, budget=tr_budget))))
        rate = failures / samples_per_size
        failure_rates.append((n, rate))
        if rate > 0.5:
            flagged.append(n)
    if len(samples) < 2:
        raise ValueError("not enough samples to fit a slope")
    xs = [math.log(n) for n, _ in samples]
    ys = [math.log(tr) for _, tr in samples]
    mean_x = sum(xs) / len(xs)
    mean_y = sum(ys) / len(ys)
    sxx = sum((x - mean_x) ** 2 for x in xs)
    if sxx == 0:
        raise ValueError("need at least two distinct sizes")
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = mean_y - slope * mean_x
    residuals = [y - (intercept + slope * x) for x, y in zip(xs, ys)]
    dof = max(len(samples) - 2, 1)
    se = math.sqrt(sum(r * r for r in residuals) / dof / sxx)
    return ExponentReport(
        samples=tuple(samples),
        slope=slope,
        intercept=intercept,
        band=(slope - 2 * se, slope + 2 * se),
        failure_rates=tuple(failure_rates),
        flagged_sizes=tuple(flagged),
    )
