"""Shared instance builders for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

from nebulab import core
from nebulab.algorithm import CASES, AlgorithmConfig
from nebulab.product import PlacementNebula


def all_labeled_tournaments(n: int):
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    for bits in range(1 << len(pairs)):
        rows = [0] * n
        for idx, (u, v) in enumerate(pairs):
            if bits >> idx & 1:
                rows[u] |= 1 << v
            else:
                rows[v] |= 1 << u
        yield core.Tournament(n, tuple(rows))


def relabel(t: core.Tournament, perm: list[int]) -> core.Tournament:
    rows = [0] * t.n
    for u, v in t.edges():
        rows[perm[u]] |= 1 << perm[v]
    return core.Tournament(t.n, tuple(rows))


def tr_sweep(t: core.Tournament) -> int:
    """Definition-level oracle: largest subset passing is_transitive."""
    for r in range(t.n, 0, -1):
        for c in combinations(range(t.n), r):
            if core.is_transitive(core.induced(t, c)):
                return r
    return 0


def blocks(t_parts: int, w: int) -> list[frozenset[int]]:
    return [frozenset(range(p * w, (p + 1) * w)) for p in range(t_parts)]


def victim_host(
    t_parts: int, w: int, b_table: dict, d_table: dict, seed: int
) -> core.Tournament:
    """Blocks of size w with tunable coverage speeds per ordered block pair.

    For a < b: the first B(a,b) vertices of block b ("bigs") partition the
    victim half (last w/2 positions) of block a, so the out-coverage of block
    b over block a reaches half exactly at step B.  The w/2 "diffuse" vertices
    at positions 4.. of block b each beat one early position of block a,
    spread over positions 0..D(a,b)-1, so the in-coverage reaches half exactly
    at step D.  Everything else is forward; within-block edges are random.
    """
    assert w % 2 == 0 and w >= 12
    half = w // 2
    rng = random.Random(seed)
    n = t_parts * w
    rows = [0] * n

    def vid(part, pos):
        return part * w + pos

    for p in range(t_parts):
        for i in range(w):
            for j in range(i + 1, w):
                if rng.random() < 0.5:
                    rows[vid(p, i)] |= 1 << vid(p, j)
                else:
                    rows[vid(p, j)] |= 1 << vid(p, i)
    for a in range(t_parts):
        for b in range(a + 1, t_parts):
            bb = b_table[(a, b)]
            dd = d_table[(a, b)]
            back = set()
            for i in range(bb):
                for vpos in range(half + i, w, bb):
                    back.add((i, vpos))
            for s in range(half):
                back.add((4 + s, s % dd))
            for i in range(w):
                for j in range(w):
                    u, v = vid(a, i), vid(b, j)
                    if (j, i) in back:
                        rows[v] |= 1 << u
                    else:
                        rows[u] |= 1 << v
    return core.Tournament(n, tuple(rows))


def random_speed_tables(t_parts: int, rng: random.Random):
    """Mixed white/black tables keeping every per-vertex backward load small."""
    picks = [(2, 5), (2, 15), (3, 5), (3, 15), (3, 2)]
    b_table, d_table = {}, {}
    for a in range(t_parts):
        for b in range(a + 1, t_parts):
            b_table[(a, b)], d_table[(a, b)] = rng.choice(picks)
    return b_table, d_table


def noise_host(t_parts: int, w: int, span: int, seed: int) -> core.Tournament:
    """Mostly-forward blocks; each later-block vertex beats one early vertex
    of every earlier block, targets confined to the first ``span`` positions
    so total coverage stays below half and the trichotomy finds a pair."""
    rng = random.Random(seed)
    n = t_parts * w
    rows = [0] * n

    def vid(part, pos):
        return part * w + pos

    for p in range(t_parts):
        for i in range(w):
            for j in range(i + 1, w):
                if rng.random() < 0.5:
                    rows[vid(p, i)] |= 1 << vid(p, j)
                else:
                    rows[vid(p, j)] |= 1 << vid(p, i)
    for a in range(t_parts):
        for b in range(a + 1, t_parts):
            perm = list(range(w))
            rng.shuffle(perm)
            back = {(j, perm[j] % span) for j in range(w)}
            for i in range(w):
                for j in range(w):
                    u, v = vid(a, i), vid(b, j)
                    if (j, i) in back:
                        rows[v] |= 1 << u
                    else:
                        rows[u] |= 1 << v
    return core.Tournament(n, tuple(rows))


def single_star_config(case: str, t: int, w: int, lam, c=None) -> AlgorithmConfig:
    spec = CASES[case]
    nebulae = {
        spec.white: PlacementNebula(spec.white, ((1, 2, 3),), 3),
        spec.black: PlacementNebula(spec.black, ((1, 2, 3),), 3),
    }
    if c is None:
        c = Fraction(1, t)
    return AlgorithmConfig(case, nebulae, 3, t, w, Fraction(c), Fraction(lam))


def forward_block_host(part_count: int, part_size: int, seed: int) -> core.Tournament:
    """All cross-block edges forward, within-block edges random."""
    rng = random.Random(seed)
    n = part_count * part_size
    rows = [0] * n
    for u in range(n):
        for v in range(u + 1, n):
            if u // part_size == v // part_size:
                if rng.random() < 0.5:
                    rows[u] |= 1 << v
                else:
                    rows[v] |= 1 << u
            else:
                rows[u] |= 1 << v
    return core.Tournament(n, tuple(rows))
