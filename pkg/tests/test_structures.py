import itertools
import random
from fractions import Fraction

import pytest

from helpers import forward_block_host
from nebulab import core
from nebulab.core import from_backward_edges, random_tournament, transitive_tournament
from nebulab.errors import CoverageTieError, LambdaTooLargeError
from nebulab.product import small_central_star, small_left_star, small_right_star
from nebulab.structures import (
    CompletePair,
    NormalPart,
    TripleClass,
    WitnessTriple,
    classify_triple,
    extract_product,
    is_normal,
    make_triple,
    neighborhood,
    turan_clique,
    ugraph_from_edges,
    verify_structure,
    witness_central,
    witness_left,
    witness_right,
)


class TestVerifyStructure:
    def test_single_part_size_pass(self):
        host = random_tournament(10, random.Random(0))
        cert = verify_structure(host, [frozenset(range(5))], Fraction(1, 2), Fraction(1, 10))
        assert cert.passed

    def test_complete_pair_passes_any_lambda(self):
        host = forward_block_host(2, 5, seed=1)
        parts = [frozenset(range(5)), frozenset(range(5, 10))]
        cert = verify_structure(host, parts, Fraction(1, 2), Fraction(0), strong=True)
        assert cert.passed

    def test_wrong_direction_fails(self):
        host = forward_block_host(2, 5, seed=1)
        parts = [frozenset(range(5, 10)), frozenset(range(5))]  # reversed order
        cert = verify_structure(host, parts, Fraction(1, 2), Fraction(1, 2))
        assert not cert.passed
        assert any(
            v.check == "pair-density" and (v.detail["i"], v.detail["j"]) == (0, 1)
            for v in cert.violations
        )

    def test_small_part_fails_size(self):
        host = random_tournament(10, random.Random(2))
        cert = verify_structure(host, [frozenset({0})], Fraction(1, 2), Fraction(1, 10))
        assert not cert.passed
        assert cert.violations[0].check == "size"

    def test_strong_implies_plain(self):
        rng = random.Random(3)
        for _ in range(20):
            host = random_tournament(12, rng)
            parts = [frozenset(rng.sample(range(12), 3)) for _ in range(1)]
            a = set(rng.sample(range(12), 6))
            parts = [frozenset(list(a)[:3]), frozenset(list(a)[3:])]
            strong = verify_structure(host, parts, Fraction(1, 6), Fraction(1, 2), strong=True)
            plain = verify_structure(host, parts, Fraction(1, 6), Fraction(1, 2), strong=False)
            if strong.passed:
                assert plain.passed

    def test_overlap_rejected(self):
        host = random_tournament(6, random.Random(4))
        with pytest.raises(ValueError):
            verify_structure(host, [frozenset({0, 1}), frozenset({1, 2})], 0, 0)

    def test_transitive_w_entry(self):
        host = transitive_tournament(8)
        cert = verify_structure(
            host, [frozenset({0, 1, 2})], Fraction(1, 4), Fraction(1, 2), w=[1]
        )
        assert cert.passed

    def test_strong_structure_bundle(self):
        from nebulab.structures import StrongStructure

        host = forward_block_host(2, 5, seed=21)
        bundle = StrongStructure(
            host,
            (frozenset(range(5)), frozenset(range(5, 10))),
            Fraction(1, 2),
            Fraction(0),
        )
        assert bundle.verify(strong=True).passed


class TestNeighborhood:
    def test_forward_blocks_empty_in_neighbourhood(self):
        host = forward_block_host(3, 3, seed=5)
        sigma = make_triple(range(3), range(3, 6), range(6, 9))
        for v in range(3):
            assert neighborhood(host, sigma, v, 2) == frozenset()
            assert neighborhood(host, sigma, v, 3) == frozenset()

    def test_reversed_blocks_full(self):
        host = core.complement(forward_block_host(3, 3, seed=5))
        sigma = make_triple(range(3), range(3, 6), range(6, 9))
        for v in range(3):
            assert neighborhood(host, sigma, v, 2) == frozenset(range(3, 6))

    def test_edge_scan_oracle(self):
        rng = random.Random(6)
        for _ in range(40):
            host = random_tournament(9, rng)
            verts = rng.sample(range(9), 6)
            sigma = make_triple(verts[:2], verts[2:4], verts[4:6])
            for i, j in itertools.permutations((1, 2, 3), 2):
                for v in sigma.get(i):
                    got = neighborhood(host, sigma, v, j)
                    if j > i:
                        want = {w for w in sigma.get(j) if host.has_edge(w, v)}
                    else:
                        want = {w for w in sigma.get(j) if host.has_edge(v, w)}
                    assert got == frozenset(want)

    def test_vertex_outside_rejected(self):
        host = random_tournament(6, random.Random(7))
        sigma = make_triple([0], [1], [2])
        with pytest.raises(ValueError):
            neighborhood(host, sigma, 5, 1)


def adversarial_no_pattern_host():
    """Three 8-blocks forming a strict (2,1)-triple with no left-star pattern.

    S_2's bigs cover S_1's victim half at step 2; S_3's diffuse vertices cover
    half of themselves only at step 4; the S_3 -> S_1 backward targets avoid
    every vertex of S_1 beaten by S_2, so no pattern triple exists.
    """
    back = [
        # pair (S1,S2): bigs 8,9 cover victims {4,6} and {5,7}
        (8, 4), (8, 6), (9, 5), (9, 7),
        # pair (S1,S2): diffuse 10..13 target positions 0,1
        (10, 0), (11, 1), (12, 0), (13, 1),
        # pair (S2,S3): bigs 16,17 cover victims 12..15
        (16, 12), (16, 14), (17, 13), (17, 15),
        # pair (S2,S3): diffuse 18..21 target S_2 positions 0..3
        (18, 8), (19, 9), (20, 10), (21, 11),
        # pair (S1,S3): only positions 2,3 of S_1 are ever beaten by S_3
        (20, 2), (21, 3),
    ]
    return from_backward_edges(24, tuple(range(24)), back)


class TestClassifyTriple:
    def test_empty_coverage_gives_complete_pair(self):
        host = forward_block_host(3, 4, seed=8)
        sigma = make_triple(range(4), range(4, 8), range(8, 12))
        verdict = classify_triple(host, sigma, 2, 1)
        assert isinstance(verdict, CompletePair)
        assert verdict.validate(host)
        # the untouched side covers at least half of its set
        assert 2 * len(verdict.a) >= 4 or 2 * len(verdict.b) >= 4

    def test_tie_goes_to_queried_j(self):
        back = [(2, 0), (2, 1), (3, 0), (3, 1), (4, 2), (4, 3), (5, 2), (5, 3)]
        host = from_backward_edges(6, tuple(range(6)), back)
        sigma = make_triple([0, 1], [2, 3], [4, 5])
        verdict = classify_triple(host, sigma, 2, 1)
        assert isinstance(verdict, TripleClass)
        assert (verdict.i, verdict.j) == (2, 1)
        assert verdict.k_j == verdict.k_l == 1

    def test_adversarial_strict_classification(self):
        host = adversarial_no_pattern_host()
        sigma = make_triple(range(8), range(8, 16), range(16, 24))
        verdict = classify_triple(host, sigma, 2, 1)
        assert isinstance(verdict, TripleClass)
        assert (verdict.i, verdict.j) == (2, 1)
        assert verdict.k_j == 2 and verdict.k_l == 4

    def test_existential_oracle_strict_verdicts(self):
        rng = random.Random(9)

        def brute(host, sigma, i, j):
            l = 6 - i - j
            for perm in itertools.permutations(sorted(sigma.get(i))):
                uj, ul = set(), set()
                for v in perm:
                    uj |= neighborhood(host, sigma, v, j)
                    ul |= neighborhood(host, sigma, v, l)
                    if 2 * len(uj) >= len(sigma.get(j)) and 2 * len(ul) <= len(
                        sigma.get(l)
                    ):
                        return True
            return False

        checked = 0
        for _ in range(200):
            n = rng.randint(7, 11)
            host = random_tournament(n, rng)
            verts = rng.sample(range(n), 7)
            sigma = make_triple(verts[:3], verts[3:5], verts[5:7])
            i, j = rng.choice([(2, 1), (3, 1), (2, 3), (1, 3), (1, 2), (3, 2)])
            verdict = classify_triple(host, sigma, i, j)
            if isinstance(verdict, TripleClass) and verdict.k_j < verdict.k_l:
                assert brute(host, sigma, verdict.i, verdict.j)
                checked += 1
        assert checked > 30

    def test_invalid_indices(self):
        host = random_tournament(6, random.Random(10))
        sigma = make_triple([0], [1], [2])
        with pytest.raises(ValueError):
            classify_triple(host, sigma, 2, 2)

    def test_empty_set_rejected(self):
        with pytest.raises(ValueError):
            make_triple([], [1], [2])


class TestWitness:
    def test_immediate_pattern_triple(self):
        # S_2 and S_3 beat S_1 entirely; S_3 beats only the later vertex of
        # S_2, so both coverages are finite, the verdict is a strict (2,1),
        # and the left pattern (e.g. 2->0, 4->0, 2->4) is present
        back = [(2, 0), (2, 1), (3, 0), (3, 1), (4, 0), (4, 1), (5, 0), (5, 1),
                (4, 3), (5, 3)]
        host = from_backward_edges(6, tuple(range(6)), back)
        sigma = make_triple([0, 1], [2, 3], [4, 5])
        verdict = classify_triple(host, sigma, 2, 1)
        assert isinstance(verdict, TripleClass)
        assert (verdict.i, verdict.j) == (2, 1)
        result = witness_left(host, sigma, verdict)
        assert isinstance(result, WitnessTriple)
        assert result.validate(host, sigma)

    def test_adversarial_fallback_pair(self):
        host = adversarial_no_pattern_host()
        sigma = make_triple(range(8), range(8, 16), range(16, 24))
        verdict = classify_triple(host, sigma, 2, 1)
        result = witness_left(host, sigma, verdict)
        assert isinstance(result, CompletePair)
        assert result.validate(host)
        assert 2 * len(result.a) >= len(sigma.get(1))
        assert 2 * len(result.b) >= len(sigma.get(3))

    def test_tie_without_pattern_raises(self):
        back = [(2, 0), (2, 1), (3, 0), (3, 1), (4, 2), (4, 3), (5, 2), (5, 3)]
        host = from_backward_edges(6, tuple(range(6)), back)
        sigma = make_triple([0, 1], [2, 3], [4, 5])
        verdict = classify_triple(host, sigma, 2, 1)
        with pytest.raises(CoverageTieError):
            witness_left(host, sigma, verdict)

    def test_kind_mismatch_rejected(self):
        host = adversarial_no_pattern_host()
        sigma = make_triple(range(8), range(8, 16), range(16, 24))
        verdict = classify_triple(host, sigma, 2, 1)
        with pytest.raises(ValueError):
            witness_right(host, sigma, verdict)

    @pytest.mark.parametrize(
        "fn,queries",
        [
            (witness_left, [(2, 1), (3, 1)]),
            (witness_right, [(2, 3), (1, 3)]),
            (witness_central, [(1, 2), (3, 2)]),
        ],
    )
    def test_random_postconditions(self, fn, queries):
        rng = random.Random(hash(queries[0]) & 0xFFFF)
        validated = 0
        for _ in range(250):
            n = rng.randint(16, 22)
            host = random_tournament(n, rng)
            verts = rng.sample(range(n), 15)
            sigma = make_triple(verts[:5], verts[5:10], verts[10:15])
            verdict = classify_triple(host, sigma, *rng.choice(queries))
            if isinstance(verdict, CompletePair):
                assert verdict.validate(host)
                continue
            if (verdict.i, verdict.j) not in dict.fromkeys(queries):
                continue  # sibling verdict belongs to the other pattern
            result = fn(host, sigma, verdict)
            if isinstance(result, WitnessTriple):
                assert result.validate(host, sigma)
            else:
                assert result.validate(host)
            validated += 1
        assert validated > 100


class TestNormality:
    def _stacked_host(self, pattern, rows, seed):
        """Parts P_0..P_{h-1}; row r across parts induces the pattern; all
        cross-row and within-part pairs are forward by global index."""
        h = pattern.n
        n = h * rows
        adj = [0] * n

        def vid(part, row):
            return part * rows + row

        for u in range(n):
            for v in range(u + 1, n):
                pu, ru = divmod(u, rows)
                pv, rv = divmod(v, rows)
                if pu != pv and ru == rv:
                    if pattern.has_edge(pu, pv):
                        adj[u] |= 1 << v
                    else:
                        adj[v] |= 1 << u
                else:
                    adj[u] |= 1 << v
        host = core.Tournament(n, tuple(adj))
        parts = [frozenset(range(p * rows, (p + 1) * rows)) for p in range(h)]
        orderings = {p: tuple(sorted(parts[p])) for p in range(h)}
        return host, parts, orderings

    def test_single_vertex_pattern_always_normal(self):
        host = random_tournament(6, random.Random(11))
        parts = [frozenset({0, 1, 2})]
        single = core.Tournament(1, (0,))
        assert is_normal(host, parts, single, {0: 0}, {0: (0, 1, 2)})

    def test_stacked_copies_normal(self):
        pattern, _ = small_central_star()
        host, parts, orderings = self._stacked_host(pattern, rows=4, seed=0)
        phi = {v: v for v in range(3)}
        assert is_normal(host, parts, pattern, phi, orderings)

    def test_row_mutation_breaks_normality(self):
        pattern, _ = small_central_star()
        host, parts, orderings = self._stacked_host(pattern, rows=4, seed=0)
        phi = {v: v for v in range(3)}
        broken = dict(orderings)
        swapped = list(broken[1])
        swapped[0], swapped[1] = swapped[1], swapped[0]
        broken[1] = tuple(swapped)
        assert not is_normal(host, parts, pattern, phi, broken)

    def test_unequal_sizes_rejected(self):
        host = random_tournament(5, random.Random(12))
        with pytest.raises(ValueError):
            is_normal(
                host,
                [frozenset({0, 1}), frozenset({2})],
                core.Tournament(1, (0,)),
                {0: 0},
                {0: (0, 1)},
            )


class TestExtractProduct:
    def _lambda_zero_instance(self, rows, seed):
        rng = random.Random(seed)
        n = 6 * rows
        adj = [0] * n
        for u in range(n):
            for v in range(u + 1, n):
                if u // rows == v // rows:
                    if rng.random() < 0.5:
                        adj[u] |= 1 << v
                    else:
                        adj[v] |= 1 << u
                else:
                    adj[u] |= 1 << v
        host = core.Tournament(n, tuple(adj))
        parts = [frozenset(range(p * rows, (p + 1) * rows)) for p in range(6)]
        orderings = {p: tuple(sorted(parts[p])) for p in range(6)}
        left, _ = small_left_star()
        right, _ = small_right_star()
        comp1 = NormalPart(left, {1: 0, 2: 1, 0: 2}, {p: orderings[p] for p in (0, 1, 2)})
        comp2 = NormalPart(right, {2: 3, 0: 4, 1: 5}, {p: orderings[p] for p in (3, 4, 5)})
        return host, parts, [comp1, comp2]

    def test_single_part_any_row(self):
        pattern, _ = small_central_star()
        host, parts, orderings = TestNormality()._stacked_host(pattern, rows=3, seed=1)
        comp = NormalPart(pattern, {v: v for v in range(3)}, orderings)
        res = extract_product(host, parts, [comp], lam=Fraction(0))
        assert res.embedding.validate(host, res.product.tournament)

    def test_two_stars_lambda_zero(self):
        host, parts, comps = self._lambda_zero_instance(rows=4, seed=13)
        res = extract_product(host, parts, comps, lam=Fraction(0))
        assert res.product.tournament.n == 6
        assert res.embedding.validate(host, res.product.tournament)

    def test_turan_gate_holds(self):
        host, parts, comps = self._lambda_zero_instance(rows=5, seed=14)
        res = extract_product(host, parts, comps, lam=Fraction(0))
        gate = res.turan_gate
        assert gate["edges"] >= gate["bound"]
        assert gate["epsilon"] < Fraction(1, 1)  # below 1/(p-1)^2 for p=2

    def test_lambda_too_large_reported(self):
        # break cross relations so no compatible row pair exists
        host, parts, comps = self._lambda_zero_instance(rows=2, seed=15)
        adj = list(host.rows)
        # reverse one edge in every cross-row combination between parts 0 and 3
        for r1 in range(2):
            for r2 in range(2):
                u = 0 * 2 + r1
                v = 3 * 2 + r2
                adj[u] &= ~(1 << v)
                adj[v] |= 1 << u
        broken = core.Tournament(host.n, tuple(adj))
        if is_normal(broken, parts, comps[0].pattern, comps[0].phi, comps[0].orderings):
            with pytest.raises(LambdaTooLargeError):
                extract_product(broken, parts, comps, lam=Fraction(1, 2))

    def test_overlapping_phi_rejected(self):
        host, parts, comps = self._lambda_zero_instance(rows=3, seed=16)
        bad = [comps[0], NormalPart(comps[1].pattern, comps[0].phi, comps[0].orderings)]
        with pytest.raises(ValueError):
            extract_product(host, parts, bad, lam=Fraction(0))


class TestTuranClique:
    def test_complete_graph(self):
        g = ugraph_from_edges(5, itertools.combinations(range(5), 2))
        assert turan_clique(g, 5) == (0, 1, 2, 3, 4)

    def test_turan_graph_extremal(self):
        # complete 3-partite balanced graph on 9 vertices has no K_4
        classes = [range(0, 3), range(3, 6), range(6, 9)]
        edges = [
            (u, v)
            for a in range(3)
            for b in range(a + 1, 3)
            for u in classes[a]
            for v in classes[b]
        ]
        g = ugraph_from_edges(9, edges)
        assert turan_clique(g, 4) is None
        assert turan_clique(g, 3) is not None

    def test_random_against_brute_force(self):
        rng = random.Random(17)
        for _ in range(30):
            n = rng.randint(5, 9)
            edges = [
                (u, v)
                for u in range(n)
                for v in range(u + 1, n)
                if rng.random() < 0.9
            ]
            g = ugraph_from_edges(n, edges)
            p = 4
            brute = None
            for combo in itertools.combinations(range(n), p):
                if all(
                    g.adj[a] >> b & 1 for a, b in itertools.combinations(combo, 2)
                ):
                    brute = combo
                    break
            assert (turan_clique(g, p) is None) == (brute is None)
            if brute is not None:
                assert turan_clique(g, p) == brute  # both lexicographically least
