"""Shared fixtures-adjacent helpers: pinned inputs, generators, oracles.

The scoring oracle here is deliberately naive: adjacency rebuilt per call,
means taken with Fractions, comparison rules restated from scratch.  Solver
tests trust it, not the package internals.
"""

from __future__ import annotations

import itertools
import math
import random
import warnings
from fractions import Fraction

from corrsubopt import (
    IncidenceBoundWarning,
    SubgraphMask,
    WeightedGraph,
    forced_edges,
    parse_formula,
)

SAT3_TEXT = "3 3\n1 2 3\n1 2 3\n1 2 3\n"
UNSAT4_TEXT = "4 4\n1 2 3\n1 2 4\n1 3 4\n2 3 4\n"

P3_TEXT = "3 2\n0 0\n1 1\n2 2\n0 1\n1 2\n"
STAR_TEXT = "4 3\n0 0\n1 1\n2 1\n3 1\n0 1\n0 2\n0 3\n"
TRIANGLE_TEXT = "3 3\n0 0\n1 0\n2 10\n0 1\n0 2\n1 2\n"


def make_formula(text: str):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IncidenceBoundWarning)
        return parse_formula(text)


_WEIGHT_POOL = (-3, -1, 0, 1, 1, 2, 3, 5, 9, Fraction(1, 2), Fraction(7, 3))


def random_graph(
    rng: random.Random,
    *,
    min_vertices: int = 4,
    max_vertices: int = 8,
    max_free: int = 12,
) -> WeightedGraph:
    """Random connected weighted graph with at most ``max_free`` free edges."""
    while True:
        n = rng.randint(min_vertices, max_vertices)
        order = list(range(n))
        rng.shuffle(order)
        edges = set()
        for i in range(1, n):
            u, v = order[i], order[rng.randrange(i)]
            edges.add((min(u, v), max(u, v)))
        for _ in range(rng.randint(0, n)):
            u, v = rng.sample(range(n), 2)
            edges.add((min(u, v), max(u, v)))
        weights = [rng.choice(_WEIGHT_POOL) for _ in range(n)]
        graph = WeightedGraph.build(n, edges, weights)
        if len(edges) - len(forced_edges(graph)) <= max_free:
            return graph


def naive_score(graph: WeightedGraph, kept: list[bool], multiplier: int | None = None):
    """(is_inf, value, log_degree_sum, S) computed from first principles."""
    n = graph.vertex_count
    if multiplier is None:
        multiplier = n
    neighbours: list[list[int]] = [[] for _ in range(n)]
    for eid, (u, v) in enumerate(graph.edges):
        if kept[eid]:
            neighbours[u].append(v)
            neighbours[v].append(u)
    assert all(neighbours[v] for v in range(n)), "mask must be valid"
    total = Fraction(0)
    log_sum = 0.0
    for v in range(n):
        deg = len(neighbours[v])
        log_sum += math.log(deg)
        mean = Fraction(sum(graph.weights[u] for u in neighbours[v]), deg)
        total += deg * (graph.weights[v] - mean) ** 2
    if total == 0:
        return True, None, log_sum, total
    return False, log_sum - multiplier * math.log(float(total)), log_sum, total


def naive_compare(a, b) -> int:
    """Restates the ordering: +inf first, then log-degree sum among
    infinities; finite scores by value, with exactly equal log-degree sums
    settled by the smaller discrepancy total."""
    a_inf, a_val, a_log, a_s = a
    b_inf, b_val, b_log, b_s = b
    if a_inf or b_inf:
        if a_inf and b_inf:
            return (a_log > b_log) - (a_log < b_log)
        return 1 if a_inf else -1
    if a_log == b_log:
        return (b_s > a_s) - (b_s < a_s)
    return (a_val > b_val) - (a_val < b_val)


def enumerate_valid_bitlists(graph: WeightedGraph):
    """Every valid mask as a list[bool]; forced edges are always kept since
    dropping one isolates its leaf endpoint."""
    forced = forced_edges(graph)
    free = [eid for eid in range(graph.edge_count) if eid not in forced]
    for bits in itertools.product((True, False), repeat=len(free)):
        kept = [True] * graph.edge_count
        for eid, keep in zip(free, bits):
            kept[eid] = keep
        degs = [0] * graph.vertex_count
        for eid, (u, v) in enumerate(graph.edges):
            if kept[eid]:
                degs[u] += 1
                degs[v] += 1
        if all(d >= 1 for d in degs):
            yield kept


def brute_force_best(graph: WeightedGraph, multiplier: int | None = None):
    """(score tuple, bitstring) of the enumeration winner under the stated
    ordering, ties to the lexicographically smallest bitstring."""
    best = None
    best_bits = None
    for kept in enumerate_valid_bitlists(graph):
        cand = naive_score(graph, kept, multiplier)
        bits = "".join("1" if k else "0" for k in kept)
        if best is None:
            best, best_bits = cand, bits
            continue
        cmp = naive_compare(cand, best)
        if cmp > 0 or (cmp == 0 and bits < best_bits):
            best, best_bits = cand, bits
    assert best is not None
    return best, best_bits


ACCEPTANCE_LINES: list[str] = []
