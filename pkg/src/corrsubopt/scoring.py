"""Neighbourhood-discrepancy scoring.

For a valid spanning subgraph H of a weighted graph, each vertex v gets the
discrepancy ND(v) = (f(v) - mean of f over its kept neighbours)^2, and the
objective is

    score(H) = sum_v ln d_H(v) - C * ln( sum_v d_H(v) * ND(v) )

with C defaulting to the number of vertices.  Discrepancies and their
weighted total S are exact rationals; only the two logarithms use 64-bit
floats.  S = 0 means every vertex agrees exactly with its neighbourhood
mean, and the score is treated as positive infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .graph import MaskValidityError, SubgraphMask, WeightedGraph


class DegenerateVertexError(ValueError):
    """Discrepancy is undefined for a vertex with no kept incident edge."""


@dataclass(frozen=True)
class ScoreValue:
    """Extended-real objective value.

    ``value`` is None exactly when ``discrepancy_total`` is zero; such scores
    are positive infinity and rank above every finite score, with larger
    ``log_degree_sum`` winning between two infinities.
    """

    value: float | None
    log_degree_sum: float
    discrepancy_total: Fraction

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    @property
    def kind(self) -> str:
        return "positive-infinity" if self.value is None else "finite"


def format_score(score: ScoreValue) -> str:
    return "+inf" if score.value is None else f"{score.value:.12f}"


def format_fraction(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def compare_scores(a: ScoreValue, b: ScoreValue) -> int:
    """Three-way comparison: positive when a ranks above b.

    Finite scores with equal log-degree terms are compared through the exact
    discrepancy totals (smaller S is better); otherwise the float values
    decide.  Ties return 0 and are broken elsewhere, by mask.
    """
    if a.value is None or b.value is None:
        if a.value is None and b.value is None:
            return (a.log_degree_sum > b.log_degree_sum) - (
                a.log_degree_sum < b.log_degree_sum
            )
        return 1 if a.value is None else -1
    if a.log_degree_sum == b.log_degree_sum:
        return (b.discrepancy_total > a.discrepancy_total) - (
            b.discrepancy_total < a.discrepancy_total
        )
    return (a.value > b.value) - (a.value < b.value)


def neighbourhood_discrepancy(
    graph: WeightedGraph, mask: SubgraphMask, vertex: int
) -> Fraction:
    """Exact squared gap between f(vertex) and its kept-neighbourhood mean."""
    d = mask.degrees[vertex]
    if d == 0:
        raise DegenerateVertexError(f"vertex {vertex} has no kept incident edge")
    total = Fraction(0)
    kept = mask.kept
    for nbr, eid in graph.incidence[vertex]:
        if kept[eid]:
            total += graph.weights[nbr]
    diff = graph.weights[vertex] - total / d
    return diff * diff


def _require_valid(mask: SubgraphMask) -> None:
    for vtx, d in enumerate(mask.degrees):
        if d == 0:
            raise MaskValidityError(f"vertex {vtx} is isolated in the subgraph")


def score(
    graph: WeightedGraph, mask: SubgraphMask, *, multiplier: int | None = None
) -> ScoreValue:
    """Score a valid mask from scratch.

    ``multiplier`` is the count C scaling the log-discrepancy term; it
    defaults to the graph's vertex count.
    """
    _require_valid(mask)
    return ScoreState(graph, mask, multiplier=multiplier).score()


class ScoreState:
    """Caches for rescoring a mask under single-edge toggles.

    Keeps, per vertex: kept degree, sum of neighbour weights, and the exact
    contribution d * ND to the discrepancy total.  A toggle touches only the
    two endpoints, so updating is O(1) rational work; the float log-degree
    sum is re-added in vertex order so results are bit-identical to a
    from-scratch score of the same mask.
    """

    __slots__ = ("graph", "mask", "multiplier", "nbr_sums", "contribs", "total", "_logs")

    def __init__(
        self,
        graph: WeightedGraph,
        mask: SubgraphMask,
        *,
        multiplier: int | None = None,
    ):
        _require_valid(mask)
        self.graph = graph
        self.mask = mask.copy()
        self.multiplier = graph.vertex_count if multiplier is None else multiplier
        kept = self.mask.kept
        self.nbr_sums: list[Fraction] = []
        for vtx in range(graph.vertex_count):
            total = Fraction(0)
            for nbr, eid in graph.incidence[vtx]:
                if kept[eid]:
                    total += graph.weights[nbr]
            self.nbr_sums.append(total)
        self.contribs = [
            self._contribution(vtx) for vtx in range(graph.vertex_count)
        ]
        self.total = Fraction(0)
        for c in self.contribs:
            self.total += c
        self._logs: dict[int, float] = {}

    def _contribution(self, vertex: int) -> Fraction:
        # d * ND(v) = (f(v) * d - sum of neighbour weights)^2 / d
        d = self.mask.degrees[vertex]
        diff = self.graph.weights[vertex] * d - self.nbr_sums[vertex]
        return diff * diff / d

    def _log(self, d: int) -> float:
        cached = self._logs.get(d)
        if cached is None:
            cached = self._logs[d] = math.log(d)
        return cached

    def score(self) -> ScoreValue:
        log_sum = 0.0
        for d in self.mask.degrees:
            log_sum += self._log(d)
        if self.total == 0:
            return ScoreValue(None, log_sum, self.total)
        value = log_sum - self.multiplier * math.log(float(self.total))
        return ScoreValue(value, log_sum, self.total)

    def can_remove(self, eid: int) -> bool:
        """True when dropping the edge keeps both endpoints non-isolated."""
        u, v = self.graph.edges[eid]
        return self.mask.degrees[u] > 1 and self.mask.degrees[v] > 1

    def toggle(self, eid: int, keep: bool) -> ScoreValue:
        """Apply one edge toggle and return the new score."""
        if self.mask.kept[eid] == keep:
            raise ValueError(f"edge {eid} is already {'kept' if keep else 'dropped'}")
        if not keep and not self.can_remove(eid):
            raise MaskValidityError(f"removing edge {eid} would isolate a vertex")
        u, v = self.graph.edges[eid]
        weights = self.graph.weights
        self.mask.set_edge(eid, keep)
        if keep:
            self.nbr_sums[u] += weights[v]
            self.nbr_sums[v] += weights[u]
        else:
            self.nbr_sums[u] -= weights[v]
            self.nbr_sums[v] -= weights[u]
        for vtx in (u, v):
            new = self._contribution(vtx)
            self.total += new - self.contribs[vtx]
            self.contribs[vtx] = new
        return self.score()

    def peek(self, eid: int, keep: bool) -> ScoreValue:
        """Score the toggled mask without committing to it."""
        result = self.toggle(eid, keep)
        self.toggle(eid, not keep)
        return result


def score_delta(
    graph: WeightedGraph, mask: SubgraphMask, eid: int, direction: str
) -> tuple[ScoreValue, ScoreState]:
    """Score the mask with one edge added or removed.

    ``direction`` is ``"add"`` or ``"remove"`` and must match the edge's
    current state.  Returns the new score plus a :class:`ScoreState` holding
    the toggled mask and its caches, ready for further toggles.
    """
    if direction not in ("add", "remove"):
        raise ValueError(f"direction must be 'add' or 'remove', got {direction!r}")
    keep = direction == "add"
    if mask.kept[eid] == keep:
        state_word = "kept" if mask.kept[eid] else "dropped"
        raise ValueError(f"cannot {direction} edge {eid}: it is already {state_word}")
    state = ScoreState(graph, mask)
    return state.toggle(eid, keep), state
