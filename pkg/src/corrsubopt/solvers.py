"""Solvers for the subgraph score: exact branch and bound, and local search.

Both return a :class:`SolveReport` and are deterministic for fixed inputs
(and seed); ``wall_time`` is the only field allowed to vary between runs.
Ties on score always break toward the lexicographically smallest kept-edge
bitstring.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction

from .graph import SubgraphMask, WeightedGraph, forced_edges
from .scoring import ScoreState, ScoreValue, compare_scores, score


class SearchSpaceError(RuntimeError):
    """Exact search refused: too many free edges and no node budget given."""


@dataclass(frozen=True)
class SolveReport:
    best_mask: SubgraphMask
    best_score: ScoreValue
    nodes_explored: int
    restarts_used: int
    wall_time: float
    optimality: str  # "proven" | "heuristic"


def _beats(cand: ScoreValue, cand_key: bytes, inc: ScoreValue, inc_key: bytes) -> bool:
    cmp = compare_scores(cand, inc)
    return cmp > 0 or (cmp == 0 and cand_key < inc_key)


class _Abort(Exception):
    pass


# Safety margin on the prune test: the bound and the incumbent value are
# floats accumulated in different orders, so an exact >= comparison could
# cut a branch holding an equal-or-better mask.  Real score gaps in play
# are far larger than this.
_PRUNE_EPS = 1e-6

DEFAULT_FREE_EDGE_CAP = 40


def solve_exact(
    graph: WeightedGraph,
    *,
    node_limit: int | None = None,
    free_edge_cap: int = DEFAULT_FREE_EDGE_CAP,
    initial_mask: SubgraphMask | None = None,
    multiplier: int | None = None,
) -> SolveReport:
    """Branch and bound over the non-forced edges.

    Edges incident to degree-1 vertices are pre-kept (every valid mask keeps
    them).  Branching follows free edges by descending weight gap
    |f(u) - f(v)|, trying "keep" before "drop".  A branch is cut when even
    its most optimistic completion cannot beat the incumbent: the bound adds
    every undecided edge to the degree term and counts only vertices whose
    incident edges are all decided in the discrepancy term, both of which
    only overstate the true score.

    Without ``node_limit`` the search refuses graphs with more than
    ``free_edge_cap`` free edges; with one it runs best effort and reports
    ``optimality="heuristic"`` if the budget runs out.
    """
    t0 = time.perf_counter()
    mult = graph.vertex_count if multiplier is None else multiplier
    forced = forced_edges(graph)
    free = [eid for eid in range(graph.edge_count) if eid not in forced]
    if node_limit is None and len(free) > free_edge_cap:
        raise SearchSpaceError(
            f"{len(free)} free edges exceed the exact-search cap of {free_edge_cap}; "
            "pass a node limit to search best-effort"
        )
    weights = graph.weights
    order = sorted(
        free,
        key=lambda eid: (
            -abs(weights[graph.edges[eid][0]] - weights[graph.edges[eid][1]]),
            eid,
        ),
    )

    n = graph.vertex_count
    kept_deg = [0] * n
    und_deg = [0] * n
    nbr_sum = [Fraction(0)] * n
    decided = [None] * graph.edge_count  # None = undecided free edge
    for eid in forced:
        u, v = graph.edges[eid]
        kept_deg[u] += 1
        kept_deg[v] += 1
        nbr_sum[u] += weights[v]
        nbr_sum[v] += weights[u]
        decided[eid] = True
    for eid in free:
        u, v = graph.edges[eid]
        und_deg[u] += 1
        und_deg[v] += 1

    log_cache: dict[int, float] = {0: 0.0}

    def log_of(d: int) -> float:
        got = log_cache.get(d)
        if got is None:
            got = log_cache[d] = math.log(d)
        return got

    def contribution(vtx: int) -> Fraction:
        d = kept_deg[vtx]
        diff = weights[vtx] * d - nbr_sum[vtx]
        return diff * diff / d

    # Vertices with no free edges are finalised from the start.
    base_total = Fraction(0)
    infeasible_root = False
    for vtx in range(n):
        if und_deg[vtx] == 0:
            if kept_deg[vtx] == 0:
                infeasible_root = True
                break
            base_total += contribution(vtx)

    max_log_sum = 0.0
    for vtx in range(n):
        max_log_sum += log_of(kept_deg[vtx] + und_deg[vtx])

    # Incumbent: the full mask is always valid; an initial mask can only help.
    inc_mask = SubgraphMask.full(graph)
    inc_score = score(graph, inc_mask, multiplier=mult)
    inc_key = inc_mask.lex_key()
    if initial_mask is not None:
        cand_score = score(graph, initial_mask, multiplier=mult)
        cand_key = initial_mask.lex_key()
        if _beats(cand_score, cand_key, inc_score, inc_key):
            inc_mask, inc_score, inc_key = initial_mask.copy(), cand_score, cand_key

    nodes = 0
    depth = len(order)

    def leaf_score(total: Fraction) -> ScoreValue:
        log_sum = 0.0
        for d in kept_deg:
            log_sum += log_of(d)
        if total == 0:
            return ScoreValue(None, log_sum, total)
        return ScoreValue(log_sum - mult * math.log(float(total)), log_sum, total)

    def prunable(total: Fraction) -> bool:
        if total > 0:
            if inc_score.value is None:
                return True  # this branch can only reach finite scores
            bound = max_log_sum - mult * math.log(float(total))
            return bound < inc_score.value - _PRUNE_EPS
        if inc_score.value is None:
            return max_log_sum < inc_score.log_degree_sum - _PRUNE_EPS
        return False

    def search(pos: int, total: Fraction) -> None:
        nonlocal nodes, inc_mask, inc_score, inc_key, max_log_sum
        if pos == depth:
            cand = leaf_score(total)
            cmp = compare_scores(cand, inc_score)
            if cmp < 0:
                return
            kept = [decided[eid] is True for eid in range(graph.edge_count)]
            mask = SubgraphMask(graph, kept)
            key = mask.lex_key()
            if cmp > 0 or key < inc_key:
                inc_mask, inc_score, inc_key = mask, cand, key
            return
        eid = order[pos]
        u, v = graph.edges[eid]
        for keep in (True, False):
            nodes += 1
            if node_limit is not None and nodes > node_limit:
                raise _Abort
            saved_log_sum = max_log_sum
            new_total = total
            feasible = True
            decided[eid] = keep
            if keep:
                kept_deg[u] += 1
                kept_deg[v] += 1
                nbr_sum[u] += weights[v]
                nbr_sum[v] += weights[u]
            else:
                max_log_sum += (
                    log_of(kept_deg[u] + und_deg[u] - 1)
                    - log_of(kept_deg[u] + und_deg[u])
                    + log_of(kept_deg[v] + und_deg[v] - 1)
                    - log_of(kept_deg[v] + und_deg[v])
                )
            und_deg[u] -= 1
            und_deg[v] -= 1
            for vtx in (u, v):
                if und_deg[vtx] == 0:
                    if kept_deg[vtx] == 0:
                        feasible = False
                        break
                    new_total += contribution(vtx)
            if feasible and not prunable(new_total):
                search(pos + 1, new_total)
            und_deg[u] += 1
            und_deg[v] += 1
            if keep:
                kept_deg[u] -= 1
                kept_deg[v] -= 1
                nbr_sum[u] -= weights[v]
                nbr_sum[v] -= weights[u]
            decided[eid] = None
            max_log_sum = saved_log_sum

    optimality = "proven"
    if not infeasible_root:
        try:
            search(0, base_total)
        except _Abort:
            optimality = "heuristic"
    # Rescore through the public path so the report is bit-identical to
    # score(graph, best_mask).
    final_score = score(graph, inc_mask, multiplier=mult)
    return SolveReport(
        best_mask=inc_mask,
        best_score=final_score,
        nodes_explored=nodes,
        restarts_used=0,
        wall_time=time.perf_counter() - t0,
        optimality=optimality,
    )


def random_valid_mask(graph: WeightedGraph, rng: random.Random) -> SubgraphMask:
    """Forced edges kept, each free edge kept with probability 1/2, then any
    isolated vertex repaired by re-adding a random incident edge."""
    forced = forced_edges(graph)
    kept = [eid in forced or rng.random() < 0.5 for eid in range(graph.edge_count)]
    mask = SubgraphMask(graph, kept)
    for vtx in range(graph.vertex_count):
        if mask.degrees[vtx] == 0:
            _, eid = rng.choice(graph.incidence[vtx])
            mask.set_edge(eid, True)
    return mask


def solve_local(
    graph: WeightedGraph,
    *,
    restarts: int = 16,
    seed: int = 0,
    max_passes: int = 10_000,
    multiplier: int | None = None,
) -> SolveReport:
    """Steepest-ascent hill climbing over validity-preserving edge toggles.

    The first start is the full mask (so the result never scores below the
    host graph itself); ``restarts`` further starts are random valid masks
    drawn from ``seed``.  Each step applies the best strictly-improving
    toggle, ties broken toward the smallest edge id, and stops when no
    toggle improves or after ``max_passes`` steps.
    """
    t0 = time.perf_counter()
    rng = random.Random(seed)
    forced = forced_edges(graph)
    starts = [SubgraphMask.full(graph)]
    starts.extend(random_valid_mask(graph, rng) for _ in range(restarts))

    best_mask: SubgraphMask | None = None
    best_score: ScoreValue | None = None
    best_key = b""
    evaluations = 0
    for start in starts:
        state = ScoreState(graph, start, multiplier=multiplier)
        current = state.score()
        for _ in range(max_passes):
            best_eid = -1
            best_keep = False
            best_cand: ScoreValue | None = None
            for eid in range(graph.edge_count):
                if state.mask.kept[eid]:
                    if eid in forced or not state.can_remove(eid):
                        continue
                    cand = state.peek(eid, False)
                    keep = False
                else:
                    cand = state.peek(eid, True)
                    keep = True
                evaluations += 1
                if best_cand is None or compare_scores(cand, best_cand) > 0:
                    best_eid, best_keep, best_cand = eid, keep, cand
            if best_cand is None or compare_scores(best_cand, current) <= 0:
                break
            current = state.toggle(best_eid, best_keep)
        key = state.mask.lex_key()
        if best_score is None or _beats(current, key, best_score, best_key):
            best_mask, best_score, best_key = state.mask.copy(), current, key

    assert best_mask is not None and best_score is not None
    return SolveReport(
        best_mask=best_mask,
        best_score=best_score,
        nodes_explored=evaluations,
        restarts_used=len(starts) - 1,
        wall_time=time.perf_counter() - t0,
        optimality="heuristic",
    )
