"""Weighted graphs, spanning-subgraph masks, and the instance file format.

Instance files are line oriented.  The first non-comment line holds
``<vertex_count> <edge_count>``, followed by one ``<vertex_id> <weight>``
line per vertex (weights are exact rationals, written as an integer or
``p/q``), followed by one ``<u> <v>`` line per edge.  Lines starting with
``#`` are comments.  Serialisation is canonical: vertices ascending, edges
sorted lexicographically by (smaller endpoint, larger endpoint), weights
reduced, no comments.  The position of an edge in the sorted order is its
edge id, and every mask, solver report, and CLI output uses those ids.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence


class GraphParseError(ValueError):
    """Malformed instance or mask file; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class MaskValidityError(ValueError):
    """An operation required a valid spanning subgraph (minimum degree 1)."""


@dataclass(frozen=True)
class WeightedGraph:
    """Immutable simple graph with exact rational vertex weights.

    ``edges`` must already be in canonical order; use :meth:`build` or
    :func:`load_graph` to construct one from unnormalised data.
    """

    vertex_count: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        n = self.vertex_count
        if n <= 0:
            raise ValueError("graph needs at least one vertex")
        if len(self.weights) != n:
            raise ValueError(f"expected {n} weights, got {len(self.weights)}")
        seen: set[tuple[int, int]] = set()
        prev: tuple[int, int] | None = None
        touched = bytearray(n)
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < v < n):
                raise ValueError(f"edge ({u}, {v}) out of range or not ordered")
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u}, {v})")
            if prev is not None and (u, v) < prev:
                raise ValueError("edges not in canonical order")
            seen.add((u, v))
            prev = (u, v)
            touched[u] = touched[v] = 1
        for x in range(n):
            if not touched[x]:
                raise ValueError(f"isolated vertex {x}")

    @classmethod
    def build(
        cls,
        vertex_count: int,
        edges: Iterable[tuple[int, int]],
        weights: Sequence[Fraction | int | str],
    ) -> "WeightedGraph":
        """Normalise (orient u < v, sort) and validate raw edge/weight data."""
        canon = sorted((u, v) if u < v else (v, u) for u, v in edges)
        return cls(vertex_count, tuple(canon), tuple(Fraction(w) for w in weights))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_ids(self) -> dict[tuple[int, int], int]:
        return {e: i for i, e in enumerate(self.edges)}

    def edge_id(self, u: int, v: int) -> int:
        return self.edge_ids[(u, v) if u < v else (v, u)]

    @cached_property
    def incidence(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per vertex: (neighbour, edge id) pairs, ascending by edge id."""
        inc: list[list[tuple[int, int]]] = [[] for _ in range(self.vertex_count)]
        for i, (u, v) in enumerate(self.edges):
            inc[u].append((v, i))
            inc[v].append((u, i))
        return tuple(tuple(pairs) for pairs in inc)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(pairs) for pairs in self.incidence)


class SubgraphMask:
    """Kept-edge bitset over a graph's canonical edge list, with cached degrees.

    Value type: solvers work on private copies.  The degree cache is kept in
    sync by :meth:`set_edge`; it always equals a recount from ``kept``.
    """

    __slots__ = ("graph", "kept", "degrees")

    def __init__(self, graph: WeightedGraph, kept: Iterable[bool]):
        self.graph = graph
        self.kept = list(kept)
        if len(self.kept) != graph.edge_count:
            raise ValueError(
                f"mask length {len(self.kept)} != edge count {graph.edge_count}"
            )
        degs = [0] * graph.vertex_count
        for eid, keep in enumerate(self.kept):
            if keep:
                u, v = graph.edges[eid]
                degs[u] += 1
                degs[v] += 1
        self.degrees = degs

    @classmethod
    def full(cls, graph: WeightedGraph) -> "SubgraphMask":
        return cls(graph, [True] * graph.edge_count)

    @classmethod
    def from_kept_ids(cls, graph: WeightedGraph, ids: Iterable[int]) -> "SubgraphMask":
        kept = [False] * graph.edge_count
        for eid in ids:
            if not 0 <= eid < graph.edge_count:
                raise ValueError(f"edge id {eid} out of range")
            if kept[eid]:
                raise ValueError(f"edge id {eid} listed twice")
            kept[eid] = True
        return cls(graph, kept)

    def copy(self) -> "SubgraphMask":
        clone = SubgraphMask.__new__(SubgraphMask)
        clone.graph = self.graph
        clone.kept = list(self.kept)
        clone.degrees = list(self.degrees)
        return clone

    def set_edge(self, eid: int, keep: bool) -> None:
        """Toggle one edge, updating the degree cache in place."""
        if self.kept[eid] == keep:
            return
        self.kept[eid] = keep
        u, v = self.graph.edges[eid]
        step = 1 if keep else -1
        self.degrees[u] += step
        self.degrees[v] += step

    def kept_ids(self) -> list[int]:
        return [eid for eid, keep in enumerate(self.kept) if keep]

    def bitstring(self) -> str:
        return "".join("1" if keep else "0" for keep in self.kept)

    def lex_key(self) -> bytes:
        """Bytes whose natural order is lexicographic order of the bitstring."""
        return bytes(49 if keep else 48 for keep in self.kept)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, SubgraphMask)
            and self.graph == other.graph
            and self.kept == other.kept
        )

    def __hash__(self) -> int:  # masks are mutable; hash by identity is a trap
        raise TypeError("SubgraphMask is unhashable")

    def __repr__(self) -> str:
        return f"SubgraphMask({self.bitstring()!r})"


def is_valid(graph: WeightedGraph, mask: SubgraphMask) -> bool:
    """True iff every vertex keeps at least one incident edge."""
    if mask.graph is not graph and mask.graph != graph:
        raise ValueError("mask belongs to a different graph")
    return all(d >= 1 for d in mask.degrees)


def forced_edges(graph: WeightedGraph) -> frozenset[int]:
    """Edge ids incident to a degree-1 vertex of the host graph.

    Dropping such an edge isolates its leaf endpoint, so every valid mask
    keeps all of them.
    """
    degs = graph.degrees
    return frozenset(
        eid for eid, (u, v) in enumerate(graph.edges) if degs[u] == 1 or degs[v] == 1
    )


def _content_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line and not line.startswith("#"):
            out.append((lineno, line))
    return out


def _parse_weight(token: str, lineno: int) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise GraphParseError(f"invalid rational weight {token!r}", lineno) from None


def load_graph(text: str) -> WeightedGraph:
    """Parse an instance file; diagnostics carry 1-based line numbers."""
    lines = _content_lines(text)
    if not lines:
        raise GraphParseError("empty instance file")
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 2:
        raise GraphParseError("header must be '<vertex_count> <edge_count>'", lineno)
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise GraphParseError("header counts must be integers", lineno) from None
    if n <= 0 or m < 0:
        raise GraphParseError("vertex count must be positive, edge count non-negative", lineno)
    if len(lines) != 1 + n + m:
        raise GraphParseError(
            f"expected {n} vertex lines and {m} edge lines, found {len(lines) - 1}",
            lineno,
        )

    weights: list[Fraction | None] = [None] * n
    for lineno, line in lines[1 : 1 + n]:
        parts = line.split()
        if len(parts) != 2:
            raise GraphParseError("vertex line must be '<vertex_id> <weight>'", lineno)
        try:
            vid = int(parts[0])
        except ValueError:
            raise GraphParseError(f"invalid vertex id {parts[0]!r}", lineno) from None
        if not 0 <= vid < n:
            raise GraphParseError(f"vertex id {vid} out of range 0..{n - 1}", lineno)
        if weights[vid] is not None:
            raise GraphParseError(f"duplicate vertex id {vid}", lineno)
        weights[vid] = _parse_weight(parts[1], lineno)

    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    degs = [0] * n
    for lineno, line in lines[1 + n :]:
        parts = line.split()
        if len(parts) != 2:
            raise GraphParseError("edge line must be '<u> <v>'", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError("edge endpoints must be integers", lineno) from None
        if u == v:
            raise GraphParseError(f"self-loop at vertex {u}", lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphParseError(f"edge ({u}, {v}) out of range", lineno)
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise GraphParseError(f"duplicate edge ({key[0]}, {key[1]})", lineno)
        seen.add(key)
        edges.append(key)
        degs[u] += 1
        degs[v] += 1
    for x in range(n):
        if degs[x] == 0:
            raise GraphParseError(f"isolated vertex {x}")
    return WeightedGraph.build(n, edges, weights)  # type: ignore[arg-type]


def _format_weight(w: Fraction) -> str:
    return str(w.numerator) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"


def dump_graph(graph: WeightedGraph) -> str:
    """Canonical serialisation; fixed point of load -> dump."""
    out = [f"{graph.vertex_count} {graph.edge_count}"]
    out.extend(f"{vid} {_format_weight(w)}" for vid, w in enumerate(graph.weights))
    out.extend(f"{u} {v}" for u, v in graph.edges)
    return "\n".join(out) + "\n"


def load_mask(text: str, graph: WeightedGraph) -> SubgraphMask:
    """Parse a mask file: one 0/1 line of length edge_count, or kept edge ids.

    A single token of only 0/1 characters whose length equals the edge count
    is read as a bitstring; anything else is read as a whitespace-separated
    list of kept edge ids.
    """
    tokens = []
    for lineno, line in _content_lines(text):
        tokens.extend((lineno, tok) for tok in line.split())
    if not tokens:
        raise GraphParseError("empty mask file")
    if len(tokens) == 1:
        lineno, tok = tokens[0]
        if set(tok) <= {"0", "1"} and len(tok) == graph.edge_count:
            return SubgraphMask(graph, [c == "1" for c in tok])
    ids = []
    for lineno, tok in tokens:
        if len(tok) > 1 and tok[0] == "0":
            # A leading zero is a truncated bitstring, not an edge id.
            raise GraphParseError(
                f"ambiguous token {tok!r}: not a length-{graph.edge_count} "
                "bitstring and not a canonical edge id",
                lineno,
            )
        try:
            ids.append(int(tok))
        except ValueError:
            raise GraphParseError(f"invalid edge id {tok!r}", lineno) from None
    try:
        return SubgraphMask.from_kept_ids(graph, ids)
    except ValueError as exc:
        raise GraphParseError(str(exc)) from None


def dump_mask(mask: SubgraphMask) -> str:
    return mask.bitstring() + "\n"
