"""Terminal networks and the structural surgeries everything else builds on.

A terminal network is an undirected, edge-capacitated graph with a
distinguished ordered subset of terminal vertices.  Capacities are exact
rationals internally (`Fraction`); LP-facing code converts to float at the
boundary.  All types are immutable values; every operation returns a new
network.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

Edge = tuple[str, str, Fraction]


class NetworkError(ValueError):
    pass


def _as_capacity(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    return Fraction(value)


def _pair(u: str, v: str) -> tuple[str, str]:
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class TerminalNetwork:
    """Vertices, ordered terminal list, and canonical undirected edges.

    Edges are stored canonically (u < v, sorted, at most one per vertex
    pair) when built through `make`/`normalize`.  Use `make` rather than the
    raw constructor; it validates the invariants.
    """

    vertices: tuple[str, ...]
    terminals: tuple[str, ...]
    edges: tuple[Edge, ...]

    @staticmethod
    def make(vertices: Iterable[str], terminals: Iterable[str], edges: Iterable,
             *, normalize: bool = True, allow_disconnected: bool = False) -> "TerminalNetwork":
        vertices = tuple(str(v) for v in vertices)
        terminals = tuple(str(t) for t in terminals)
        vset = set(vertices)
        if len(vset) != len(vertices):
            raise NetworkError("duplicate vertex ids")
        if len(set(terminals)) != len(terminals):
            raise NetworkError("duplicate terminals")
        for t in terminals:
            if t not in vset:
                raise NetworkError(f"terminal {t!r} is not a vertex")
        norm_edges = []
        for e in edges:
            u, v, cap = str(e[0]), str(e[1]), _as_capacity(e[2])
            if u == v:
                raise NetworkError(f"self-loop at {u!r}")
            if u not in vset or v not in vset:
                raise NetworkError(f"edge endpoint missing: {u!r}-{v!r}")
            if cap < 0:
                raise NetworkError(f"negative capacity on {u!r}-{v!r}")
            a, b = _pair(u, v)
            norm_edges.append((a, b, cap))
        if normalize:
            merged: dict[tuple[str, str], Fraction] = {}
            for a, b, cap in norm_edges:
                merged[(a, b)] = merged.get((a, b), Fraction(0)) + cap
            norm_edges = [(a, b, c) for (a, b), c in sorted(merged.items()) if c > 0]
            vertices = tuple(sorted(vertices))
        net = TerminalNetwork(vertices=vertices, terminals=terminals,
                              edges=tuple(norm_edges))
        if not allow_disconnected and not net.is_connected():
            raise NetworkError("network is disconnected "
                               "(pass allow_disconnected=True to override)")
        return net

    # -- basic structure ---------------------------------------------------

    @cached_property
    def adjacency(self) -> dict[str, dict[str, Fraction]]:
        adj: dict[str, dict[str, Fraction]] = {v: {} for v in self.vertices}
        for u, v, c in self.edges:
            adj[u][v] = adj[u].get(v, Fraction(0)) + c
            adj[v][u] = adj[v].get(u, Fraction(0)) + c
        return adj

    @cached_property
    def terminal_set(self) -> frozenset[str]:
        return frozenset(self.terminals)

    @cached_property
    def cache_key(self) -> tuple:
        return (self.terminals, self.edges, tuple(sorted(self.vertices)))

    def cap(self, u: str, v: str) -> Fraction:
        return self.adjacency.get(u, {}).get(v, Fraction(0))

    def neighbors(self, v: str) -> tuple[str, ...]:
        return tuple(sorted(self.adjacency[v]))

    def terminal_pairs(self) -> list[tuple[str, str]]:
        return [_pair(s, t) for s, t in itertools.combinations(self.terminals, 2)]

    @property
    def k(self) -> int:
        return len(self.terminals)

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            u = stack.pop()
            for w in self.adjacency[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    def is_quasi_bipartite(self) -> bool:
        """Non-terminals form an independent set."""
        ts = self.terminal_set
        return all(u in ts or v in ts for u, v, _ in self.edges)

    def terminals_independent(self) -> bool:
        ts = self.terminal_set
        return not any(u in ts and v in ts for u, v, _ in self.edges)

    def fresh_vertex(self, stem: str) -> str:
        vid = stem
        existing = set(self.vertices)
        n = 1
        while vid in existing:
            vid = f"{stem}.{n}"
            n += 1
        return vid

    def float_edges(self) -> list[tuple[str, str, float]]:
        return [(u, v, float(c)) for u, v, c in self.edges]


@dataclass(frozen=True)
class DemandVector:
    """Nonnegative demand per unordered terminal pair; absent pair means 0."""

    entries: tuple[tuple[tuple[str, str], float], ...]

    @staticmethod
    def of(mapping: Mapping | Iterable) -> "DemandVector":
        items = mapping.items() if isinstance(mapping, Mapping) else mapping
        acc: dict[tuple[str, str], float] = {}
        for pair, val in items:
            s, t = pair
            if s == t:
                raise NetworkError(f"demand on identical endpoints {s!r}")
            val = float(val)
            if val < 0:
                raise NetworkError(f"negative demand on {pair}")
            key = _pair(str(s), str(t))
            acc[key] = acc.get(key, 0.0) + val
        return DemandVector(tuple(sorted((k, v) for k, v in acc.items() if v > 0)))

    def __getitem__(self, pair) -> float:
        key = _pair(str(pair[0]), str(pair[1]))
        for k, v in self.entries:
            if k == key:
                return v
        return 0.0

    def items(self):
        return list(self.entries)

    def pairs(self):
        return [k for k, _ in self.entries]

    @property
    def is_zero(self) -> bool:
        return not self.entries

    def scaled(self, alpha: float) -> "DemandVector":
        return DemandVector(tuple((k, v * alpha) for k, v in self.entries))

    def restricted_to(self, terminals: Iterable[str]) -> bool:
        ts = set(terminals)
        return all(s in ts and t in ts for (s, t), _ in self.entries)


@dataclass(frozen=True)
class VertexPartition:
    """Disjoint blocks covering all vertices; no block holds two terminals."""

    blocks: tuple[frozenset[str], ...]

    @staticmethod
    def of(blocks: Iterable[Iterable[str]]) -> "VertexPartition":
        return VertexPartition(tuple(frozenset(str(v) for v in b) for b in blocks))

    @staticmethod
    def singletons(net: TerminalNetwork) -> "VertexPartition":
        return VertexPartition(tuple(frozenset([v]) for v in net.vertices))

    def validate_for(self, net: TerminalNetwork) -> None:
        seen: set[str] = set()
        for b in self.blocks:
            if not b:
                raise NetworkError("empty partition block")
            if seen & b:
                raise NetworkError("partition blocks overlap")
            seen |= b
            terms = b & net.terminal_set
            if len(terms) > 1:
                raise NetworkError(f"block merges terminals {sorted(terms)}")
        if seen != set(net.vertices):
            raise NetworkError("partition does not cover the vertex set")


# ---------------------------------------------------------------------------
# Surgeries
# ---------------------------------------------------------------------------

def normalize(net: TerminalNetwork) -> TerminalNetwork:
    """Sum parallel edges, drop zero capacities, sort vertex/edge order."""
    return TerminalNetwork.make(net.vertices, net.terminals, net.edges,
                                allow_disconnected=True)


def subdivide_terminal_edges(net: TerminalNetwork) -> TerminalNetwork:
    """Replace each terminal-terminal edge {s,t} by s-x-t with the same capacity."""
    ts = net.terminal_set
    vertices = list(net.vertices)
    edges: list[Edge] = []
    taken = set(vertices)
    for u, v, c in net.edges:
        if u in ts and v in ts:
            x = f"{u}~{v}"
            n = 1
            while x in taken:
                x = f"{u}~{v}.{n}"
                n += 1
            taken.add(x)
            vertices.append(x)
            edges.append((u, x, c))
            edges.append((x, v, c))
        else:
            edges.append((u, v, c))
    return TerminalNetwork.make(vertices, net.terminals, edges,
                                allow_disconnected=True)


def merge_vertices(net: TerminalNetwork, partition: VertexPartition) -> TerminalNetwork:
    """Contract every block to one vertex; inter-block capacities are summed.

    A block containing terminal t is named t; other blocks take their
    smallest member id.  Merging never decreases any concurrent-flow value.
    """
    partition.validate_for(net)
    name: dict[str, str] = {}
    block_names = []
    for b in partition.blocks:
        terms = b & net.terminal_set
        bname = next(iter(terms)) if terms else min(b)
        block_names.append(bname)
        for v in b:
            name[v] = bname
    edges = []
    for u, v, c in net.edges:
        bu, bv = name[u], name[v]
        if bu != bv:
            edges.append((bu, bv, c))
    return TerminalNetwork.make(block_names, net.terminals, edges,
                                allow_disconnected=True)


def phi_merge(g1: TerminalNetwork, g2: TerminalNetwork,
              phi: Mapping[str, str]) -> TerminalNetwork:
    """Glue g2 onto g1 by identifying terminal pairs phi: T1-subset -> T2-subset.

    The identified vertex keeps the g1-side id.  The terminal set of the
    result is T1 plus the unmatched terminals of g2.  Non-terminal g2 ids
    colliding with g1 ids are renamed deterministically.
    """
    if not phi:
        raise NetworkError("phi must match at least one terminal pair")
    phi = {str(a): str(b) for a, b in phi.items()}
    if len(set(phi.values())) != len(phi):
        raise NetworkError("phi has duplicate targets")
    for a, b in phi.items():
        if a not in g1.terminal_set:
            raise NetworkError(f"{a!r} is not a terminal of the first network")
        if b not in g2.terminal_set:
            raise NetworkError(f"{b!r} is not a terminal of the second network")

    inv = {b: a for a, b in phi.items()}
    taken = set(g1.vertices)
    rename: dict[str, str] = {}
    for v in g2.vertices:
        if v in inv:
            rename[v] = inv[v]
        else:
            new = v
            n = 1
            while new in taken:
                new = f"{v}@{n}"
                n += 1
            rename[v] = new
            taken.add(new)

    vertices = list(g1.vertices) + [rename[v] for v in g2.vertices if v not in inv]
    terminals = list(g1.terminals) + [rename[t] for t in g2.terminals if t not in inv]
    edges = list(g1.edges) + [(rename[u], rename[v], c) for u, v, c in g2.edges]
    return TerminalNetwork.make(vertices, terminals, edges, allow_disconnected=True)


def components_after_terminal_removal(net: TerminalNetwork) -> list[frozenset[str]]:
    """Connected components of the induced subgraph on non-terminals."""
    ts = net.terminal_set
    rest = [v for v in net.vertices if v not in ts]
    seen: set[str] = set()
    comps = []
    for start in rest:
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        seen.add(start)
        while stack:
            u = stack.pop()
            for w in net.adjacency[u]:
                if w not in ts and w not in seen:
                    seen.add(w)
                    comp.add(w)
                    stack.append(w)
        comps.append(frozenset(comp))
    return sorted(comps, key=lambda c: min(c))


def induced_subgraph(net: TerminalNetwork, keep: Iterable[str],
                     terminals: Iterable[str]) -> TerminalNetwork:
    keep = set(keep)
    edges = [(u, v, c) for u, v, c in net.edges if u in keep and v in keep]
    return TerminalNetwork.make(sorted(keep), [t for t in terminals if t in keep],
                                edges, allow_disconnected=True)
