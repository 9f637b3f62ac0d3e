"""The flow oracle: concurrent flow, its dual, restricted variants, cuts.

`concurrent_flow` computes the concurrent multicommodity-flow value of a
demand vector (the largest multiple of the demand that routes within the
capacities) by solving the edge-length dual with delayed constraint
generation: path constraints are priced by Dijkstra and added only when
violated.  The primal flow is recovered from the multipliers of the
generated path rows.

Also here: exact single-commodity max flow (augmenting paths on rationals),
the 2-hop restricted flow and its explicit dual, terminal-free concurrent
flow, exact brute-force sparsest cut, and terminal-bipartition min cuts.
"""

from __future__ import annotations

import heapq
import itertools
import threading
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .lp import EQ, GE, LE, solve_lp
from .network import DemandVector, TerminalNetwork, _pair

FEAS_TOL = 1e-9       # absolute feasibility / separation tolerance
OPT_TOL = 1e-6        # relative optimality tolerance
_MAX_SEPARATION_ROUNDS = 500


class FlowError(ValueError):
    pass


@dataclass(frozen=True)
class FlowSolution:
    """Per-commodity directed arc flows achieving concurrent value `lam`."""

    lam: float
    arc_flows: tuple[tuple[tuple[str, str], tuple[tuple[tuple[str, str], float], ...]], ...]

    def commodity_flows(self) -> dict:
        return {pair: dict(arcs) for pair, arcs in self.arc_flows}

    def edge_loads(self) -> dict[tuple[str, str], float]:
        loads: dict[tuple[str, str], float] = {}
        for _, arcs in self.arc_flows:
            for (u, v), f in arcs:
                e = _pair(u, v)
                loads[e] = loads.get(e, 0.0) + f
        return loads

    def to_json_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "commodities": [
                {"s": p[0], "t": p[1],
                 "arcs": [{"from": u, "to": v, "flow": f}
                          for (u, v), f in arcs]}
                for p, arcs in self.arc_flows],
        }

    def check(self, net: TerminalNetwork, demand: DemandVector,
              tol: float = 1e-6) -> None:
        caps = {_pair(u, v): float(c) for u, v, c in net.edges}
        for e, load in self.edge_loads().items():
            if load > caps.get(e, 0.0) + tol * max(1.0, caps.get(e, 0.0)):
                raise FlowError(f"capacity violated on {e}")
        for pair, arcs in self.arc_flows:
            s, t = pair
            balance: dict[str, float] = {}
            for (u, v), f in arcs:
                balance[u] = balance.get(u, 0.0) + f
                balance[v] = balance.get(v, 0.0) - f
            for v, bal in balance.items():
                if v == s or v == t:
                    continue
                if abs(bal) > tol * max(1.0, self.lam):
                    raise FlowError(f"conservation violated at {v} for {pair}")
            want = self.lam * demand[pair]
            if abs(balance.get(s, 0.0) - want) > tol * max(1.0, want):
                raise FlowError(f"routed amount mismatch for {pair}")


@dataclass(frozen=True)
class DualSolution:
    """Edge lengths and induced terminal distances; value = sum(c_e * l_e).

    Distances are canonicalised to shortest-path distances under the
    lengths, which is itself an optimal choice.
    """

    lengths: tuple[tuple[tuple[str, str], float], ...]
    dists: tuple[tuple[tuple[str, str], float], ...]
    value: float

    def length_map(self) -> dict[tuple[str, str], float]:
        return dict(self.lengths)

    def dist_map(self) -> dict[tuple[str, str], float]:
        return dict(self.dists)

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "lengths": [{"u": e[0], "v": e[1], "length": l}
                        for e, l in self.lengths],
            "distances": [{"s": p[0], "t": p[1], "dist": d}
                          for p, d in self.dists],
        }

    def check(self, net: TerminalNetwork, demand: DemandVector,
              tol: float = 1e-6) -> None:
        lengths = self.length_map()
        total = sum(demand[p] * d for p, d in self.dists)
        if total < 1.0 - tol:
            raise FlowError("dual demand constraint violated")
        for pair, d in self.dists:
            dist = _dijkstra_pair(net, lengths, pair[0], pair[1])
            if d > dist + tol:
                raise FlowError(f"distance above shortest path for {pair}")


@dataclass(frozen=True)
class Cut:
    side: frozenset[str]
    capacity: float
    separated_demand: float
    sparsity: float


@dataclass
class ConcurrentFlowResult:
    value: float
    flow: FlowSolution
    dual: DualSolution
    duality_gap: float
    rounds: int


# ---------------------------------------------------------------------------
# Exact single-commodity max flow (augmenting paths over Fractions)
# ---------------------------------------------------------------------------

def max_flow(net: TerminalNetwork, s: str, t: str) -> Fraction:
    """Exact maximum s-t flow value via Edmonds-Karp on rational residuals."""
    if s == t:
        raise FlowError("source equals sink")
    if s not in net.adjacency or t not in net.adjacency:
        raise FlowError("endpoint not in network")
    residual: dict[str, dict[str, Fraction]] = {v: {} for v in net.vertices}
    for u, v, c in net.edges:
        residual[u][v] = residual[u].get(v, Fraction(0)) + c
        residual[v][u] = residual[v].get(u, Fraction(0)) + c
    total = Fraction(0)
    while True:
        parent = {s: None}
        q = deque([s])
        while q and t not in parent:
            u = q.popleft()
            for v in sorted(residual[u]):
                if v not in parent and residual[u][v] > 0:
                    parent[v] = u
                    q.append(v)
        if t not in parent:
            return total
        bottleneck = None
        v = t
        while parent[v] is not None:
            u = parent[v]
            r = residual[u][v]
            bottleneck = r if bottleneck is None or r < bottleneck else bottleneck
            v = u
        v = t
        while parent[v] is not None:
            u = parent[v]
            residual[u][v] -= bottleneck
            residual[v][u] = residual[v].get(u, Fraction(0)) + bottleneck
            v = u
        total += bottleneck


def mincut_partition(net: TerminalNetwork, a_side, b_side) -> Fraction:
    """Exact min capacity of an edge cut separating terminal sets A from B."""
    A = frozenset(str(x) for x in a_side)
    B = frozenset(str(x) for x in b_side)
    if not A or not B or (A | B) != net.terminal_set or (A & B):
        raise FlowError("(A, B) must bipartition the terminal set into nonempty parts")
    inf = sum((c for _, _, c in net.edges), Fraction(0)) + 1
    src, snk = net.fresh_vertex("_src"), net.fresh_vertex("_snk")
    vertices = list(net.vertices) + [src, snk]
    edges = list(net.edges)
    edges += [(src, a, inf) for a in sorted(A)]
    edges += [(b, snk, inf) for b in sorted(B)]
    aug = TerminalNetwork.make(vertices, [src, snk], edges, allow_disconnected=True)
    return max_flow(aug, src, snk)


# ---------------------------------------------------------------------------
# Concurrent flow via constraint generation on the edge-length dual
# ---------------------------------------------------------------------------

def _dijkstra(net: TerminalNetwork, lengths: dict, source: str):
    dist = {source: 0.0}
    parent: dict[str, str | None] = {source: None}
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist.get(u, np.inf):
            continue
        for v in net.adjacency[u]:
            w = lengths.get(_pair(u, v), 0.0)
            nd = d + w
            if nd < dist.get(v, np.inf) - 1e-15:
                dist[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, parent


def _dijkstra_pair(net: TerminalNetwork, lengths: dict, s: str, t: str) -> float:
    dist, _ = _dijkstra(net, lengths, s)
    return dist.get(t, np.inf)


def _extract_path(parent: dict, t: str) -> tuple[str, ...]:
    path = [t]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return tuple(reversed(path))


def _bfs_path(net: TerminalNetwork, s: str, t: str) -> tuple[str, ...]:
    parent = {s: None}
    q = deque([s])
    while q:
        u = q.popleft()
        if u == t:
            return _extract_path(parent, t)
        for v in sorted(net.adjacency[u]):
            if v not in parent:
                parent[v] = u
                q.append(v)
    raise FlowError(f"no path between {s} and {t}")


_cache_lock = threading.Lock()
_flow_cache: dict = {}
_FLOW_CACHE_MAX = 60000


def clear_flow_cache() -> None:
    with _cache_lock:
        _flow_cache.clear()


def concurrent_flow(net: TerminalNetwork, demand: DemandVector | dict,
                    *, use_cache: bool = True) -> ConcurrentFlowResult:
    """Concurrent-flow value of the demand, with primal and dual solutions.

    Raises FlowError on the all-zero demand (the value is unbounded there).
    """
    if not isinstance(demand, DemandVector):
        demand = DemandVector.of(demand)
    if demand.is_zero:
        raise FlowError("concurrent flow is undefined for the zero demand")
    if not demand.restricted_to(net.terminals):
        raise FlowError("demand involves non-terminal vertices")

    key = None
    if use_cache:
        key = (net.cache_key, demand.entries)
        with _cache_lock:
            hit = _flow_cache.get(key)
        if hit is not None:
            return hit

    result = _concurrent_flow_uncached(net, demand)
    if use_cache:
        with _cache_lock:
            if len(_flow_cache) >= _FLOW_CACHE_MAX:
                _flow_cache.clear()
            _flow_cache[key] = result
    return result


_PATHS_PER_PAIR_PER_ROUND = 16


def _concurrent_flow_uncached(net, demand) -> ConcurrentFlowResult:
    """Column generation on the path form of maximum concurrent flow.

    Rows are fixed (#pairs demand rows + #edges capacity rows), so a path
    column appended between rounds leaves the current basis and its inverse
    valid; each round just continues the simplex.  The row multipliers are
    exactly the edge lengths / pair distances of the edge-length dual, and
    Dijkstra under those lengths prices out violated paths.
    """
    from .lp import simplex_min

    edges = [_pair(u, v) for u, v, _ in net.edges]
    caps = np.array([float(c) for _, _, c in net.edges])
    eidx = {e: i for i, e in enumerate(edges)}
    pairs = demand.pairs()
    pidx = {p: i for i, p in enumerate(pairs)}
    ne, np_ = len(edges), len(pairs)
    m = np_ + ne

    b = np.concatenate([np.zeros(np_), caps])
    # columns: lambda | path flows ... | slacks (identity)
    lam_col = np.zeros(m)
    for p in pairs:
        lam_col[pidx[p]] = demand[p]
    columns = [lam_col]
    cost = [-1.0]
    col_paths: list[tuple[tuple[str, str], tuple[str, ...]] | None] = [None]
    seen_paths = set()

    def path_column(pair, path):
        col = np.zeros(m)
        col[pidx[pair]] = -1.0
        for u, v in zip(path, path[1:]):
            col[np_ + eidx[_pair(u, v)]] += 1.0
        return col

    def add_path(pair, path):
        if (pair, path) in seen_paths:
            return False
        seen_paths.add((pair, path))
        columns.append(path_column(pair, path))
        cost.append(0.0)
        col_paths.append((pair, path))
        return True

    for p in pairs:
        add_path(p, _bfs_path(net, p[0], p[1]))

    basis = np.arange(m)
    Binv = np.eye(m)
    rounds = 0
    n_struct_prev = 0
    while True:
        rounds += 1
        if rounds > _MAX_SEPARATION_ROUNDS:
            raise FlowError("column generation did not converge")
        n_struct = len(columns)
        A = np.hstack([np.column_stack(columns), np.eye(m)])
        c_full = np.array(cost + [0.0] * m)
        if rounds == 1:
            basis = np.arange(n_struct, n_struct + m)
            Binv = np.eye(m)
        else:
            # slack block moved right by the freshly appended columns
            shift = n_struct - n_struct_prev
            basis = np.where(basis >= n_struct_prev, basis + shift, basis)
        x, value, y, basis, Binv, _ = simplex_min(c_full, A, b, basis, Binv=Binv)
        n_struct_prev = n_struct

        deltas = np.maximum(-y[:np_], 0.0)
        lengths = {e: max(0.0, -float(y[np_ + i])) for e, i in eidx.items()}

        added = False
        src_cache: dict[str, tuple[dict, dict]] = {}
        for p in pairs:
            s, t = p
            target = deltas[pidx[p]]
            if target <= FEAS_TOL:
                continue
            if s not in src_cache:
                src_cache[s] = _dijkstra(net, lengths, s)
            ds, parent_s = src_cache[s]
            if ds.get(t, np.inf) >= target - FEAS_TOL:
                continue
            if t not in src_cache:
                src_cache[t] = _dijkstra(net, lengths, t)
            dt, parent_t = src_cache[t]
            # candidate midpoints give many violated paths per round
            cand = sorted(net.vertices,
                          key=lambda v: ds.get(v, np.inf) + dt.get(v, np.inf))
            taken = 0
            for v in cand:
                via = ds.get(v, np.inf) + dt.get(v, np.inf)
                if via >= target - FEAS_TOL or taken >= _PATHS_PER_PAIR_PER_ROUND:
                    break
                left = _extract_path(parent_s, v)
                right = _extract_path(parent_t, v)
                path = left + tuple(reversed(right[:-1]))
                if len(set(path)) != len(path):
                    continue
                if add_path(p, path):
                    taken += 1
                    added = True
        if not added:
            break

    lam = -value
    dual_obj = float(sum(caps[i] * lengths[e] for e, i in eidx.items()))
    gap = abs(dual_obj - lam) / max(1.0, abs(lam))

    per_pair_paths: dict[tuple[str, str], list[tuple[tuple[str, ...], float]]] = {
        p: [] for p in pairs}
    for j, meta in enumerate(col_paths):
        if meta is None:
            continue
        f = float(x[j])
        if f > 1e-12:
            per_pair_paths[meta[0]].append((meta[1], f))
    arc_flows = []
    for p in pairs:
        want = lam * demand[p]
        got = sum(f for _, f in per_pair_paths[p])
        scale = want / got if got > want and got > 0 else 1.0
        acc: dict[tuple[str, str], float] = {}
        for path, f in per_pair_paths[p]:
            for u, v in zip(path, path[1:]):
                acc[(u, v)] = acc.get((u, v), 0.0) + f * scale
        arc_flows.append((p, tuple(sorted(acc.items()))))

    all_pairs = net.terminal_pairs()
    dist_rows = []
    by_source: dict[str, dict] = {}
    for p in all_pairs:
        s, t = p
        if s not in by_source:
            by_source[s] = _dijkstra(net, lengths, s)[0]
        dist_rows.append((p, float(by_source[s].get(t, np.inf))))

    flow = FlowSolution(lam=lam, arc_flows=tuple(arc_flows))
    dual = DualSolution(lengths=tuple(sorted(lengths.items())),
                        dists=tuple(dist_rows), value=dual_obj)
    return ConcurrentFlowResult(value=lam, flow=flow, dual=dual,
                                duality_gap=gap, rounds=rounds)


def lambda_value(net: TerminalNetwork, demand) -> float:
    return concurrent_flow(net, demand).value


# ---------------------------------------------------------------------------
# 2-hop restricted flow and its dual (quasi-bipartite networks)
# ---------------------------------------------------------------------------

def _require_quasi_bipartite(net: TerminalNetwork) -> None:
    if not net.is_quasi_bipartite():
        raise FlowError("network is not quasi-bipartite")
    if not net.terminals_independent():
        raise FlowError("terminals are not independent "
                        "(subdivide terminal-terminal edges first)")


@dataclass(frozen=True)
class TwoHopFlow:
    value: float
    middle_flows: tuple  # ((pair, ((v, flow), ...)), ...)
    unroutable_pairs: tuple


def lambda_2hop(net: TerminalNetwork, demand: DemandVector | dict) -> TwoHopFlow:
    """Optimal concurrent flow along paths s-v-t only."""
    _require_quasi_bipartite(net)
    if not isinstance(demand, DemandVector):
        demand = DemandVector.of(demand)
    if demand.is_zero:
        raise FlowError("zero demand")
    ts = net.terminal_set
    pairs = demand.pairs()

    commodity_vars: list[tuple[tuple[str, str], str]] = []
    unroutable = []
    for p in pairs:
        s, t = p
        mids = [v for v in net.adjacency[s] if v not in ts and net.cap(v, t) > 0]
        if not mids:
            unroutable.append(p)
        for v in sorted(mids):
            commodity_vars.append((p, v))
    if unroutable:
        return TwoHopFlow(0.0, tuple(), tuple(unroutable))

    nvar = len(commodity_vars) + 1   # + lambda (last column)
    vidx = {cv: i for i, cv in enumerate(commodity_vars)}
    rows = []
    senses = []
    b = []
    for p in pairs:
        row = np.zeros(nvar)
        for (q, v), i in vidx.items():
            if q == p:
                row[i] = -1.0
        row[-1] = demand[p]
        rows.append(row)
        senses.append(LE)
        b.append(0.0)
    for u, v, c in net.edges:
        term, mid = (u, v) if u in ts else (v, u)
        row = np.zeros(nvar)
        touched = False
        for (q, w), i in vidx.items():
            if w == mid and term in q:
                row[i] = 1.0
                touched = True
        if touched:
            rows.append(row)
            senses.append(LE)
            b.append(float(c))
    obj = np.zeros(nvar)
    obj[-1] = 1.0
    sol = solve_lp(obj, np.array(rows), np.array(b), senses, maximize=True)
    per_pair: dict = {p: [] for p in pairs}
    for (p, v), i in vidx.items():
        f = float(sol.x[i])
        if f > 1e-12:
            per_pair[p].append((v, f))
    flows = tuple((p, tuple(sorted(per_pair[p]))) for p in pairs)
    return TwoHopFlow(float(sol.value), flows, tuple())


def dual_2hop(net: TerminalNetwork, demand: DemandVector | dict):
    """Explicit dual of the 2-hop flow LP: edge lengths and pair distances.

    Requires every positive-demand pair to have a positive-capacity common
    neighbor (the primal must be feasible and bounded).
    Returns (value, DualSolution).
    """
    _require_quasi_bipartite(net)
    if not isinstance(demand, DemandVector):
        demand = DemandVector.of(demand)
    if demand.is_zero:
        raise FlowError("zero demand")
    ts = net.terminal_set
    pairs = demand.pairs()
    triples = []
    for p in pairs:
        s, t = p
        mids = [v for v in net.adjacency[s] if v not in ts and net.cap(v, t) > 0]
        if not mids:
            raise FlowError(f"pair {p} has no positive-capacity common neighbor")
        triples.extend((p, v) for v in sorted(mids))

    edges = [_pair(u, v) for u, v, _ in net.edges]
    eidx = {e: i for i, e in enumerate(edges)}
    ne = len(edges)
    pidx = {p: ne + i for i, p in enumerate(pairs)}
    nvar = ne + len(pairs)

    rows = [np.zeros(nvar)]
    senses = [GE]
    b = [1.0]
    for p in pairs:
        rows[0][pidx[p]] = demand[p]
    for p, v in triples:
        s, t = p
        row = np.zeros(nvar)
        row[pidx[p]] = 1.0
        row[eidx[_pair(s, v)]] -= 1.0
        row[eidx[_pair(v, t)]] -= 1.0
        rows.append(row)
        senses.append(LE)
        b.append(0.0)
    obj = np.concatenate([np.array([float(c) for _, _, c in net.edges]),
                          np.zeros(len(pairs))])
    sol = solve_lp(obj, np.array(rows), np.array(b), senses)
    lengths = tuple(sorted((e, max(0.0, float(sol.x[i]))) for e, i in eidx.items()))
    dists = tuple((p, float(sol.x[pidx[p]])) for p in pairs)
    return float(sol.value), DualSolution(lengths=lengths, dists=dists,
                                          value=float(sol.value))


# ---------------------------------------------------------------------------
# Terminal-free concurrent flow
# ---------------------------------------------------------------------------

def lambda_terminal_free(net: TerminalNetwork, demand: DemandVector | dict) -> float:
    """Concurrent flow restricted to paths with no internal terminal.

    Flow decomposes into direct terminal-terminal edges plus, per component
    of the graph minus terminals, flows staying inside that component.
    """
    from .network import components_after_terminal_removal

    if not isinstance(demand, DemandVector):
        demand = DemandVector.of(demand)
    if demand.is_zero:
        raise FlowError("zero demand")
    ts = net.terminal_set
    pairs = demand.pairs()
    comps = components_after_terminal_removal(net)

    # variables: per (component, pair) arc flows; direct edge vars; lambda last
    arc_vars: list[tuple[int, tuple[str, str], tuple[str, str]]] = []
    direct_vars: list[tuple[str, str]] = []
    for p in pairs:
        s, t = p
        if net.cap(s, t) > 0:
            direct_vars.append(p)
        for ci, comp in enumerate(comps):
            s_in = [x for x in net.adjacency[s] if x in comp]
            t_in = [x for x in net.adjacency[t] if x in comp]
            if not s_in or not t_in:
                continue
            for x in sorted(s_in):
                arc_vars.append((ci, p, (s, x)))
            for x in sorted(t_in):
                arc_vars.append((ci, p, (x, t)))
            for x in sorted(comp):
                for y in sorted(net.adjacency[x]):
                    if y in comp:
                        arc_vars.append((ci, p, (x, y)))
    nvar = len(arc_vars) + len(direct_vars) + 1
    aidx = {av: i for i, av in enumerate(arc_vars)}
    didx = {p: len(arc_vars) + i for i, p in enumerate(direct_vars)}
    lam_col = nvar - 1

    rows, senses, b = [], [], []
    for p in pairs:
        s, t = p
        row = np.zeros(nvar)
        for (ci, q, (u, v)), i in aidx.items():
            if q == p and u == s and v != t:
                row[i] = -1.0
        # direct s-t arcs for this pair
        if p in didx:
            row[didx[p]] = -1.0
        for (ci, q, (u, v)), i in aidx.items():
            if q == p and u == s and v == t:
                row[i] = -1.0
        row[lam_col] = demand[p]
        rows.append(row)
        senses.append(LE)
        b.append(0.0)
    # conservation inside components
    for ci, comp in enumerate(comps):
        for p in pairs:
            for x in sorted(comp):
                row = np.zeros(nvar)
                touched = False
                for (cj, q, (u, v)), i in aidx.items():
                    if cj != ci or q != p:
                        continue
                    if v == x:
                        row[i] += 1.0
                        touched = True
                    if u == x:
                        row[i] -= 1.0
                        touched = True
                if touched:
                    rows.append(row)
                    senses.append(EQ)
                    b.append(0.0)
    # capacities
    for u, v, c in net.edges:
        row = np.zeros(nvar)
        touched = False
        for (ci, q, (a, bb)), i in aidx.items():
            if _pair(a, bb) == _pair(u, v):
                row[i] += 1.0
                touched = True
        if u in ts and v in ts:
            p = _pair(u, v)
            if p in didx:
                row[didx[p]] += 1.0
                touched = True
        if touched:
            rows.append(row)
            senses.append(LE)
            b.append(float(c))
    obj = np.zeros(nvar)
    obj[lam_col] = 1.0
    if not rows:
        return 0.0
    sol = solve_lp(obj, np.array(rows), np.array(b), senses, maximize=True)
    return float(sol.value)


# ---------------------------------------------------------------------------
# Cuts
# ---------------------------------------------------------------------------

def sparsest_cut(net: TerminalNetwork, demand: DemandVector | dict,
                 *, max_vertices: int = 20) -> tuple[float, Cut]:
    """Exact sparsest cut by enumerating all vertex subsets (desk scale only)."""
    if not isinstance(demand, DemandVector):
        demand = DemandVector.of(demand)
    if demand.is_zero:
        raise FlowError("zero demand")
    n = len(net.vertices)
    if n > max_vertices:
        raise FlowError(
            f"{n} vertices exceeds the brute-force bound {max_vertices}; "
            "use sparsest_terminal_cut for a terminal-bipartition upper bound")
    vidx = {v: i for i, v in enumerate(net.vertices)}
    count = 1 << (n - 1)
    masks = (np.arange(count, dtype=np.int64) << 1) | 1   # vertex 0 pinned inside
    caps = np.zeros(count)
    for u, v, c in net.edges:
        side_u = (masks >> vidx[u]) & 1
        side_v = (masks >> vidx[v]) & 1
        caps += float(c) * (side_u != side_v)
    dem = np.zeros(count)
    for (s, t), val in demand.items():
        side_s = (masks >> vidx[s]) & 1
        side_t = (masks >> vidx[t]) & 1
        dem += val * (side_s != side_t)
    sparsity = np.full(count, np.inf)
    pos = dem > 0
    sparsity[pos] = caps[pos] / dem[pos]
    best = int(np.argmin(sparsity))
    mask = int(masks[best])
    side = frozenset(v for v, i in vidx.items() if (mask >> i) & 1)
    cut = Cut(side=side, capacity=float(caps[best]),
              separated_demand=float(dem[best]), sparsity=float(sparsity[best]))
    return float(sparsity[best]), cut


def sparsest_terminal_cut(net: TerminalNetwork, demand: DemandVector | dict) -> tuple[float, tuple]:
    """Min over terminal bipartitions of mincut(A,B)/d(A,B); upper bound on the
    sparsest cut, exact for min-cut ratio purposes."""
    if not isinstance(demand, DemandVector):
        demand = DemandVector.of(demand)
    terms = net.terminals
    best = (np.inf, None)
    t0 = terms[0]
    rest = terms[1:]
    for r in range(0, len(rest) + 1):
        for combo in itertools.combinations(rest, r):
            A = frozenset((t0,) + combo)
            B = frozenset(terms) - A
            if not B:
                continue
            sep = sum(val for (s, t), val in demand.items()
                      if (s in A) != (t in A))
            if sep <= 0:
                continue
            cut = float(mincut_partition(net, A, B))
            ratio = cut / sep
            if ratio < best[0]:
                best = (ratio, (A, B))
    if best[1] is None:
        raise FlowError("no terminal bipartition separates positive demand")
    return best


def flow_cut_gap_witness(net: TerminalNetwork, demand) -> float:
    """Phi/lambda for one demand (>= 1 up to solver tolerance)."""
    phi, _ = sparsest_cut(net, demand)
    lam = concurrent_flow(net, demand).value
    return phi / lam
