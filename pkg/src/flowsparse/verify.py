"""Quality certification of candidate sparsifiers against the flow oracle.

Certification is over a finite witness demand set, never the universal
quantifier: reports carry an explicit disclaimer field.  Exact cut
certification enumerates every terminal bipartition in rational arithmetic.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .flow import concurrent_flow, max_flow, mincut_partition
from .network import DemandVector, TerminalNetwork

DEFAULT_TOL = 1e-6


class VerifyError(ValueError):
    pass


@dataclass(frozen=True)
class DemandRecord:
    demand: tuple
    lam_base: float
    lam_candidate: float

    @property
    def ratio(self) -> float:
        return self.lam_candidate / self.lam_base


@dataclass(frozen=True)
class QualityReport:
    lower: float          # max over demands of lam_G / lam_G'
    upper: float          # max over demands of lam_G' / lam_G
    claimed_quality: float
    tol: float
    verdict: bool
    records: tuple[DemandRecord, ...]
    demand_spec: str
    witness_set_only: bool = True

    def to_json_dict(self) -> dict:
        return {
            "version": 1,
            "lower": self.lower,
            "upper": self.upper,
            "claimed_quality": self.claimed_quality,
            "tol": self.tol,
            "verdict": "pass" if self.verdict else "fail",
            "demand_spec": self.demand_spec,
            "witness_set_only": self.witness_set_only,
            "records": [
                {"demand": [[list(p), v] for p, v in r.demand],
                 "lam_base": r.lam_base,
                 "lam_candidate": r.lam_candidate} for r in self.records],
        }


@dataclass(frozen=True)
class CutRecord:
    side_a: tuple[str, ...]
    cut_base: Fraction
    cut_candidate: Fraction


@dataclass(frozen=True)
class CutReport:
    beta: float
    all_exact: bool
    records: tuple[CutRecord, ...]

    def to_json_dict(self) -> dict:
        return {
            "version": 1,
            "beta": self.beta,
            "all_exact": self.all_exact,
            "records": [{"A": list(r.side_a), "base": str(r.cut_base),
                         "candidate": str(r.cut_candidate)}
                        for r in self.records],
        }


# ---------------------------------------------------------------------------
# Demand grids
# ---------------------------------------------------------------------------

def basis_demands(net: TerminalNetwork) -> list[DemandVector]:
    """One single-commodity vector per pair at its max-flow value."""
    out = []
    for s, t in net.terminal_pairs():
        val = float(max_flow(net, s, t))
        if val > 0:
            out.append(DemandVector.of({(s, t): val}))
    return out


def random_demands(net: TerminalNetwork, n: int, seed: int) -> list[DemandVector]:
    """Uniform coordinates, rescaled so the demand sits on the feasibility
    boundary (lambda = 1)."""
    rng = random.Random(seed)
    pairs = net.terminal_pairs()
    out = []
    for _ in range(n):
        entries = {p: rng.uniform(0.05, 1.0) for p in pairs
                   if rng.random() < 0.85}
        if not entries:
            entries = {pairs[rng.randrange(len(pairs))]: 1.0}
        d = DemandVector.of(entries)
        lam = concurrent_flow(net, d).value
        out.append(d.scaled(lam))
    return out


def disc_demands(net: TerminalNetwork, eps: float, eta: float) -> list[DemandVector]:
    """Per pair, every power of 1+eps in [eta * F, F] (F the pair's 2-hop max
    flow in quasi-bipartite nets, otherwise its max flow) times the pair's
    basis vector."""
    if not (0 < eps) or not (0 < eta < 1):
        raise VerifyError("need eps > 0 and eta in (0,1)")
    use_two_hop = net.is_quasi_bipartite() and net.terminals_independent()
    if use_two_hop:
        from .sampling import two_hop_maxflows
        flows = {p: float(f) for p, (f, _) in two_hop_maxflows(net).items()}
    else:
        flows = {p: float(max_flow(net, *p)) for p in net.terminal_pairs()}
    out = []
    for p, F in sorted(flows.items()):
        if F <= 0:
            continue
        j = math.floor(math.log(F) / math.log(1 + eps) + 1e-12)
        while (1 + eps) ** j >= eta * F * (1 - 1e-12):
            val = (1 + eps) ** j
            if val <= F * (1 + 1e-12):
                out.append(DemandVector.of({p: val}))
            j -= 1
    return out


def demand_grid(net: TerminalNetwork, spec: str) -> list[DemandVector]:
    """Dispatch on a spec string: "basis" | "random:N:SEED" | "disc:EPS:ETA"."""
    parts = spec.split(":")
    if parts[0] == "basis":
        return basis_demands(net)
    if parts[0] == "random":
        if len(parts) != 3:
            raise VerifyError("random spec is random:N:SEED")
        return random_demands(net, int(parts[1]), int(parts[2]))
    if parts[0] == "disc":
        if len(parts) != 3:
            raise VerifyError("disc spec is disc:EPS:ETA")
        return disc_demands(net, float(parts[1]), float(parts[2]))
    raise VerifyError(f"unknown demand spec {spec!r}")


# ---------------------------------------------------------------------------
# Certification
# ---------------------------------------------------------------------------

def certify(g: TerminalNetwork, gp: TerminalNetwork,
            demands: list[DemandVector] | str, claimed_q: float,
            *, tol: float = DEFAULT_TOL, jobs: int = 1,
            demand_spec: str = "explicit") -> QualityReport:
    """Per-demand flow comparison of candidate gp against base g.

    A quality-q sparsifier must never lose flow (lower <= 1+tol) and never
    gain more than the claim (upper <= q * (1+tol)).
    """
    if set(g.terminals) != set(gp.terminals):
        raise VerifyError("terminal sets differ between base and candidate")
    if isinstance(demands, str):
        demand_spec = demands
        demands = demand_grid(g, demands)
    if not demands:
        raise VerifyError("empty demand set")

    def solve_pair(d):
        lam_g = concurrent_flow(g, d).value
        lam_gp = concurrent_flow(gp, d).value
        return DemandRecord(demand=d.entries, lam_base=lam_g,
                            lam_candidate=lam_gp)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(solve_pair, demands))
    else:
        records = [solve_pair(d) for d in demands]

    lower = max(r.lam_base / r.lam_candidate for r in records)
    upper = max(r.lam_candidate / r.lam_base for r in records)
    verdict = lower <= 1 + tol and upper <= claimed_q * (1 + tol)
    return QualityReport(lower=lower, upper=upper, claimed_quality=claimed_q,
                         tol=tol, verdict=verdict, records=tuple(records),
                         demand_spec=demand_spec)


def certify_cuts(g: TerminalNetwork, gp: TerminalNetwork,
                 *, max_terminals: int = 16) -> CutReport:
    """Exact bipartition min-cut comparison over all 2^(k-1)-1 bipartitions."""
    if set(g.terminals) != set(gp.terminals):
        raise VerifyError("terminal sets differ between base and candidate")
    k = g.k
    if k > max_terminals:
        raise VerifyError(f"k={k} exceeds the bipartition budget {max_terminals}")
    terms = g.terminals
    t0 = terms[0]
    rest = terms[1:]
    records = []
    beta = Fraction(0)
    all_exact = True
    for r in range(len(rest) + 1):
        for combo in itertools.combinations(rest, r):
            A = (t0,) + combo
            B = tuple(x for x in terms if x not in A)
            if not B:
                continue
            base = mincut_partition(g, A, B)
            cand = mincut_partition(gp, A, B)
            records.append(CutRecord(side_a=A, cut_base=base,
                                     cut_candidate=cand))
            if base != cand:
                all_exact = False
            if base > 0:
                beta = max(beta, Fraction(cand, 1) / base)
            elif cand > 0:
                beta = Fraction(10 ** 12)
    return CutReport(beta=float(beta), all_exact=all_exact,
                     records=tuple(records))
