"""Explicit cycle constructions for generalized sums, each returned as a trace.

Every construction works on a *view*: an arc predicate plus the designated
cycles as vertex-id lists.  Relabelling "without loss of generality" is a
rotation of those lists (the shift is recorded in the trace parameters), and
the mirror-image cases are handled by running the same code on the reversed
digraph and reversing the resulting cycle.

A trace records the closed-form length of its pattern next to the cycle, so
callers can check both the arcs and the arithmetic.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from math import gcd

from .builder import GenSum, fuse_summands, induced_subsum
from .digraph import Cycle, is_strong, validate_cycle
from .errors import NotStrongError, PreconditionError, UnsupportedArityError, WrongCaseError
from .structure import (
    CycleFound,
    GoodPair,
    Singularity,
    find_good_pairs,
    propagate_forbidden_length,
    singular_status,
)

ArcTest = Callable[[int, int], bool]


@dataclass(frozen=True)
class ConstructionTrace:
    pattern: str
    params: dict
    cycle: Cycle
    length: int

    def is_valid(self, g: GenSum) -> bool:
        return len(self.cycle) == self.length and validate_cycle(g.compiled, self.cycle)

    def mapped(self, host_vertex: Sequence[int]) -> ConstructionTrace:
        return replace(self, cycle=tuple(host_vertex[v] for v in self.cycle))

    def to_dict(self) -> dict:
        return {"pattern": self.pattern, "params": self.params, "cycle": list(self.cycle)}

    @classmethod
    def from_dict(cls, data: dict) -> ConstructionTrace:
        cycle = tuple(int(v) for v in data["cycle"])
        return cls(data["pattern"], dict(data.get("params", {})), cycle, len(cycle))


def _rotate(seq: Sequence[int], shift: int) -> list[int]:
    shift %= len(seq)
    return list(seq[shift:]) + list(seq[:shift])


def _reverse_view(has: ArcTest) -> ArcTest:
    return lambda u, v: has(v, u)


def _cycle_of(g: GenSum, i: int) -> list[int]:
    return list(g.cycle(i))


def _require_pair(g: GenSum) -> None:
    if g.k != 2:
        raise UnsupportedArityError(f"defined for two summands only, got k={g.k}")


# -- good-pair merge ---------------------------------------------------------------


def merge_with_good_pair(g: GenSum, pair: GoodPair) -> ConstructionTrace:
    """Splice the two designated cycles through a good pair into one cycle."""
    if not (0 <= pair.i < g.k and 0 <= pair.j < g.k) or pair.i == pair.j or not pair.is_valid(g):
        raise PreconditionError(f"{pair} is not a good pair of this sum")
    x, y = _cycle_of(g, pair.i), _cycle_of(g, pair.j)
    n, m = len(x), len(y)
    cycle = [x[pair.s % n]] + _rotate(y, pair.r)[:m] + _rotate(x, pair.s + 1)[: n - 1]
    params = {"i": pair.i, "j": pair.j, "s": pair.s, "r": pair.r}
    return ConstructionTrace("merge", params, tuple(cycle), n + m)


# -- singular vertex ------------------------------------------------------------------


def _out_singular_families(has: ArcTest, x: list[int], y: list[int], s0: int) -> list[tuple]:
    """Cycles through an out-singular ``x[s0]``: ``(pattern, params, cycle, length)`` tuples."""
    n, m = len(x), len(y)

    def dominates(t: int) -> bool:
        return all(has(x[t % n], w) for w in y)

    s = s0
    for _ in range(n):
        if not dominates(s - 1):
            break
        s -= 1
    else:
        raise NotStrongError("every vertex of the summand dominates the other summand")
    q = s0
    while dominates(q + 1):
        q += 1
    s, q = s % n, q % n
    tails_s = [r for r in range(m) if has(y[r], x[(s - 1) % n])]
    tails_q = [r for r in range(m) if has(y[r], x[(q + 1) % n])]
    if not tails_s or not tails_q:
        raise NotStrongError("anchor vertex has no in-arc from the other summand")
    r, r2 = tails_s[0], tails_q[0]
    found = []
    for h in range(m):
        cycle = [y[r], x[(s - 1) % n], x[s]] + [y[(r - h + t) % m] for t in range(h)]
        found.append(("alpha", {"h": h, "s": s, "r": r}, cycle, 3 + h))
    for h in range(m):
        cycle = [y[r2]] + _rotate(x, q + 1) + [y[(r2 - h + t) % m] for t in range(h)]
        found.append(("beta", {"h": h, "q": q, "r": r2}, cycle, n + 1 + h))
    for length in range(m + 3, n + 1):
        h = length - (m + 1)
        for r in tails_s:
            if has(x[(s + h) % n], y[(r + 2) % m]):
                path = [x[(s - 1 + t) % n] for t in range(h + 2)]
                cycle = [y[r]] + path + [y[(r + 2 + t) % m] for t in range(m - 2)]
                found.append(("gamma", {"h": h, "s": s, "r": r}, cycle, length))
                break
    return found


def singular_families(g: GenSum, v: int) -> list[ConstructionTrace]:
    """Every alpha, beta and gamma cycle built from the singular vertex ``v``."""
    _require_pair(g)
    side = g.summand_of(v)
    status = singular_status(g, v, 1 - side)
    if status is Singularity.NON:
        raise PreconditionError(f"vertex {v} is not singular")
    x, y = _cycle_of(g, side), _cycle_of(g, 1 - side)
    has = g.compiled.has_arc
    if status is Singularity.OUT:
        raw = _out_singular_families(has, x, y, x.index(v))
    else:
        xr, yr = x[::-1], y[::-1]
        raw = [
            (pattern, params, cycle[::-1], length)
            for pattern, params, cycle, length in _out_singular_families(
                _reverse_view(has), xr, yr, xr.index(v)
            )
        ]
    base = {"vertex": v, "direction": "out" if status is Singularity.OUT else "in"}
    return [ConstructionTrace(p, {**base, **params}, tuple(c), ln) for p, params, c, ln in raw]


def cycles_from_singular(g: GenSum, v: int) -> dict[int, ConstructionTrace]:
    """One trace per length reachable from singular ``v`` (alpha preferred, then beta, gamma).

    Lengths in the gamma range that no gamma cycle realises are simply absent.
    """
    traces: dict[int, ConstructionTrace] = {}
    for trace in singular_families(g, v):
        traces.setdefault(trace.length, trace)
    return dict(sorted(traces.items()))


# -- lengths n + i*d -------------------------------------------------------------------


def cycles_n_plus_id(g: GenSum, pair: GoodPair) -> dict[int, ConstructionTrace]:
    """Cycles of length ``n + i*d`` for ``1 <= i <= m/d`` from a good pair.

    When the arc needed by the direct construction is reversed, the cycle comes
    from forbidden-length propagation seeded at the good pair instead.
    """
    _require_pair(g)
    if not pair.is_valid(g):
        raise PreconditionError(f"{pair} is not a good pair of this sum")
    has = g.compiled.has_arc
    x = _rotate(_cycle_of(g, pair.i), pair.s + 1)
    y = _rotate(_cycle_of(g, pair.j), pair.r - 1)
    n, m = len(x), len(y)
    d = gcd(n, m)
    traces = {}
    for i in range(1, m // d + 1):
        length = n + i * d
        params = {"i": i, "d": d, "x_shift": (pair.s + 1) % n, "y_shift": (pair.r - 1) % m}
        if has(y[i * d % m], x[0]):
            cycle = [x[n - 1]] + [y[t % m] for t in range(1, i * d + 1)] + x[: n - 1]
            traces[length] = ConstructionTrace("gamma_i", params, tuple(cycle), length)
            continue
        for seeds in ([(y[0], x[0])], None):
            outcome = propagate_forbidden_length(g, length, seeds=seeds, i=pair.i, j=pair.j)
            if isinstance(outcome, CycleFound):
                traces[length] = _propagation_trace(outcome, params)
                break
    return traces


def _propagation_trace(outcome: CycleFound, extra: dict | None = None) -> ConstructionTrace:
    params = {
        **(extra or {}),
        "rule": outcome.rule,
        "premise": list(outcome.premise),
        "conclusion": list(outcome.conclusion),
    }
    return ConstructionTrace("propagation", params, outcome.cycle, outcome.length)


# -- k summands ----------------------------------------------------------------------


@dataclass(frozen=True)
class SummandGraphAnalysis:
    """The summand digraph H and the case it puts the sum in.

    ``base`` is the summand of least order.  For case ``"cycle"`` the field
    ``cycle`` lists summands forming a cycle of H without ``base``; for case
    ``"transitive"`` the field ``order`` is the Hamiltonian path of that
    (acyclic) part of H.
    """

    case: str
    base: int
    arcs: frozenset[tuple[int, int]]
    cycle: tuple[int, ...] = ()
    order: tuple[int, ...] = ()


def summand_graph(g: GenSum) -> frozenset[tuple[int, int]]:
    succ = g.compiled.succ
    arcs = set()
    for i in range(g.k):
        for j in range(g.k):
            if i != j and any(succ[v] & g.summand_mask(j) for v in g.summand_vertices(i)):
                arcs.add((i, j))
    return frozenset(arcs)


def _find_cycle(nodes: Sequence[int], arcs: frozenset[tuple[int, int]]) -> tuple[int, ...] | None:
    """A shortest cycle among ``nodes`` (digons first), or None if acyclic."""
    for a in nodes:
        for b in nodes:
            if a < b and (a, b) in arcs and (b, a) in arcs:
                return (a, b)
    best = None
    for start in nodes:
        parent = {start: None}
        frontier = [start]
        while frontier and start not in frontier[1:]:
            nxt = []
            for u in frontier:
                for w in nodes:
                    if (u, w) not in arcs:
                        continue
                    if w == start:
                        path = [u]
                        while parent[path[-1]] is not None:
                            path.append(parent[path[-1]])
                        cycle = tuple(reversed(path))
                        if best is None or len(cycle) < len(best):
                            best = cycle
                        nxt = []
                        break
                    if w not in parent:
                        parent[w] = u
                        nxt.append(w)
                else:
                    continue
                break
            frontier = nxt
    return best


def collapse_cycle_in_H(g: GenSum) -> SummandGraphAnalysis:
    if g.k < 3:
        raise PreconditionError("the summand-graph analysis needs k >= 3")
    if not is_strong(g.compiled):
        raise NotStrongError("the sum is not strong")
    orders = g.orders
    base = min(range(g.k), key=lambda i: (orders[i], i))
    arcs = summand_graph(g)
    rest = [i for i in range(g.k) if i != base]
    cycle = _find_cycle(rest, arcs)
    if cycle is not None:
        return SummandGraphAnalysis("cycle", base, arcs, cycle=cycle)
    path = sorted(rest, key=lambda i: -sum((i, j) in arcs for j in rest))
    return SummandGraphAnalysis("transitive", base, arcs, order=tuple(path))


def collapse_step(g: GenSum, analysis: SummandGraphAnalysis) -> tuple[GenSum, tuple[int, ...]]:
    """Fuse the cycle found by the analysis into one Hamiltonian summand."""
    if analysis.case != "cycle":
        raise WrongCaseError("nothing to collapse: the summand graph is transitive")
    return fuse_summands(g, analysis.cycle)


@dataclass(frozen=True)
class KnaryConstruction:
    case: str
    traces: dict[int, ConstructionTrace]
    delegated: frozenset[int] = field(default_factory=frozenset)
    r: int | None = None


def _transitive_case_21(has: ArcTest, cycles: list[list[int]]) -> list[tuple]:
    """Base summand dominates the first summand of the path; covers every length."""
    k = len(cycles)
    orders = [len(c) for c in cycles]
    anchor = next(
        ((a, b) for a in range(orders[-1]) for b in range(orders[0]) if has(cycles[-1][a], cycles[0][b])),
        None,
    )
    if anchor is None:
        raise NotStrongError("no arc from the last summand back to the base summand")
    last = _rotate(cycles[-1], anchor[0] + 1)
    base = _rotate(cycles[0], anchor[1])
    cs = [base] + cycles[1:-1] + [last]
    found = []
    for i in range(orders[0]):
        found.append(("beta", {"j": 1, "i": i}, base[: i + 1] + [cs[1][0], last[-1]], i + 3))
    prefix = list(base)
    for j in range(1, k - 1):
        for i in range(orders[j]):
            cycle = prefix + cs[j][: i + 1] + [last[-1]]
            found.append(("gamma", {"j": j + 1, "i": i}, cycle, sum(orders[:j]) + i + 2))
        prefix += cs[j]
    for i in range(1, orders[-1]):
        cycle = prefix + last[orders[-1] - 1 - i:]
        found.append(("eta", {"j": k, "i": i}, cycle, sum(orders[:-1]) + i + 1))
    shifts = {"base_shift": anchor[1], "last_shift": (anchor[0] + 1) % orders[-1]}
    return [(p, {**params, **shifts}, c, ln) for p, params, c, ln in found]


def _transitive_case_23(has: ArcTest, cycles: list[list[int]]) -> tuple[int, list[tuple]]:
    """Lengths ``[r+3, (sum of non-base orders) + r + 1]``; returns ``r`` too."""
    k = len(cycles)
    orders = [len(c) for c in cycles]
    best = None
    for a in range(orders[-1]):
        for b in range(orders[0]):
            if not has(cycles[-1][a], cycles[0][b]):
                continue
            for r in range(orders[0] - 1, -1, -1):
                tail = cycles[0][(b + r) % orders[0]]
                heads = [c for c in range(orders[1]) if has(tail, cycles[1][c])]
                if heads:
                    if best is None or r > best[0]:
                        best = (r, a, b, heads[0])
                    break
    if best is None:
        raise NotStrongError("no anchor arcs between the base summand and the path ends")
    r, a, b, c = best
    base = _rotate(cycles[0], b)
    first = _rotate(cycles[1], c)
    last = _rotate(cycles[-1], a + 1)
    cs = [base, first] + cycles[2:-1] + [last]
    closing = [last[-1]] + base[: r + 1]
    found = []
    prefix: list[int] = []
    for j in range(1, k - 1):
        for i in range(orders[j]):
            cycle = prefix + cs[j][: i + 1] + closing
            found.append(("phi", {"j": j + 1, "i": i}, cycle, sum(orders[1:j]) + i + r + 3))
        prefix += cs[j]
    for i in range(orders[-1]):
        cycle = prefix + last[orders[-1] - 1 - i:] + base[: r + 1]
        found.append(("psi", {"j": k, "i": i}, cycle, sum(orders[1:-1]) + i + r + 2))
    shifts = {"r": r, "base_shift": b, "first_shift": c, "last_shift": (a + 1) % orders[-1]}
    return r, [(p, {**params, **shifts}, cyc, ln) for p, params, cyc, ln in found]


def knary_case_cycles(g: GenSum, analysis: SummandGraphAnalysis | None = None) -> KnaryConstruction:
    """Constructions for a sum whose non-base summands are transitively ordered."""
    if analysis is None:
        analysis = collapse_cycle_in_H(g)
    if analysis.case != "transitive":
        raise WrongCaseError("the summand graph has a cycle; collapse it first")
    has = g.compiled.has_arc
    path = [analysis.base, *analysis.order]
    cycles = [_cycle_of(g, i) for i in path]
    base, first, last = analysis.base, analysis.order[0], analysis.order[-1]
    arcs = analysis.arcs
    if (first, base) not in arcs:
        case, raw = "2.1", _transitive_case_21(has, cycles)
    elif (base, last) not in arcs:
        reversed_cycles = [cycles[0][::-1]] + [c[::-1] for c in reversed(cycles[1:])]
        raw = [
            (p, params, c[::-1], ln)
            for p, params, c, ln in _transitive_case_21(_reverse_view(has), reversed_cycles)
        ]
        case = "2.2"
    else:
        r, raw = _transitive_case_23(has, cycles)
        traces: dict[int, ConstructionTrace] = {}
        for p, params, c, ln in raw:
            traces.setdefault(ln, ConstructionTrace(p, {**params, "case": "2.3"}, tuple(c), ln))
        delegated = frozenset(range(3, r + 3))
        sub = induced_subsum(g, {base, first})
        host = [v for i in sorted({base, first}) for v in g.summand_vertices(i)]
        for length, trace in pair_certificates(sub).items():
            if length in delegated and length not in traces:
                traces[length] = replace(trace.mapped(host), params={**trace.params, "delegated": True})
        return KnaryConstruction("2.3", dict(sorted(traces.items())), delegated, r)
    traces = {}
    for p, params, c, ln in raw:
        traces.setdefault(ln, ConstructionTrace(p, {**params, "case": case}, tuple(c), ln))
    return KnaryConstruction(case, dict(sorted(traces.items())))


# -- dispatch ------------------------------------------------------------------------


def pair_certificates(g: GenSum) -> dict[int, ConstructionTrace]:
    """Everything the two-summand constructions certify, one trace per length.

    Priority: good-pair merge, ``n + i*d`` cycles, singular-vertex families,
    then forbidden-length propagation for each remaining length.
    """
    _require_pair(g)
    traces: dict[int, ConstructionTrace] = {}
    if not is_strong(g.compiled):
        return traces
    larger = 0 if g.orders[0] >= g.orders[1] else 1
    pairs = find_good_pairs(g, larger, 1 - larger)
    if pairs:
        merged = merge_with_good_pair(g, pairs[0])
        traces.setdefault(merged.length, merged)
        for length, trace in cycles_n_plus_id(g, pairs[0]).items():
            traces.setdefault(length, trace)
    for v in range(g.order):
        if singular_status(g, v, 1 - g.summand_of(v)) is not Singularity.NON:
            for trace in singular_families(g, v):
                traces.setdefault(trace.length, trace)
            break
    for length in range(3, g.order + 1):
        if length in traces:
            continue
        outcome = propagate_forbidden_length(g, length)
        if isinstance(outcome, CycleFound):
            traces[length] = _propagation_trace(outcome)
    return dict(sorted(traces.items()))


@dataclass
class CertificateRun:
    """Constructive certificates for a whole sum, with the case path taken."""

    traces: dict[int, ConstructionTrace]
    cases: list[str] = field(default_factory=list)


def constructive_certificates(g: GenSum) -> CertificateRun:
    """Certify as many lengths as the constructions reach, for any k >= 2.

    Cycles of the summand graph are fused first (each fusion is recorded as
    case ``"1"``); the remaining transitive case is handled explicitly.
    """
    if g.k < 2:
        raise PreconditionError("need at least two summands")
    cases: list[str] = []
    host = list(range(g.order))
    current = g
    while current.k >= 3:
        analysis = collapse_cycle_in_H(current)
        if analysis.case == "cycle":
            cases.append("1")
            current, step = collapse_step(current, analysis)
            host = [host[v] for v in step]
            continue
        knary = knary_case_cycles(current, analysis)
        cases.append(knary.case)
        traces = {ln: t.mapped(host) for ln, t in knary.traces.items()}
        return CertificateRun(traces, cases)
    cases.append("pair")
    traces = {ln: t.mapped(host) for ln, t in pair_certificates(current).items()}
    return CertificateRun(traces, cases)
