"""Structural predicates of generalized sums and forbidden-length propagation.

Two-summand operations name the designated cycles ``x_0 .. x_{n-1}`` (summand
``i``, default 0) and ``y_0 .. y_{m-1}`` (summand ``j``, default 1); positions
are always reduced modulo the cycle length.

Forbidden-length propagation: if the sum has no cycle of length ``l``, the
exterior arcs are forced into periodic patterns.  Every single inference step
below comes with an explicit cycle of length ``l`` that would exist were the
inferred arc reversed, so a failed inference is itself a certificate.
"""

from __future__ import annotations

import enum
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from math import gcd

from .builder import GenSum
from .digraph import Cycle
from .errors import PreconditionError, UnsupportedArityError

Arc = tuple[int, int]


class Singularity(str, enum.Enum):
    IN = "in-singular"
    OUT = "out-singular"
    NON = "non-singular"


def _require_pair(g: GenSum) -> None:
    if g.k != 2:
        raise UnsupportedArityError(f"defined for two summands only, got k={g.k}")


def _check_summand_pair(g: GenSum, i: int, j: int) -> None:
    if i == j or not (0 <= i < g.k and 0 <= j < g.k):
        raise PreconditionError(f"need two distinct summand indices in [0, {g.k - 1}], got {i}, {j}")


def opposite(g: GenSum, v: int) -> int:
    _require_pair(g)
    return 1 - g.summand_of(v)


@dataclass(frozen=True, order=True)
class GoodPair:
    """Arcs ``x_s -> y_r`` and ``y_{r-1} -> x_{s+1}`` between summands ``i`` (x) and ``j`` (y)."""

    i: int
    j: int
    s: int
    r: int

    def arcs(self, g: GenSum) -> tuple[Arc, Arc]:
        return (
            (g.vertex(self.i, self.s), g.vertex(self.j, self.r)),
            (g.vertex(self.j, self.r - 1), g.vertex(self.i, self.s + 1)),
        )

    def is_valid(self, g: GenSum) -> bool:
        return all(g.compiled.has_arc(u, v) for u, v in self.arcs(g))


def find_good_pairs(g: GenSum, i: int = 0, j: int = 1, both_orders: bool = False) -> list[GoodPair]:
    _check_summand_pair(g, i, j)
    found = []
    for a, b in ((i, j), (j, i)) if both_orders else ((i, j),):
        succ = g.compiled.succ
        n, m = g.summands[a].order, g.summands[b].order
        for s in range(n):
            xs, xnext = g.vertex(a, s), g.vertex(a, s + 1)
            for r in range(m):
                if succ[xs] >> g.vertex(b, r) & 1 and succ[g.vertex(b, r - 1)] >> xnext & 1:
                    found.append(GoodPair(a, b, s, r))
    return found


def has_good_pair(g: GenSum, i: int = 0, j: int = 1) -> bool:
    """Existence only; the good-pair relation is symmetric in the two cycles."""
    _check_summand_pair(g, i, j)
    succ = g.compiled.succ
    n, m = g.summands[i].order, g.summands[j].order
    xoff, yoff = g.offsets[i], g.offsets[j]
    for s in range(n):
        out_x = succ[xoff + s]
        xnext_bit = 1 << (xoff + (s + 1) % n)
        for r in range(m):
            if out_x >> (yoff + r) & 1 and succ[yoff + (r - 1) % m] & xnext_bit:
                return True
    return False


@dataclass(frozen=True, order=True)
class GoodCycle:
    """Anti-directed 4-cycle ``v0 -> v1 <- v2 -> v3 <- v0``.

    ``v0 < v2`` are the sources and ``v1 < v3`` the sinks.  ``first`` records
    that ``(v0, v1)`` and ``(v2, v3)`` are both exterior, ``second`` that
    ``(v2, v1)`` and ``(v0, v3)`` are.
    """

    vertices: tuple[int, int, int, int]
    first: bool
    second: bool


def find_good_cycles(g: GenSum) -> list[GoodCycle]:
    if g.k < 2:
        raise PreconditionError("good cycles need at least two summands")
    succ = g.compiled.succ
    owner = [g.summand_of(v) for v in range(g.order)]
    found = []
    for a in range(g.order):
        for c in range(a + 1, g.order):
            common = succ[a] & succ[c] & ~(1 << a | 1 << c)
            sinks = [v for v in range(g.order) if common >> v & 1]
            for t, b in enumerate(sinks):
                for d in sinks[t + 1:]:
                    first = owner[a] != owner[b] and owner[c] != owner[d]
                    second = owner[c] != owner[b] and owner[a] != owner[d]
                    if first or second:
                        found.append(GoodCycle((a, b, c, d), first, second))
    return found


def has_good_cycle(g: GenSum) -> bool:
    """Existence test: exterior ``a -> b`` and ``c -> d`` closed up by ``c -> b`` and ``a -> d``."""
    succ, pred = g.compiled.succ, g.compiled.pred
    exterior_out = [succ[v] & ~g.summand_mask(g.summand_of(v)) for v in range(g.order)]
    for a in range(g.order):
        targets = exterior_out[a]
        while targets:
            low = targets & -targets
            targets ^= low
            b = low.bit_length() - 1
            others = pred[b] & ~(1 << a)
            while others:
                lowc = others & -others
                others ^= lowc
                c = lowc.bit_length() - 1
                if exterior_out[c] & succ[a] & ~low:
                    return True
    return False


def singular_status(g: GenSum, v: int, target: int) -> Singularity:
    if not 0 <= target < g.k:
        raise PreconditionError(f"no summand {target}")
    if g.summand_of(v) == target:
        raise PreconditionError(f"vertex {v} lies inside summand {target}")
    mask = g.summand_mask(target)
    if g.compiled.succ[v] & mask == mask:
        return Singularity.OUT
    if g.compiled.pred[v] & mask == mask:
        return Singularity.IN
    return Singularity.NON


@dataclass(frozen=True)
class DSingularity:
    """Per residue class mod ``d`` of the opposite cycle: ``"out"``, ``"in"`` or ``None``."""

    d: int
    classes: tuple[str | None, ...]

    @property
    def flag(self) -> bool:
        return all(c is not None for c in self.classes)


def _residue_masks(g: GenSum, summand: int, d: int) -> list[int]:
    off, n = g.offsets[summand], g.summands[summand].order
    masks = [0] * d
    for p in range(n):
        masks[p % d] |= 1 << (off + p)
    return masks


def pair_gcd(g: GenSum) -> int:
    _require_pair(g)
    return gcd(*g.orders)


def d_singular(g: GenSum, v: int) -> DSingularity:
    _require_pair(g)
    d = pair_gcd(g)
    succ, pred = g.compiled.succ[v], g.compiled.pred[v]
    classes = []
    for mask in _residue_masks(g, opposite(g, v), d):
        if succ & mask == mask:
            classes.append("out")
        elif pred & mask == mask:
            classes.append("in")
        else:
            classes.append(None)
    return DSingularity(d, tuple(classes))


@dataclass(frozen=True)
class DStarSingularity:
    flag: bool
    window: int | None = None
    direction: str | None = None


def dstar_singular(g: GenSum, v: int) -> DStarSingularity:
    """First cyclic window of ``d`` opposite-cycle positions that ``v`` dominates one way."""
    _require_pair(g)
    d = pair_gcd(g)
    j = opposite(g, v)
    m = g.summands[j].order
    succ, pred = g.compiled.succ[v], g.compiled.pred[v]
    base = (1 << d) - 1
    off = g.offsets[j]
    for start in range(m):
        # d consecutive positions, wrapping around the cycle
        spread = (base << start) | (base >> (m - start)) if start + d > m else base << start
        window = (spread & ((1 << m) - 1)) << off
        if succ & window == window:
            return DStarSingularity(True, start, "out")
        if pred & window == window:
            return DStarSingularity(True, start, "in")
    return DStarSingularity(False)


@dataclass(frozen=True)
class SingularityReport:
    status: tuple[Singularity, ...]
    d: int
    d_singular: tuple[bool, ...]
    dstar_singular: tuple[bool, ...]

    @property
    def singular_vertices(self) -> list[int]:
        return [v for v, s in enumerate(self.status) if s is not Singularity.NON]

    @property
    def has_singular(self) -> bool:
        return any(s is not Singularity.NON for s in self.status)

    @property
    def has_d_nonsingular(self) -> bool:
        return not all(self.d_singular)

    @property
    def has_dstar_singular(self) -> bool:
        return any(self.dstar_singular)


def singularity_report(g: GenSum) -> SingularityReport:
    _require_pair(g)
    vertices = range(g.order)
    return SingularityReport(
        status=tuple(singular_status(g, v, opposite(g, v)) for v in vertices),
        d=pair_gcd(g),
        d_singular=tuple(d_singular(g, v).flag for v in vertices),
        dstar_singular=tuple(dstar_singular(g, v).flag for v in vertices),
    )


def subscript_orbit(t: int, step: int, s: int) -> frozenset[int]:
    """Residues reached from ``s`` by repeated steps of ``step`` modulo ``t``."""
    if t < 1:
        raise PreconditionError("modulus must be positive")
    if step < 1:
        raise PreconditionError("step must be positive")
    g = gcd(t, step)
    return frozenset((s + i * g) % t for i in range(t // g))


# -- forbidden-length propagation -------------------------------------------------


@dataclass(frozen=True)
class CycleFound:
    length: int
    cycle: Cycle
    rule: str
    premise: Arc
    conclusion: Arc


@dataclass(frozen=True)
class Closure:
    length: int
    arcs: frozenset[Arc]
    out_singular: frozenset[int]
    in_singular: frozenset[int]


PropagationOutcome = CycleFound | Closure


class _Family:
    """One rule family: ``P`` is the cycle whose indices the rules shift, ``Q`` the other."""

    def __init__(self, name: str, P: tuple[int, ...], Q: tuple[int, ...], long: bool):
        self.name, self.P, self.Q, self.long = name, P, Q, long
        self._ppos = {v: t for t, v in enumerate(P)}
        self._qpos = {v: t for t, v in enumerate(Q)}

    def derive(self, length: int, arc: Arc) -> list[tuple[str, Arc, list[int]]]:
        """Inferences from ``arc`` as ``(rule, conclusion, cycle if conclusion fails)``."""
        P, Q = self.P, self.Q
        p, q = len(P), len(Q)
        tail, head = arc
        in_p = tail in self._ppos
        a = self._ppos[tail] if in_p else self._ppos[head]
        b = self._qpos[head] if in_p else self._qpos[tail]

        def run(seq: tuple[int, ...], start: int, count: int) -> list[int]:
            size = len(seq)
            return [seq[(start + t) % size] for t in range(count)]

        if self.long:
            h = length - (p + 1)
            if in_p:
                concl = (P[(a + 1) % p], Q[(b + h) % q])
                return [(f"{self.name}:forward", concl, run(P, a + 1, p) + run(Q, b, h + 1))]
            concl = (Q[(b - h) % q], P[(a - 1) % p])
            return [(f"{self.name}:backward", concl, run(P, a, p) + run(Q, b - h, h + 1))]

        step = length - 2
        if in_p:
            return [
                (f"{self.name}:orbit", (P[(a - step) % p], Q[b]), run(P, a - step, step + 1) + [Q[b]]),
                (
                    f"{self.name}:shift",
                    (P[(a - step + 1) % p], Q[(b + 1) % q]),
                    run(P, a - step + 1, step) + [Q[b], Q[(b + 1) % q]],
                ),
            ]
        return [
            (f"{self.name}:orbit", (Q[b], P[(a + step) % p]), run(P, a, step + 1) + [Q[b]]),
            (
                f"{self.name}:shift",
                (Q[(b - 1) % q], P[(a + step - 1) % p]),
                run(P, a, step) + [Q[(b - 1) % q], Q[b]],
            ),
        ]


def _families(g: GenSum, length: int, i: int, j: int) -> list[_Family]:
    x, y = g.cycle(i), g.cycle(j)
    n, m = len(x), len(y)
    families = []
    if length <= n + 1:
        families.append(_Family("short-x", x, y, long=False))
    if length <= m + 1:
        families.append(_Family("short-y", y, x, long=False))
    if length >= n + 2:
        families.append(_Family("long-x", x, y, long=True))
    if length >= m + 2:
        families.append(_Family("long-y", y, x, long=True))
    return families


def cross_arcs(g: GenSum, i: int = 0, j: int = 1) -> list[Arc]:
    """The actual arc of every ``(x_s, y_r)`` pair, ordered by ``(s, r)``."""
    has = g.compiled.has_arc
    arcs = []
    for u in g.cycle(i):
        for v in g.cycle(j):
            arcs.append((u, v) if has(u, v) else (v, u))
    return arcs


def propagate_forbidden_length(
    g: GenSum, length: int, seeds: Iterable[Arc] | None = None, i: int = 0, j: int = 1
) -> PropagationOutcome:
    """Close ``seeds`` under every rule valid for ``length``.

    Returns the first failed inference as a :class:`CycleFound`, or the
    closure when every inferred arc is present.  A closure does not prove
    that no cycle of this length exists.
    """
    _require_pair(g)
    _check_summand_pair(g, i, j)
    n, m = g.summands[i].order, g.summands[j].order
    if not 3 <= length <= n + m:
        raise PreconditionError(f"length must lie in [3, {n + m}], got {length}")
    has = g.compiled.has_arc
    start = cross_arcs(g, i, j) if seeds is None else list(seeds)
    for u, v in start:
        if not has(u, v) or not g.is_exterior(u, v):
            raise PreconditionError(f"seed ({u}, {v}) is not an exterior arc of the sum")
    families = _families(g, length, i, j)
    closure = dict.fromkeys(start)
    queue = deque(closure)
    while queue:
        arc = queue.popleft()
        for fam in families:
            for rule, concl, cycle in fam.derive(length, arc):
                if concl in closure:
                    continue
                if not has(*concl):
                    return CycleFound(length, tuple(cycle), rule, arc, concl)
                closure[concl] = None
                queue.append(concl)
    arcs = frozenset(closure)
    out_singular, in_singular = set(), set()
    for a, b in ((i, j), (j, i)):
        for v in g.cycle(a):
            if all((v, w) in arcs for w in g.cycle(b)):
                out_singular.add(v)
            elif all((w, v) in arcs for w in g.cycle(b)):
                in_singular.add(v)
    return Closure(length, arcs, frozenset(out_singular), frozenset(in_singular))
