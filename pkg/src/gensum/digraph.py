"""Bitset digraphs, strong connectivity and exhaustive cycle oracles.

Vertices are the integers ``0 .. order-1``.  Row ``v`` of ``succ`` is an
integer whose bit ``w`` is set when the arc ``v -> w`` is present, so arc
queries, neighbourhood intersections and copies are all cheap.

The cycle searches here are deliberately brute force: every theorem-level
claim made elsewhere in the package is checked against them.  A cycle is a
tuple of distinct vertices with an implied closing arc from the last vertex
back to the first.  Searches run in ascending vertex order, so the witness
returned for a given question is always the lexicographically smallest one.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field

from .errors import PreconditionError

ORDER_CAP = 64

Cycle = tuple[int, ...]


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class Digraph:
    order: int
    succ: tuple[int, ...]
    pred: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not 0 <= self.order <= ORDER_CAP:
            raise PreconditionError(f"order must lie in [0, {ORDER_CAP}], got {self.order}")
        if len(self.succ) != self.order:
            raise PreconditionError("succ must have one row per vertex")
        limit = 1 << self.order
        pred = [0] * self.order
        for v, row in enumerate(self.succ):
            if row < 0 or row >= limit:
                raise PreconditionError(f"row {v} names a vertex outside the digraph")
            if row >> v & 1:
                raise PreconditionError(f"self-loop at vertex {v}")
            for w in iter_bits(row):
                pred[w] |= 1 << v
        object.__setattr__(self, "pred", tuple(pred))

    @classmethod
    def from_arcs(cls, order: int, arcs: Iterable[tuple[int, int]]) -> Digraph:
        succ = [0] * order
        for u, v in arcs:
            if not (0 <= u < order and 0 <= v < order):
                raise PreconditionError(f"arc ({u}, {v}) leaves the vertex range")
            succ[u] |= 1 << v
        return cls(order, tuple(succ))

    @classmethod
    def directed_cycle(cls, n: int) -> Digraph:
        return cls.from_arcs(n, ((i, (i + 1) % n) for i in range(n)))

    @classmethod
    def directed_path(cls, n: int) -> Digraph:
        return cls.from_arcs(n, ((i, i + 1) for i in range(n - 1)))

    @classmethod
    def complete(cls, n: int) -> Digraph:
        full = (1 << n) - 1
        return cls(n, tuple(full & ~(1 << v) for v in range(n)))

    def has_arc(self, u: int, v: int) -> bool:
        return bool(self.succ[u] >> v & 1)

    def arcs(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.order) for v in iter_bits(self.succ[u])]

    @property
    def arc_count(self) -> int:
        return sum(row.bit_count() for row in self.succ)

    def out_neighbors(self, v: int) -> list[int]:
        return list(iter_bits(self.succ[v]))

    def in_neighbors(self, v: int) -> list[int]:
        return list(iter_bits(self.pred[v]))

    def reverse(self) -> Digraph:
        return Digraph(self.order, self.pred)

    def induced(self, vertices: Sequence[int]) -> Digraph:
        """Induced subdigraph; vertex ``vertices[i]`` becomes ``i``."""
        index = {v: i for i, v in enumerate(vertices)}
        if len(index) != len(vertices):
            raise PreconditionError("induced() needs distinct vertices")
        arcs = [
            (index[u], index[v])
            for u in vertices
            for v in iter_bits(self.succ[u])
            if v in index
        ]
        return Digraph.from_arcs(len(vertices), arcs)

    def relabel(self, mapping: Sequence[int]) -> Digraph:
        """Rename vertex ``v`` to ``mapping[v]``; ``mapping`` must be a permutation."""
        if sorted(mapping) != list(range(self.order)):
            raise PreconditionError("relabel() needs a permutation of the vertices")
        return Digraph.from_arcs(self.order, ((mapping[u], mapping[v]) for u, v in self.arcs()))


def strongly_connected_components(d: Digraph) -> list[frozenset[int]]:
    """Tarjan's algorithm, iterative so deep digraphs cannot hit the recursion limit.

    Components come out in reverse topological order of the condensation.
    """
    index: dict[int, int] = {}
    lowlink: dict[int, int] = {}
    on_stack = [False] * d.order
    stack: list[int] = []
    components: list[frozenset[int]] = []
    counter = 0

    for root in range(d.order):
        if root in index:
            continue
        work: list[tuple[int, Iterator[int]]] = [(root, iter_bits(d.succ[root]))]
        index[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, children = work[-1]
            for w in children:
                if w not in index:
                    index[w] = lowlink[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter_bits(d.succ[w])))
                    break
                if on_stack[w]:
                    lowlink[v] = min(lowlink[v], index[w])
            else:
                work.pop()
                if work:
                    parent = work[-1][0]
                    lowlink[parent] = min(lowlink[parent], lowlink[v])
                if lowlink[v] == index[v]:
                    members = []
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        members.append(w)
                        if w == v:
                            break
                    components.append(frozenset(members))
    return components


def is_strong(d: Digraph) -> bool:
    if d.order < 1:
        raise PreconditionError("is_strong needs at least one vertex")
    # digraphs are immutable, so the answer is memoised on the instance
    cached = d.__dict__.get("_strong")
    if cached is None:
        cached = len(strongly_connected_components(d)) == 1
        d.__dict__["_strong"] = cached
    return cached


def validate_cycle(d: Digraph, cycle: Sequence[int]) -> bool:
    """True iff ``cycle`` lists distinct vertices joined by arcs of ``d``, closing arc included."""
    n = len(cycle)
    if n < 2 or len(set(cycle)) != n:
        return False
    if any(not (0 <= v < d.order) for v in cycle):
        return False
    return all(d.succ[cycle[i]] >> cycle[(i + 1) % n] & 1 for i in range(n))


@dataclass(frozen=True)
class Spectrum:
    """Cycle lengths found in ``[min_len, max_len]``, with one witness each."""

    min_len: int
    max_len: int
    witnesses: Mapping[int, Cycle]

    @property
    def lengths(self) -> frozenset[int]:
        return frozenset(self.witnesses)

    @property
    def missing(self) -> frozenset[int]:
        return frozenset(range(self.min_len, self.max_len + 1)) - self.lengths

    def __contains__(self, length: object) -> bool:
        return length in self.witnesses


def _check_length_range(d: Digraph, min_len: int, max_len: int) -> None:
    if not 2 <= min_len <= max_len <= d.order:
        raise PreconditionError(
            f"need 2 <= min_len <= max_len <= order, got [{min_len}, {max_len}] for order {d.order}"
        )


def cycle_spectrum(d: Digraph, min_len: int, max_len: int) -> Spectrum:
    """Exhaustive spectrum: for each length, the lex-smallest cycle whose least vertex comes first."""
    _check_length_range(d, min_len, max_len)
    succ = d.succ
    full = (1 << d.order) - 1
    wanted = set(range(min_len, max_len + 1))
    witnesses: dict[int, Cycle] = {}
    path: list[int] = []

    def extend(v: int, visited: int, allowed: int, start: int) -> bool:
        length = len(path)
        if length in wanted and succ[v] >> start & 1:
            witnesses[length] = tuple(path)
            wanted.discard(length)
            if not wanted:
                return True
        if length >= max(wanted):
            return False
        cand = succ[v] & allowed & ~visited
        while cand:
            low = cand & -cand
            cand ^= low
            path.append(low.bit_length() - 1)
            if extend(path[-1], visited | low, allowed, start):
                return True
            path.pop()
        return False

    for start in range(d.order):
        allowed = full & ~((2 << start) - 1)
        if allowed.bit_count() + 1 < min(wanted):
            break
        path[:] = [start]
        if extend(start, 1 << start, allowed, start):
            break
    return Spectrum(min_len, max_len, dict(sorted(witnesses.items())))


def lengths_through_vertex(d: Digraph, v: int, lengths: Iterable[int]) -> frozenset[int]:
    """The subset of ``lengths`` realised by some cycle through ``v``."""
    succ = d.succ
    wanted = set(lengths)
    found: set[int] = set()
    if not wanted:
        return frozenset()

    def extend(u: int, visited: int, length: int) -> bool:
        if length in wanted and succ[u] >> v & 1:
            found.add(length)
            wanted.discard(length)
            if not wanted:
                return True
        if length >= max(wanted):
            return False
        cand = succ[u] & ~visited
        while cand:
            low = cand & -cand
            cand ^= low
            if extend(low.bit_length() - 1, visited | low, length + 1):
                return True
        return False

    extend(v, 1 << v, 1)
    return frozenset(found)


def cycle_through_vertex(d: Digraph, v: int, length: int) -> Cycle | None:
    if not 0 <= v < d.order:
        raise PreconditionError(f"vertex {v} is outside the digraph")
    _check_length_range(d, length, length)
    succ = d.succ
    path = [v]

    def extend(u: int, visited: int) -> bool:
        if len(path) == length:
            return bool(succ[u] >> v & 1)
        cand = succ[u] & ~visited
        while cand:
            low = cand & -cand
            cand ^= low
            path.append(low.bit_length() - 1)
            if extend(path[-1], visited | low):
                return True
            path.pop()
        return False

    return tuple(path) if extend(v, 1 << v) else None


def is_pancyclic(d: Digraph) -> tuple[bool, frozenset[int]]:
    if d.order < 3:
        raise PreconditionError("pancyclicity needs order >= 3")
    missing = cycle_spectrum(d, 3, d.order).missing
    return not missing, missing


def is_vertex_pancyclic(d: Digraph) -> tuple[bool, frozenset[tuple[int, int]]]:
    if d.order < 3:
        raise PreconditionError("vertex-pancyclicity needs order >= 3")
    everything = range(3, d.order + 1)
    omissions = frozenset(
        (v, length)
        for v in range(d.order)
        for length in set(everything) - lengths_through_vertex(d, v, everything)
    )
    return not omissions, omissions


def find_hamiltonian_cycle(d: Digraph) -> Cycle | None:
    if d.order < 2:
        raise PreconditionError("a Hamiltonian cycle needs at least two vertices")
    return cycle_through_vertex(d, 0, d.order)


@dataclass(frozen=True)
class Cover:
    """Per cycle length, the union of the vertex sets of all cycles of that length."""

    order: int
    masks: Mapping[int, int]
    witnesses: Mapping[int, Cycle]

    @property
    def spectrum(self) -> Spectrum:
        return Spectrum(3, self.order, self.witnesses)

    @property
    def vertex_pancyclic(self) -> bool:
        full = (1 << self.order) - 1
        return all(self.masks.get(length, 0) == full for length in range(3, self.order + 1))

    @property
    def omissions(self) -> frozenset[tuple[int, int]]:
        full = (1 << self.order) - 1
        return frozenset(
            (v, length)
            for length in range(3, self.order + 1)
            for v in iter_bits(full & ~self.masks.get(length, 0))
        )


def cycle_cover(d: Digraph) -> Cover:
    """Enumerate every cycle of length >= 3 once and record which vertices each length reaches.

    Stops as soon as every length covers every vertex.  Witnesses are the
    lex-smallest cycles, as in :func:`cycle_spectrum`.
    """
    n = d.order
    if n < 3:
        raise PreconditionError("cycle cover needs order >= 3")
    succ = d.succ
    full = (1 << n) - 1
    masks = [0] * (n + 1)
    witnesses: dict[int, Cycle] = {}
    path: list[int] = []
    incomplete = set(range(3, n + 1))

    def extend(v: int, visited: int, allowed: int, start: int) -> bool:
        length = len(path)
        if length >= 3 and succ[v] >> start & 1:
            if length not in witnesses:
                witnesses[length] = tuple(path)
            masks[length] |= visited
            if masks[length] == full:
                incomplete.discard(length)
                if not incomplete:
                    return True
        cand = succ[v] & allowed & ~visited
        while cand:
            low = cand & -cand
            cand ^= low
            path.append(low.bit_length() - 1)
            if extend(path[-1], visited | low, allowed, start):
                return True
            path.pop()
        return False

    for start in range(n - 2):
        path[:] = [start]
        if extend(start, 1 << start, full & ~((2 << start) - 1), start):
            break
    return Cover(
        n,
        {length: masks[length] for length in range(3, n + 1) if masks[length]},
        dict(sorted(witnesses.items())),
    )
