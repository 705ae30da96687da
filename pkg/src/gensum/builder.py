"""Generalized sums of Hamiltonian digraphs.

A generalized sum joins k vertex-disjoint summands so that every pair of
vertices from different summands is joined by exactly one arc.  The choice
of directions is an :class:`OrientationMap`: one bit per cross pair, in the
canonical order given by :func:`cross_pairs`.  Bit ``b`` of the orientation
integer describes the ``b``-th pair ``(u, v)`` with ``u`` in the lower
summand; a zero bit means ``u -> v`` and a one bit means ``v -> u``.

Compiled vertex ids are contiguous by summand, and within a summand they
follow the designated Hamiltonian cycle: position ``p`` of summand ``i`` is
vertex ``offsets[i] + p``.
"""

from __future__ import annotations

import os
import random
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from functools import cached_property

from .digraph import Digraph, find_hamiltonian_cycle
from .errors import (
    InvalidSummandError,
    MalformedOrientationError,
    NotStrongError,
    PreconditionError,
    TooLargeError,
)

DEFAULT_ENUM_CAP = 30
SEED_MASK = (1 << 64) - 1


def enumeration_cap() -> int:
    """Bit cap for exhaustive enumeration; ``GSL_ENUM_CAP`` overrides the default."""
    raw = os.environ.get("GSL_ENUM_CAP")
    return int(raw) if raw else DEFAULT_ENUM_CAP


@dataclass(frozen=True)
class SummandSpec:
    """A summand digraph and the vertex order of its designated Hamiltonian cycle."""

    digraph: Digraph
    ham_order: tuple[int, ...]

    def __post_init__(self) -> None:
        n = self.digraph.order
        if n < 2:
            raise InvalidSummandError("summands need at least two vertices")
        if sorted(self.ham_order) != list(range(n)):
            raise InvalidSummandError("ham_order must be a permutation of the summand's vertices")
        for p in range(n):
            u, v = self.ham_order[p], self.ham_order[(p + 1) % n]
            if not self.digraph.has_arc(u, v):
                raise InvalidSummandError(f"designated cycle uses missing arc ({u}, {v})")

    @classmethod
    def cycle(cls, n: int) -> SummandSpec:
        """The bare directed cycle C_n, the smallest Hamiltonian digraph of order n."""
        if n < 2:
            raise InvalidSummandError("summands need at least two vertices")
        return cls(Digraph.directed_cycle(n), tuple(range(n)))

    @classmethod
    def with_extra_arcs(cls, n: int, extra_arcs: Iterable[tuple[int, int]]) -> SummandSpec:
        """C_n on positions ``0..n-1`` plus the given arcs."""
        if n < 2:
            raise InvalidSummandError("summands need at least two vertices")
        arcs = {(p, (p + 1) % n) for p in range(n)}
        for a, b in extra_arcs:
            if a == b or not (0 <= a < n and 0 <= b < n):
                raise InvalidSummandError(f"bad extra arc ({a}, {b}) for a summand of order {n}")
            arcs.add((a, b))
        return cls(Digraph.from_arcs(n, sorted(arcs)), tuple(range(n)))

    @property
    def order(self) -> int:
        return self.digraph.order

    @cached_property
    def positional(self) -> Digraph:
        """The summand relabelled so the designated cycle is ``0 -> 1 -> ... -> 0``."""
        position = [0] * self.order
        for p, v in enumerate(self.ham_order):
            position[v] = p
        return self.digraph.relabel(position)

    def extra_arcs(self) -> list[tuple[int, int]]:
        """Arcs beyond the designated cycle, in positional labels."""
        n = self.order
        return [(a, b) for a, b in self.positional.arcs() if b != (a + 1) % n]

    def is_bare_cycle(self) -> bool:
        return not self.extra_arcs()


def bit_count(orders: Sequence[int]) -> int:
    total = 0
    for i, n in enumerate(orders):
        for m in orders[i + 1:]:
            total += n * m
    return total


def cross_pairs(orders: Sequence[int]) -> list[tuple[int, int, int, int]]:
    """Every cross pair ``(i, j, p, q)`` with ``i < j``, in canonical bit order."""
    return [
        (i, j, p, q)
        for i in range(len(orders))
        for j in range(i + 1, len(orders))
        for p in range(orders[i])
        for q in range(orders[j])
    ]


def _offsets(orders: Sequence[int]) -> tuple[int, ...]:
    offsets, total = [], 0
    for n in orders:
        offsets.append(total)
        total += n
    return tuple(offsets)


@dataclass(frozen=True)
class OrientationMap:
    value: int
    bit_count: int

    def __post_init__(self) -> None:
        if self.bit_count < 0 or not 0 <= self.value < (1 << self.bit_count):
            raise MalformedOrientationError(
                f"orientation value {self.value:#x} does not fit in {self.bit_count} bits"
            )

    def bit(self, index: int) -> int:
        return self.value >> index & 1

    def bits(self) -> list[int]:
        return [self.value >> b & 1 for b in range(self.bit_count)]

    def hex(self) -> str:
        return format(self.value, "#x")

    @classmethod
    def from_hex(cls, text: str, bit_count: int) -> OrientationMap:
        try:
            value = int(text, 16)
        except ValueError as exc:
            raise MalformedOrientationError(f"not a hex string: {text!r}") from exc
        return cls(value, bit_count)

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> OrientationMap:
        value = 0
        for b, bit in enumerate(bits):
            if bit not in (0, 1):
                raise MalformedOrientationError("orientation bits must be 0 or 1")
            value |= bit << b
        return cls(value, len(bits))


class OrientationSpace:
    """All generalized sums over a fixed summand list, compiled quickly by integer id."""

    def __init__(self, summands: Sequence[SummandSpec]):
        if not summands:
            raise PreconditionError("a generalized sum needs at least one summand")
        self.summands = tuple(summands)
        self.orders = tuple(s.order for s in self.summands)
        self.offsets = _offsets(self.orders)
        self.order = sum(self.orders)
        self.bit_count = bit_count(self.orders)
        base = [0] * self.order
        for off, summand in zip(self.offsets, self.summands):
            for a, b in summand.positional.arcs():
                base[off + a] |= 1 << (off + b)
        self._base = tuple(base)
        self.pairs = tuple(
            (self.offsets[i] + p, self.offsets[j] + q) for i, j, p, q in cross_pairs(self.orders)
        )

    def compile(self, value: int) -> Digraph:
        succ = list(self._base)
        for u, v in self.pairs:
            if value & 1:
                succ[v] |= 1 << u
            else:
                succ[u] |= 1 << v
            value >>= 1
        return Digraph(self.order, tuple(succ))

    def build(self, orientation: OrientationMap | int) -> GenSum:
        if isinstance(orientation, int):
            orientation = OrientationMap(orientation, self.bit_count)
        if orientation.bit_count != self.bit_count:
            raise MalformedOrientationError(
                f"expected {self.bit_count} orientation bits, got {orientation.bit_count}"
            )
        return GenSum(self.summands, orientation, self.compile(orientation.value), self.offsets)


@dataclass(frozen=True)
class GenSum:
    summands: tuple[SummandSpec, ...]
    orientation: OrientationMap
    compiled: Digraph
    offsets: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.summands)

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(s.order for s in self.summands)

    @property
    def order(self) -> int:
        return self.compiled.order

    def vertex(self, summand: int, position: int) -> int:
        return self.offsets[summand] + position % self.summands[summand].order

    def label(self, v: int) -> tuple[int, int]:
        """``(summand index, cycle position)`` of compiled vertex ``v``."""
        i = self.summand_of(v)
        return i, v - self.offsets[i]

    @cached_property
    def _owner(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.summands) for _ in range(s.order))

    def summand_of(self, v: int) -> int:
        if not 0 <= v < self.order:
            raise PreconditionError(f"vertex {v} is outside the generalized sum")
        return self._owner[v]

    def summand_vertices(self, i: int) -> range:
        return range(self.offsets[i], self.offsets[i] + self.summands[i].order)

    def summand_mask(self, i: int) -> int:
        return ((1 << self.summands[i].order) - 1) << self.offsets[i]

    def cycle(self, i: int) -> tuple[int, ...]:
        """The designated Hamiltonian cycle of summand ``i`` in compiled ids."""
        return tuple(self.summand_vertices(i))

    def is_exterior(self, u: int, v: int) -> bool:
        return self.summand_of(u) != self.summand_of(v)

    def exterior_arcs(self) -> list[tuple[int, int]]:
        return [(u, v) for u, v in self.compiled.arcs() if self.is_exterior(u, v)]

    def instance_id(self) -> dict:
        """The full reproduction key of this instance."""
        return {
            "orders": list(self.orders),
            "orientation_bits": self.orientation.hex(),
            "extra_arcs": [[list(a) for a in s.extra_arcs()] for s in self.summands],
        }


def build(summands: Sequence[SummandSpec], orientation: OrientationMap | int) -> GenSum:
    return OrientationSpace(summands).build(orientation)


def cycles(*orders: int) -> list[SummandSpec]:
    """Bare directed cycles of the given orders."""
    return [SummandSpec.cycle(n) for n in orders]


def enumerate_orientations(
    summands: Sequence[SummandSpec],
    offset: int = 0,
    limit: int | None = None,
    cap: int | None = None,
) -> Iterator[OrientationMap]:
    """Every orientation in ascending integer order, optionally resuming at ``offset``."""
    bits = bit_count([s.order for s in summands])
    cap = enumeration_cap() if cap is None else cap
    if bits > cap:
        raise TooLargeError(
            f"{bits} orientation bits exceed the enumeration cap of {cap}; use sampling instead"
        )
    stop = 1 << bits
    if limit is not None:
        stop = min(stop, offset + limit)
    for value in range(offset, stop):
        yield OrientationMap(value, bits)


def sample_orientation(summands: Sequence[SummandSpec], seed: int) -> OrientationMap:
    """Uniform orientation drawn from Python's MT19937 seeded with the 64-bit ``seed``.

    All bits come from a single ``getrandbits`` call, so the map depends only on
    the seed and the bit count.
    """
    bits = bit_count([s.order for s in summands])
    rng = random.Random(seed & SEED_MASK)
    return OrientationMap(rng.getrandbits(bits) if bits else 0, bits)


def orientation_from_host(
    summands: Sequence[SummandSpec], host: Digraph, host_vertex: Sequence[int]
) -> OrientationMap:
    """Read the orientation of ``summands`` off ``host``.

    ``host_vertex[v]`` is the host id of compiled vertex ``v`` of the sum being
    described.
    """
    orders = [s.order for s in summands]
    offsets = _offsets(orders)
    value = 0
    for b, (i, j, p, q) in enumerate(cross_pairs(orders)):
        u, v = host_vertex[offsets[i] + p], host_vertex[offsets[j] + q]
        forward, backward = host.has_arc(u, v), host.has_arc(v, u)
        if forward == backward:
            raise MalformedOrientationError(f"host pair ({u}, {v}) is not joined by exactly one arc")
        value |= backward << b
    return OrientationMap(value, bit_count(orders))


def induced_subsum(g: GenSum, indices: Iterable[int]) -> GenSum:
    """The generalized sum induced on the listed summands, kept in ascending order."""
    chosen = sorted(set(indices))
    if not chosen:
        raise PreconditionError("induced_subsum needs at least one summand")
    if chosen[0] < 0 or chosen[-1] >= g.k:
        raise PreconditionError(f"summand indices must lie in [0, {g.k - 1}]")
    summands = [g.summands[i] for i in chosen]
    host_vertex = [v for i in chosen for v in g.summand_vertices(i)]
    return build(summands, orientation_from_host(summands, g.compiled, host_vertex))


def permute_summands(g: GenSum, perm: Sequence[int]) -> tuple[GenSum, tuple[int, ...]]:
    """Reorder summands so new summand ``t`` is old summand ``perm[t]``.

    Returns the new sum and the isomorphism ``iso`` with ``iso[old] = new``.
    """
    if sorted(perm) != list(range(g.k)):
        raise PreconditionError(f"{list(perm)} is not a permutation of {g.k} summands")
    summands = [g.summands[i] for i in perm]
    host_vertex = [v for i in perm for v in g.summand_vertices(i)]
    permuted = build(summands, orientation_from_host(summands, g.compiled, host_vertex))
    iso = [0] * g.order
    for new, old in enumerate(host_vertex):
        iso[old] = new
    return permuted, tuple(iso)


def fuse_summands(g: GenSum, group: Iterable[int]) -> tuple[GenSum, tuple[int, ...]]:
    """Merge the summands in ``group`` into a single Hamiltonian summand.

    The fused summand takes the place of the lowest index in ``group``.  Its
    designated cycle is found by exhaustive search, so the induced sub-sum
    must be Hamiltonian.  Returns the reduced sum and ``host_vertex`` with
    ``host_vertex[new] = old``.
    """
    members = sorted(set(group))
    if len(members) < 2:
        raise PreconditionError("fusing needs at least two summands")
    vertices = [v for i in members for v in g.summand_vertices(i)]
    block = g.compiled.induced(vertices)
    ham = find_hamiltonian_cycle(block)
    if ham is None:
        raise NotStrongError(f"summands {members} do not induce a Hamiltonian sub-sum")
    fused = SummandSpec(block, ham)
    summands: list[SummandSpec] = []
    host_vertex: list[int] = []
    for i in range(g.k):
        if i == members[0]:
            summands.append(fused)
            host_vertex.extend(vertices[p] for p in ham)
        elif i not in members:
            summands.append(g.summands[i])
            host_vertex.extend(g.summand_vertices(i))
    reduced = build(summands, orientation_from_host(summands, g.compiled, host_vertex))
    return reduced, tuple(host_vertex)
