"""File formats: GenSum JSON, DOT and flat arc lists."""

from __future__ import annotations

import json
from collections.abc import Sequence
from pathlib import Path

from .builder import GenSum, OrientationMap, SummandSpec, bit_count, build
from .digraph import Digraph
from .errors import GensumError, MalformedOrientationError


class FormatError(GensumError, ValueError):
    """A file does not follow the expected schema."""


def gensum_to_dict(g: GenSum) -> dict:
    return {
        "summands": [
            {"order": s.order, "extra_arcs": [list(a) for a in s.extra_arcs()]} for s in g.summands
        ],
        "orientation_bits": g.orientation.hex(),
        "bit_count": g.orientation.bit_count,
    }


def summands_from_dicts(entries: Sequence[dict]) -> list[SummandSpec]:
    summands = []
    for entry in entries:
        try:
            order = int(entry["order"])
            extra = [(int(a), int(b)) for a, b in entry.get("extra_arcs", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad summand entry {entry!r}") from exc
        summands.append(SummandSpec.with_extra_arcs(order, extra))
    return summands


def gensum_from_dict(data: dict) -> GenSum:
    try:
        summands = summands_from_dicts(data["summands"])
        bits_text = data["orientation_bits"]
        declared = int(data["bit_count"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError("GenSum JSON needs summands, orientation_bits and bit_count") from exc
    expected = bit_count([s.order for s in summands])
    if declared != expected:
        raise MalformedOrientationError(
            f"bit_count {declared} does not match the {expected} cross pairs of the summands"
        )
    return build(summands, OrientationMap.from_hex(bits_text, declared))


def dumps_gensum(g: GenSum) -> str:
    return json.dumps(gensum_to_dict(g), indent=2) + "\n"


def loads_gensum(text: str) -> GenSum:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    return gensum_from_dict(data)


def load_gensum(path: str | Path) -> GenSum:
    return loads_gensum(Path(path).read_text())


def save_gensum(g: GenSum, path: str | Path) -> None:
    Path(path).write_text(dumps_gensum(g))


def arc_list(d: Digraph) -> str:
    """``"n m"`` header followed by one ``"u v"`` line per arc."""
    arcs = d.arcs()
    lines = [f"{d.order} {len(arcs)}"] + [f"{u} {v}" for u, v in arcs]
    return "\n".join(lines) + "\n"


def parse_arc_list(text: str) -> Digraph:
    rows = [line.split() for line in text.splitlines() if line.strip()]
    try:
        n, m = map(int, rows[0])
        arcs = [(int(u), int(v)) for u, v in rows[1:]]
    except (IndexError, ValueError) as exc:
        raise FormatError("arc list must be 'n m' followed by 'u v' lines") from exc
    if len(arcs) != m:
        raise FormatError(f"header announces {m} arcs but {len(arcs)} follow")
    return Digraph.from_arcs(n, arcs)


def vertex_name(g: GenSum, v: int) -> str:
    i, p = g.label(v)
    return f"d{i + 1}_{p}"


def to_dot(g: GenSum, highlight: Sequence[int] | None = None) -> str:
    """DOT text: one cluster per summand, cycle arcs solid, extra summand arcs
    dotted, exterior arcs dashed.  ``highlight`` marks the arcs of a cycle."""
    marked = set()
    if highlight:
        marked = {(highlight[t], highlight[(t + 1) % len(highlight)]) for t in range(len(highlight))}
    lines = ["digraph gensum {", "  node [shape=circle];"]
    for i in range(g.k):
        lines.append(f"  subgraph cluster_{i + 1} {{")
        lines.append(f'    label="D{i + 1}";')
        for v in g.summand_vertices(i):
            lines.append(f'    {vertex_name(g, v)} [label="{i + 1}.{v - g.offsets[i]}"];')
        lines.append("  }")
    for u, v in g.compiled.arcs():
        (i, p), (j, q) = g.label(u), g.label(v)
        if i != j:
            style = "dashed"
        elif q == (p + 1) % g.summands[i].order:
            style = "solid"
        else:
            style = "dotted"
        attrs = f"style={style}"
        if (u, v) in marked:
            attrs += ", color=red, penwidth=2"
        lines.append(f"  {vertex_name(g, u)} -> {vertex_name(g, v)} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
