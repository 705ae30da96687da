import json

import pytest

from gensum.builder import SummandSpec, build, cycles, sample_orientation
from gensum.errors import MalformedOrientationError
from gensum.serialize import (
    FormatError,
    arc_list,
    dumps_gensum,
    gensum_to_dict,
    load_gensum,
    loads_gensum,
    parse_arc_list,
    save_gensum,
    to_dot,
)

from conftest import GOLDEN


def test_json_round_trip(figure2, tmp_path):
    path = tmp_path / "g.json"
    save_gensum(figure2, path)
    again = load_gensum(path)
    assert again.compiled == figure2.compiled
    assert gensum_to_dict(again) == gensum_to_dict(figure2)


def test_golden_fixture_file(figure2):
    assert load_gensum(GOLDEN / "figure2.json").compiled == figure2.compiled


def test_round_trip_with_extra_arcs():
    summands = [SummandSpec.with_extra_arcs(4, [(0, 2), (3, 1)]), SummandSpec.cycle(3)]
    g = build(summands, sample_orientation(summands, 9))
    again = loads_gensum(dumps_gensum(g))
    assert again.compiled == g.compiled


def test_bit_count_mismatch_rejected(figure2):
    data = gensum_to_dict(figure2)
    data["bit_count"] = 11
    with pytest.raises(MalformedOrientationError):
        loads_gensum(json.dumps(data))


def test_bad_json_rejected():
    with pytest.raises(FormatError):
        loads_gensum("{")
    with pytest.raises(FormatError):
        loads_gensum('{"summands": []}')


def test_arc_list_round_trip(figure2):
    text = arc_list(figure2.compiled)
    assert text.splitlines()[0] == "7 19"
    assert parse_arc_list(text) == figure2.compiled
    with pytest.raises(FormatError):
        parse_arc_list("3 2\n0 1\n")


def _styles(dot: str) -> dict[str, int]:
    counts = {"solid": 0, "dotted": 0, "dashed": 0}
    for line in dot.splitlines():
        for style in counts:
            if f"style={style}" in line:
                counts[style] += 1
    return counts


def test_dot_counts(figure2):
    dot = to_dot(figure2)
    assert dot.count("subgraph cluster_") == 2
    assert _styles(dot) == {"solid": 7, "dotted": 0, "dashed": 12}
    bare = to_dot(build(cycles(3, 3), 0))
    assert _styles(bare) == {"solid": 6, "dotted": 0, "dashed": 9}


def test_dot_highlight(figure2):
    cycle = [0, 4, 5, 6, 1, 2, 3]
    dot = to_dot(figure2, cycle)
    red = {line.split("[")[0].strip() for line in dot.splitlines() if "color=red" in line}
    names = [f"d{figure2.label(v)[0] + 1}_{figure2.label(v)[1]}" for v in cycle]
    expected = {f"{names[t]} -> {names[(t + 1) % 7]}" for t in range(7)}
    assert red == expected
