import random
from math import gcd

import pytest

from gensum.builder import OrientationSpace, build, cross_pairs, cycles, sample_orientation
from gensum.constructive import (
    ConstructionTrace,
    collapse_cycle_in_H,
    collapse_step,
    constructive_certificates,
    cycles_from_singular,
    cycles_n_plus_id,
    knary_case_cycles,
    merge_with_good_pair,
    pair_certificates,
    singular_families,
    summand_graph,
)
from gensum.digraph import cycle_spectrum, find_hamiltonian_cycle, is_strong, validate_cycle
from gensum.errors import NotStrongError, PreconditionError, WrongCaseError
from gensum.structure import GoodPair, Singularity, find_good_pairs, singular_status


def orientation_with(orders, backward):
    """Orientation whose only reversed (higher -> lower summand) pairs are ``backward``."""
    pairs = cross_pairs(orders)
    return sum(1 << pairs.index(p) for p in backward)


def summand_order_orientation(orders, relation):
    """Every pair between summands a < b points a -> b unless ``relation[(a, b)]`` is "back",
    or mixes directions when it is "mixed" (first pair reversed, rest forward)."""
    value = 0
    for b, (i, j, p, q) in enumerate(cross_pairs(orders)):
        kind = relation.get((i, j), "forward")
        if kind == "back" or (kind == "mixed" and p == 0 and q == 0):
            value |= 1 << b
    return value


def test_merge_two_three_cycles():
    orders = (3, 3)
    g = build(cycles(*orders), orientation_with(orders, [(0, 1, 1, 0)]))  # y0 -> x1
    trace = merge_with_good_pair(g, GoodPair(0, 1, 0, 1))
    assert trace.cycle == (0, 4, 5, 3, 1, 2)
    assert trace.is_valid(g) and trace.length == 6


def test_merge_figure2(figure2):
    trace = merge_with_good_pair(figure2, GoodPair(0, 1, 0, 0))
    assert trace.cycle == (0, 4, 5, 6, 1, 2, 3)
    assert set(trace.cycle) == set(range(7))
    assert trace.is_valid(figure2)


def test_merge_rejects_invalid_pair(figure2):
    with pytest.raises(PreconditionError):
        merge_with_good_pair(figure2, GoodPair(0, 1, 2, 0))


def test_merge_with_digon_summand():
    orders = (4, 2)
    space = OrientationSpace(cycles(*orders))
    for value in range(1 << 8):
        g = space.build(value)
        pairs = find_good_pairs(g)
        if pairs:
            trace = merge_with_good_pair(g, pairs[0])
            assert trace.length == 6 and trace.is_valid(g)
            return
    pytest.fail("no good pair found")


def test_singular_figure2(figure2):
    families = singular_families(figure2, 0)
    alpha = {t.length for t in families if t.pattern == "alpha"}
    beta = {t.length for t in families if t.pattern == "beta"}
    assert alpha == {3, 4, 5} and beta == {5, 6, 7}
    assert all(t.is_valid(figure2) for t in families)
    assert set(cycles_from_singular(figure2, 0)) == {3, 4, 5, 6, 7}


def test_in_singular_mirror(figure2):
    traces = cycles_from_singular(figure2, 2)
    assert set(traces) == {3, 4, 5, 6, 7}
    assert all(t.is_valid(figure2) and t.params["direction"] == "in" for t in traces.values())


def test_singular_requires_singular_vertex(figure2):
    with pytest.raises(PreconditionError):
        cycles_from_singular(figure2, 1)


def test_singular_three_three():
    space = OrientationSpace(cycles(3, 3))
    for value in range(512):
        g = space.build(value)
        if not is_strong(g.compiled) or singular_status(g, 0, 1) is not Singularity.OUT:
            continue
        families = singular_families(g, 0)
        assert {t.length for t in families if t.pattern == "alpha"} == {3, 4, 5}
        assert {t.length for t in families if t.pattern == "beta"} == {4, 5, 6}
        return
    pytest.fail("no out-singular instance")


def test_singular_non_strong_raises():
    g = build(cycles(3, 3), 0)
    with pytest.raises(NotStrongError):
        singular_families(g, 0)


def test_gamma_family_on_larger_first_cycle():
    space = OrientationSpace(cycles(6, 3))
    seen_gamma = False
    for seed in range(400):
        g = space.build(sample_orientation(space.summands, seed))
        if not is_strong(g.compiled):
            continue
        for v in g.summand_vertices(0):
            if singular_status(g, v, 1) is Singularity.NON:
                continue
            for t in singular_families(g, v):
                assert t.is_valid(g)
                seen_gamma |= t.pattern == "gamma"
    assert seen_gamma


def test_n_plus_id_figure2(figure2):
    traces = cycles_n_plus_id(figure2, GoodPair(0, 1, 0, 0))
    assert set(traces) == {5, 6, 7}
    assert all(t.is_valid(figure2) for t in traces.values())


def test_n_plus_id_reduces_to_merge():
    space = OrientationSpace(cycles(3, 3))
    for value in range(512):
        g = space.build(value)
        pairs = find_good_pairs(g)
        if is_strong(g.compiled) and pairs:
            traces = cycles_n_plus_id(g, pairs[0])
            assert set(traces) == {6}
            return


def test_n_plus_id_two_four_cycles():
    space = OrientationSpace(cycles(4, 4))
    for seed in range(50):
        g = space.build(sample_orientation(space.summands, seed))
        pairs = find_good_pairs(g)
        if is_strong(g.compiled) and pairs:
            assert set(cycles_n_plus_id(g, pairs[0])) == {8}


def test_n_plus_id_rejects_invalid_pair(figure2):
    with pytest.raises(PreconditionError):
        cycles_n_plus_id(figure2, GoodPair(0, 1, 3, 2))


@pytest.mark.parametrize("orders", [(4, 3), (6, 3), (6, 4), (5, 5), (6, 2)])
def test_n_plus_id_covers_all_lengths(orders):
    space = OrientationSpace(cycles(*orders))
    n, m = orders
    d = gcd(n, m)
    wanted = {n + i * d for i in range(1, m // d + 1)}
    for seed in range(150):
        g = space.build(sample_orientation(space.summands, seed))
        if not is_strong(g.compiled):
            continue
        for pair in find_good_pairs(g)[:3]:
            traces = cycles_n_plus_id(g, pair)
            assert set(traces) == wanted
            assert all(t.is_valid(g) and len(t.cycle) == ln for ln, t in traces.items())


def test_trace_json_round_trip(figure2):
    trace = merge_with_good_pair(figure2, GoodPair(0, 1, 0, 0))
    data = trace.to_dict()
    assert set(data) == {"pattern", "params", "cycle"}
    assert ConstructionTrace.from_dict(data) == trace


# -- k summands --------------------------------------------------------------------


def test_summand_graph_and_case1():
    orders = (3, 3, 3)
    value = summand_order_orientation(orders, {(1, 2): "mixed", (0, 2): "mixed"})
    g = build(cycles(*orders), value)
    assert is_strong(g.compiled)
    assert {(1, 2), (2, 1)} <= summand_graph(g)
    analysis = collapse_cycle_in_H(g)
    assert analysis.case == "cycle" and analysis.cycle == (1, 2)
    fused, host = collapse_step(g, analysis)
    assert fused.orders == (3, 6)
    ham = find_hamiltonian_cycle(g.compiled.induced(list(range(3, 9))))
    assert ham is not None


def test_case2_transitive_order():
    orders = (3, 3, 3)
    # D2 -> D3 only, D1 mixed with both
    value = summand_order_orientation(orders, {(0, 1): "mixed", (0, 2): "mixed"})
    g = build(cycles(*orders), value)
    analysis = collapse_cycle_in_H(g)
    assert analysis.case == "transitive" and analysis.order == (1, 2)
    with pytest.raises(WrongCaseError):
        collapse_step(g, analysis)


def test_collapse_preconditions():
    with pytest.raises(PreconditionError):
        collapse_cycle_in_H(build(cycles(3, 3), 1))
    with pytest.raises(PreconditionError):
        collapse_cycle_in_H(build(cycles(3, 3, 3), 0))


def test_case21_full_coverage():
    orders = (3, 3, 3)
    # D1 -> D2 -> D3, D1 -> D3 except one arc back from D3 to D1
    value = summand_order_orientation(orders, {(0, 2): "mixed"})
    g = build(cycles(*orders), value)
    result = knary_case_cycles(g)
    assert result.case == "2.1"
    assert set(result.traces) == set(range(3, 10))
    for trace in result.traces.values():
        assert trace.is_valid(g)
    beta0 = [t for t in result.traces.values() if t.pattern == "beta" and t.params["i"] == 0]
    assert beta0 and beta0[0].length == 3


def test_case22_mirror_coverage():
    orders = (3, 3, 3)
    # D2 -> D3, D3 -> D1 entirely, D2 -> D1 mixed (so some D1 -> D2)
    value = summand_order_orientation(orders, {(0, 1): "mixed", (0, 2): "back"})
    g = build(cycles(*orders), value)
    result = knary_case_cycles(g)
    assert result.case == "2.2"
    assert set(result.traces) == set(range(3, 10))
    assert all(t.is_valid(g) for t in result.traces.values())


def test_case23_coverage():
    orders = (3, 3, 3)
    value = summand_order_orientation(orders, {(0, 1): "mixed", (0, 2): "mixed"})
    g = build(cycles(*orders), value)
    result = knary_case_cycles(g)
    assert result.case == "2.3"
    r = result.r
    own = {t.length for t in result.traces.values() if not t.params.get("delegated")}
    assert set(range(r + 3, 6 + r + 2)) <= own
    assert result.delegated == frozenset(range(3, r + 3))
    assert all(t.is_valid(g) for t in result.traces.values())


def test_knary_rejects_case1():
    orders = (3, 3, 3)
    value = summand_order_orientation(orders, {(1, 2): "mixed", (0, 2): "mixed"})
    with pytest.raises(WrongCaseError):
        knary_case_cycles(build(cycles(*orders), value))


def _formula_length(trace, orders_in_path):
    p, i = trace.params, trace.params.get("i")
    n = orders_in_path
    if trace.pattern == "beta" and "j" in p:
        return i + 3
    if trace.pattern == "gamma" and "j" in p:
        return sum(n[: p["j"] - 1]) + i + 2
    if trace.pattern == "eta":
        return sum(n[: p["j"] - 1]) + i + 1
    if trace.pattern == "phi":
        return sum(n[1 : p["j"] - 1]) + i + p["r"] + 3
    if trace.pattern == "psi":
        return sum(n[1 : p["j"] - 1]) + i + p["r"] + 2
    return None


def transitive_instance(orders, seed, force=None):
    """Random sum whose non-base summands are ordered by a random permutation.

    ``force="2.1"`` makes the base dominate the first summand of that order,
    ``force="2.2"`` makes the last summand dominate the base.
    """
    rng = random.Random(seed)
    base = min(range(len(orders)), key=lambda i: (orders[i], i))
    rest = [i for i in range(len(orders)) if i != base]
    rng.shuffle(rest)
    rank = {s: t for t, s in enumerate(rest)}
    value = 0
    for b, (i, j, p, q) in enumerate(cross_pairs(orders)):
        if base not in (i, j):
            backward = rank[i] > rank[j]
        elif force == "2.1" and {i, j} == {base, rest[0]}:
            backward = i != base
        elif force == "2.2" and {i, j} == {base, rest[-1]}:
            backward = i == base
        else:
            backward = rng.random() < 0.5
        value |= backward << b
    return build(cycles(*orders), value), base, tuple(rest)


@pytest.mark.parametrize("orders", [(3, 3, 3), (3, 4, 3), (3, 3, 3, 3), (4, 3, 5)])
@pytest.mark.parametrize("force", [None, "2.1", "2.2"])
def test_knary_traces_validate_and_match_formulas(orders, force):
    seen = set()
    for seed in range(40):
        g, base, path = transitive_instance(orders, seed, force)
        if not is_strong(g.compiled):
            continue
        analysis = collapse_cycle_in_H(g)
        assert analysis.case == "transitive" and analysis.order == path
        result = knary_case_cycles(g, analysis)
        seen.add(result.case)
        walk = [base, *(reversed(path) if result.case == "2.2" else path)]
        walk_orders = [g.orders[i] for i in walk]
        for length, trace in result.traces.items():
            assert trace.is_valid(g) and trace.length == length == len(trace.cycle)
            if not trace.params.get("delegated"):
                assert _formula_length(trace, walk_orders) == length
        if result.case in ("2.1", "2.2"):
            assert set(result.traces) == set(range(3, g.order + 1))
        else:
            r, rest_total = result.r, g.order - g.orders[base]
            own = {ln for ln, t in result.traces.items() if not t.params.get("delegated")}
            assert set(range(r + 3, rest_total + r + 2)) <= own
    if force is None:
        assert "2.3" in seen
    else:
        assert force in seen


@pytest.mark.parametrize("orders", [(3, 3), (4, 3), (4, 4), (5, 3)])
def test_pair_certificates_are_sound(orders):
    space = OrientationSpace(cycles(*orders))
    for seed in range(100):
        g = space.build(sample_orientation(space.summands, seed))
        if not is_strong(g.compiled):
            continue
        traces = pair_certificates(g)
        spectrum = cycle_spectrum(g.compiled, 3, g.order).lengths
        assert set(traces) <= spectrum
        assert all(t.is_valid(g) for t in traces.values())
        if find_good_pairs(g):
            assert g.order in traces


def test_certificates_k3_map_to_original_vertices():
    summands = cycles(3, 3, 3)
    for seed in range(40):
        g = build(summands, sample_orientation(summands, seed))
        run = constructive_certificates(g)
        assert run.cases
        for length, trace in run.traces.items():
            assert validate_cycle(g.compiled, trace.cycle) and len(trace.cycle) == length
