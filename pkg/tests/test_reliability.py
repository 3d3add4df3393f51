import random
from fractions import Fraction

import pytest

import oracles
from graphs import build, random_pair
from metrel.catalog import GLOBAL_NUMERICAL, MetricSuite
from metrel.errors import NormalizationError
from metrel.evolution import diff
from metrel.reliability import (
    MARKER_KIND,
    NEGATION_KIND,
    SKIP_DEGENERATE,
    SKIP_NO_NEW_TYPES,
    SKIP_NO_SUPPORT,
    derive_seed,
    marker_reliability,
    mutation_advantage,
    mutation_advantages,
    negation_reliability,
    numerical_reliability,
    prevalence_change,
    reliability_vs_cardinality,
    style_preservation,
    ReliabilityRecord,
)
from metrel.topo import MARKER, MetricVector, DISCRETE


def _markers(nodes, marked, name="final"):
    return MetricVector(name, MARKER, {v: v in marked for v in nodes})


def _pair(n_earlier, n_later, v1="1.0", v2="1.1"):
    return diff(
        build(nodes=[f"t{i}" for i in range(n_earlier)], version=v1),
        build(nodes=[f"t{i}" for i in range(n_later)], version=v2),
    )


def test_marker_reliability_examples():
    pair = _pair(10, 10)
    ids = sorted(pair.core)
    r = marker_reliability(pair, _markers(ids, ids[:5]), _markers(ids, ids[:5]))
    assert (r.value, r.support, r.kind) == (1.0, 5, MARKER_KIND)
    r = marker_reliability(pair, _markers(ids, ids[:4]), _markers(ids, ids[:3]))
    assert (r.value, r.support) == (0.75, 4)
    r = marker_reliability(pair, _markers(ids, []), _markers(ids, ids))
    assert r.skipped and r.reason == SKIP_NO_SUPPORT


def test_marker_reliability_ignores_non_core():
    pair = _pair(6, 4)  # t4, t5 removed
    early = _markers(sorted(pair.earlier.nodes), ["t0", "t4", "t5"])
    late = _markers(sorted(pair.later.nodes), [])
    r = marker_reliability(pair, early, late)
    assert (r.value, r.support) == (0.0, 1)


def test_negation_reliability_examples():
    pair = _pair(10, 10)
    ids = sorted(pair.core)
    r = negation_reliability(pair, _markers(ids, []), _markers(ids, []))
    assert (r.value, r.kind) == (1.0, NEGATION_KIND)
    r = negation_reliability(pair, _markers(ids, []), _markers(ids, ids[:1]))
    assert r.value == 0.9
    assert negation_reliability(pair, _markers(ids, ids), _markers(ids, ids)).skipped


def test_cardinality_attached():
    pair = _pair(3, 3, "2.1", "3.0")
    ids = sorted(pair.core)
    r = marker_reliability(pair, _markers(ids, ids), _markers(ids, ids))
    assert r.cardinality == Fraction(1)
    assert marker_reliability(_pair(3, 3, "1.0", "1.0.1"), _markers(ids, ids), _markers(ids, ids)).cardinality == Fraction(1, 4)


def _numeric(nodes, values):
    return MetricVector("m", DISCRETE, dict(zip(nodes, values)))


def test_numerical_reliability_examples():
    pair = _pair(5, 5)
    ids = sorted(pair.core)
    assert numerical_reliability(pair, _numeric(ids, range(5)), _numeric(ids, range(5))).value == 1.0
    assert numerical_reliability(pair, _numeric(ids, range(5)), _numeric(ids, range(5, 0, -1))).value == -1.0
    r = numerical_reliability(pair, _numeric(ids, [1] * 5), _numeric(ids, range(5)))
    assert r.skipped and r.reason == SKIP_DEGENERATE and r.support == 5


def test_numerical_reliability_six_node_oracle():
    rng = random.Random(8)
    for _ in range(50):
        pair = _pair(6, 6)
        ids = sorted(pair.core)
        x = [rng.randint(0, 3) for _ in ids]
        y = [rng.randint(0, 3) for _ in ids]
        *_, tau = oracles.tau_b(x, y)
        r = numerical_reliability(pair, _numeric(ids, x), _numeric(ids, y))
        assert r.value == tau


def test_numerical_over_core_only_with_real_metrics():
    rng = random.Random(2)
    for _ in range(30):
        pair = random_pair(rng, 10)
        if len(pair.core) < 2:
            continue
        e, l = MetricSuite(pair.earlier)["#Descendants"], MetricSuite(pair.later)["#Descendants"]
        r = numerical_reliability(pair, e, l)
        assert r.support == len(pair.core)
        core = sorted(pair.core)
        *_, tau = oracles.tau_b([e[v] for v in core], [l[v] for v in core])
        assert r.value == tau


def test_style_preservation():
    earlier = build(nodes=[f"a{i}" for i in range(100)])
    later = build(nodes=[f"a{i}" for i in range(100)] + [f"b{i}" for i in range(100)], version="1.1")
    pair = diff(earlier, later)
    half = _markers(sorted(earlier.nodes), [f"a{i}" for i in range(50)])
    none_new = _markers(sorted(later.nodes), [f"a{i}" for i in range(50)])
    r = style_preservation(pair, half, none_new)
    assert r.significant and r.p_value < 0.001
    assert abs(r.statistic - oracles.chi2_2x2(50, 100, 0, 100)) < 1e-9
    same = _markers(sorted(later.nodes), [f"a{i}" for i in range(50)] + [f"b{i}" for i in range(50)])
    r = style_preservation(pair, half, same)
    assert r.statistic == 0.0 and not r.significant
    r = style_preservation(_pair(3, 3), _markers(["t0", "t1", "t2"], []), _markers(["t0", "t1", "t2"], []))
    assert r.reason == SKIP_NO_NEW_TYPES and r.statistic is None


def test_prevalence_change():
    pair = _pair(20, 20)
    ids = sorted(pair.core)
    assert prevalence_change(pair, _markers(ids, ids[:2]), _markers(ids, ids[:2])) == 0.0
    assert prevalence_change(pair, _markers(ids, ids[:2]), _markers(ids, ids[:3])) == 5.0
    assert prevalence_change(pair, _markers(ids, ids[:3]), _markers(ids, ids[:2])) == -5.0
    with pytest.raises(NormalizationError):
        prevalence_change(pair, _markers([], []), _markers(ids, []))


def _rec(artifact, card, value, metric="m", kind=MARKER_KIND):
    return ReliabilityRecord(artifact, "1", "2", metric, kind, value, 1, None, Fraction(card))


def test_reliability_vs_cardinality():
    recs = [_rec("a", Fraction(1, 2**k), 1 - 0.1 * k) for k in range(4)]
    out = reliability_vs_cardinality(recs)
    assert [(c.grouping, c.artifact) for c in out] == [("artifact", "a"), ("ensemble", "*")]
    assert all(c.tau_b == 1.0 for c in out)
    flat = reliability_vs_cardinality([_rec("a", 1, v) for v in (0.1, 0.2, 0.3)])
    assert all(c.tau_b is None and c.reason == SKIP_DEGENERATE for c in flat)


def test_reliability_vs_cardinality_oracle_and_grouping():
    rng = random.Random(4)
    recs = [_rec("ab"[i % 2], Fraction(1, 2 ** rng.randint(0, 2)), rng.random()) for i in range(6)]
    recs.append(_rec("a", 1, None))  # skipped records are ignored
    out = {(c.grouping, c.artifact): c for c in reliability_vs_cardinality(recs)}
    assert set(out) == {("ensemble", "*"), ("artifact", "a"), ("artifact", "b")}
    used = recs[:6]
    *_, tau = oracles.tau_b([float(r.cardinality) for r in used], [r.value for r in used])
    assert out["ensemble", "*"].tau_b == tau
    assert out["ensemble", "*"].n == 6


def test_derive_seed_stable():
    assert derive_seed(7, "a", "1", "2") == derive_seed(7, "a", "1", "2")
    assert derive_seed(7, "a", "1", "2") != derive_seed(8, "a", "1", "2")
    assert 0 <= derive_seed(0) < 2**64


def test_advantage_identical_pair_is_zero():
    rng = random.Random(1)
    from graphs import random_graph

    g = random_graph(rng, 12, 0.2)
    pair = diff(g, g.replace(version="1.1"))
    for kind in ("M3", "M4", "M5"):
        a = mutation_advantage(pair, "#Descendants", kind, repetitions=3, seed=1)
        assert a.real_reliability == 1.0
        assert a.advantage == 0.0


def test_advantage_m5_empty_cut():
    earlier = build([("a", "b"), ("b", "c"), ("c", "d")], version="1.0")
    later = build([("a", "b"), ("c", "d"), ("a", "d"), ("d", "b")], version="1.1")
    pair = diff(earlier, later)
    a = mutation_advantage(pair, "#Clients", "M5", repetitions=4, seed=9)
    assert a.advantage == 0.0 and a.repetitions == 4


def test_advantage_reproducible():
    rng = random.Random(20)
    pair = random_pair(rng, 20)
    while len(pair.core) < 5:
        pair = random_pair(rng, 20)
    a = mutation_advantages(pair, list(GLOBAL_NUMERICAL), "M0_grow", repetitions=10, seed=5)
    b = mutation_advantages(pair, list(GLOBAL_NUMERICAL), "M0_grow", repetitions=10, seed=5)
    assert a == b
    single = mutation_advantage(pair, a[0].metric_name, "M0_grow", repetitions=10, seed=5)
    assert single == a[0]


def test_advantage_shrink_uses_mutant_as_earlier():
    rng = random.Random(6)
    pair = random_pair(rng, 15)
    while len(pair.core) < 4 or len(pair.later.nodes) < len(pair.earlier.nodes):
        pair = random_pair(rng, 15)
    a = mutation_advantage(pair, "#Outgoing", "M0_shrink", repetitions=5, seed=2)
    assert a.mutation == "M0_shrink"
    assert a.repetitions <= 5


def test_repetitions_positive():
    pair = _pair(3, 3)
    with pytest.raises(ValueError):
        mutation_advantage(pair, "#Outgoing", "M1", repetitions=0)
