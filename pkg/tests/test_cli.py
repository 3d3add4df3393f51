import csv
import io
from fractions import Fraction

import pytest

from metrel.catalog import GRAPH_METRICS
from metrel.cli import EXIT_INFEASIBLE, EXIT_INPUT, EXIT_OK, EXIT_USAGE, main
from metrel.evolution import ADDED_KINDS, diff
from metrel.graph import load_graph


@pytest.fixture
def hand(fixtures_dir):
    d = fixtures_dir / "hand" / "hand"
    return str(d / "1.0.graph"), str(d / "1.1.graph")


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_metrics_single(capsys, hand):
    code, out, _ = _run(capsys, "metrics", hand[0], "--metric", "pagerank")
    rows = _rows(out)
    assert code == EXIT_OK
    assert rows[0] == ["node_id", "metric_name", "value"]
    assert len(rows) == 1 + 6 and {r[1] for r in rows[1:]} == {"PageRank"}


def test_metrics_all(capsys, hand):
    code, out, _ = _run(capsys, "metrics", hand[0], "--all")
    assert code == EXIT_OK
    assert len(GRAPH_METRICS) == 36
    assert len(_rows(out)) == 1 + 36 * 6


def test_metrics_usage_errors(capsys, hand):
    assert _run(capsys, "metrics", hand[0], "--metric", "nosuch")[0] == EXIT_USAGE
    assert _run(capsys, "metrics", hand[0])[0] == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == EXIT_USAGE


def test_metrics_bad_input(capsys, tmp_path):
    bad = tmp_path / "bad.graph"
    bad.write_text("graph a 1.0\nedge x y\n")
    code, _, err = _run(capsys, "metrics", str(bad), "--all")
    assert code == EXIT_INPUT and "x" in err
    assert _run(capsys, "metrics", str(tmp_path / "missing.graph"), "--all")[0] == EXIT_INPUT


def _pair_values(out):
    rows = _rows(out)
    assert rows[0] == ["artifact", "earlier_version", "later_version", "measure", "value"]
    return {r[3]: r[4] for r in rows[1:]}


def test_pair_identical(capsys, hand):
    code, out, _ = _run(capsys, "pair", hand[0], hand[0])
    values = _pair_values(out)
    assert code == EXIT_OK
    for m in ("remaining_types", "continuing_types", "remaining_edges", "continuing_edges", "unchanged_both"):
        assert values[m] == "1"
    assert values["core_core_added.edges"] == "0"


def test_pair_matches_hand_count(capsys, hand):
    # 6 -> 7 types, 4 -> 5 edges; G is new and uses F, all old edges stay
    values = _pair_values(_run(capsys, "pair", *hand)[1])
    expected = {
        "types": Fraction(7, 6),
        "edges": Fraction(5, 4),
        "remaining_types": 1,
        "continuing_types": Fraction(6, 7),
        "remaining_edges": 1,
        "continuing_edges": Fraction(4, 5),
        "unchanged_outgoing": 1,
        "unchanged_incoming": Fraction(5, 6),
        "unchanged_both": Fraction(5, 6),
        "core_core_preserved.edges": 4,
        "new_core.edges": 1,
        "new_core.sources": 1,
        "new_core.edges_pct": 25,
        "new_core.targets_pct": Fraction(100, 6),
        "core_new.edges": 0,
        "removed_core.edges": 0,
    }
    for measure, value in expected.items():
        assert float(values[measure]) == pytest.approx(float(value), abs=1e-9), measure


def test_pair_artifact_mismatch(capsys, hand, fixtures_dir):
    other = str(fixtures_dir / "corpus" / "alpha" / "1.0.graph")
    assert _run(capsys, "pair", hand[0], other)[0] == EXIT_INPUT


def test_mutate_m5_keeps_kind_counts(capsys, tmp_path, fixtures_dir):
    a = str(fixtures_dir / "corpus" / "alpha" / "1.0.graph")
    b = str(fixtures_dir / "corpus" / "alpha" / "1.0.1.graph")
    out1, out2 = tmp_path / "m1.graph", tmp_path / "m2.graph"
    assert _run(capsys, "mutate", a, b, "m5", "--seed", "1", "--out", str(out1))[0] == EXIT_OK
    assert _run(capsys, "mutate", a, b, "m5", "--seed", "1", "--out", str(out2))[0] == EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()
    earlier, later, mutant = load_graph(a), load_graph(b), load_graph(out1)
    real, fake = diff(earlier, later).edges_by_kind, diff(earlier, mutant).edges_by_kind
    for kind in ADDED_KINDS + ("core_core_preserved",):
        assert len(real[kind]) == len(fake[kind]), kind
    real_report = _pair_values(_run(capsys, "pair", a, b)[1])
    fake_report = _pair_values(_run(capsys, "pair", a, str(out1))[1])
    assert {k: v for k, v in real_report.items() if k.endswith(".edges")} == {
        k: v for k, v in fake_report.items() if k.endswith(".edges")
    }


def test_mutate_infeasible_and_usage(capsys, hand):
    # shrinking needs a later version at least as large as the earlier one
    code, _, err = _run(capsys, "mutate", hand[1], hand[0], "m0-shrink", "--seed", "3")
    assert code == EXIT_INFEASIBLE and "shrink" in err
    assert _run(capsys, "mutate", *hand, "m9")[0] == EXIT_USAGE


def test_reliability_seed_deterministic(capsys, tmp_path, fixtures_dir):
    corpus = str(fixtures_dir / "corpus")
    args = ["reliability", corpus, "--metric", "final,#Clients", "--mutations", "m0-grow,m5",
            "--repetitions", "2", "--seed", "7"]
    assert _run(capsys, *args, "--out", str(tmp_path / "a"))[0] == EXIT_OK
    assert _run(capsys, *args, "--jobs", "2", "--out", str(tmp_path / "b"))[0] == EXIT_OK
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "b").iterdir())
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_reliability_stdout_and_errors(capsys, tmp_path, fixtures_dir):
    code, out, _ = _run(capsys, "reliability", str(fixtures_dir / "hand"), "--metric", "final")
    rows = _rows(out)
    assert code == EXIT_OK
    assert rows[1][:6] == ["hand", "1.0", "1.1", "final", "marker", "0.75"]
    assert _run(capsys, "reliability", str(tmp_path))[0] == EXIT_INPUT
    assert _run(capsys, "reliability", str(tmp_path), "--mutations", "m7")[0] == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["reliability", str(tmp_path), "--seed", "-1"])
    assert exc.value.code == EXIT_USAGE


def test_summary(capsys, fixtures_dir, hand):
    code, out, _ = _run(capsys, "summary", hand[0], str(fixtures_dir / "corpus"))
    rows = _rows(out)
    assert code == EXIT_OK
    assert rows[0] == ["artifact", "version", "types", "packages", "edges"]
    assert rows[1] == ["hand", "1.0", "6", "1", "4"]
    assert [r[1] for r in rows if r[0] == "beta"] == ["0.9", "1.0", "1.0.1", "1.0.2", "1.1"]
