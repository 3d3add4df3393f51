import io
from fractions import Fraction

import pytest

from graphs import build
from metrel.batch import PairJob, analyze_corpus, load_corpus, run_pair, write_records
from metrel.errors import InputError, OrderingError, PairingError
from metrel.graph import save_graph
from metrel.reliability import SKIP_MISSING


def _write(root, graphs):
    for g in graphs:
        (root / g.artifact).mkdir(parents=True, exist_ok=True)
        save_graph(g, root / g.artifact / f"{g.version}.graph")


def test_versions_ordered_by_levels_not_names(tmp_path):
    edges = [("a", "b")]
    _write(tmp_path, [build(edges, artifact="x", version=v) for v in ("1.10", "1.9", "1.2")])
    report = analyze_corpus(load_corpus(tmp_path), metrics=["#Outgoing"])
    assert [r.key[1:] for r in report.reports] == [("1.2", "1.9"), ("1.9", "1.10")]


def test_identical_versions_marker_reliability_one(tmp_path):
    marks = {"a": {"final": True}, "b": {"final": False}, "c": {"final": True}}
    edges = [("a", "b"), ("b", "c")]
    _write(tmp_path, [build(edges, artifact="x", version=v, markers=marks) for v in ("1.0", "1.1")])
    report = analyze_corpus(load_corpus(tmp_path), metrics=["final", "sink"])
    values = {(r.metric_name, r.kind): r.value for r in report.records}
    assert values[("final", "marker")] == 1.0
    assert values[("final", "marker_negation")] == 1.0
    assert values[("sink", "marker")] == 1.0


def test_missing_attribute_is_skipped_not_fatal():
    job = PairJob(build([("a", "b")]), build([("a", "b")], version="1.1"), ("final", "DIT"))
    report = run_pair(job)
    assert {r.reason for r in report.records} == {SKIP_MISSING}
    assert len(report.records) == 3


def test_unorderable_versions_name_the_artifact(tmp_path):
    _write(tmp_path, [build([("a", "b")], artifact="x", version=v) for v in ("1.0.1", "1.0.rc1")])
    with pytest.raises(OrderingError, match="'x'"):
        analyze_corpus(load_corpus(tmp_path), metrics=["#Outgoing"])


def test_artifact_must_match_directory(tmp_path):
    (tmp_path / "y").mkdir()
    save_graph(build([("a", "b")], artifact="x"), tmp_path / "y" / "1.0.graph")
    with pytest.raises(PairingError):
        load_corpus(tmp_path)


def test_empty_corpus(tmp_path):
    with pytest.raises(InputError):
        load_corpus(tmp_path)


def test_jobs_do_not_change_output(fixtures_dir):
    corpus = load_corpus(fixtures_dir / "corpus")
    kw = dict(metrics=["final", "#Clients", "PageRank'"], mutations=["M2"], repetitions=3, seed=7)
    one = analyze_corpus(corpus, workers=1, **kw)
    two = analyze_corpus(corpus, workers=2, **kw)
    assert one.records == two.records and one.advantages == two.advantages


def test_record_csv_format():
    job = PairJob(build([("a", "b"), ("b", "c")]), build([("a", "b"), ("a", "c")], version="2.0"), ("#Outgoing",))
    out = io.StringIO()
    write_records(run_pair(job).records, out)
    lines = out.getvalue().splitlines()
    assert lines[0] == "artifact,earlier_version,later_version,metric_name,kind,value,support,p_value,cardinality,reason"
    assert lines[1].startswith("art,1.0,2.0,#Outgoing,numerical,")
    assert lines[1].endswith(f",3,1,{Fraction(1)},")


def test_report_tables_written(tmp_path, fixtures_dir):
    report = analyze_corpus(load_corpus(fixtures_dir / "corpus"), metrics=["final", "#Clients"],
                            mutations=["M0_grow", "M5"], repetitions=2)
    names = sorted(p.name for p in report.write(tmp_path))
    assert names == sorted([
        "records.csv", "aggregates.csv", "plot.csv", "correlations.csv", "style.csv",
        "advantages.csv", "advantage_medians.csv", "reliability_medians.csv",
    ])
    groups = (tmp_path / "correlations.csv").read_text().splitlines()
    assert any(",ensemble,*," in row for row in groups)
    assert {row.split(",")[3] for row in groups[1:] if ",artifact," in row} == {"alpha", "beta", "gamma"}
    series = [row.split(",")[1] for row in (tmp_path / "reliability_medians.csv").read_text().splitlines()[1:4]]
    assert series == ["real", "M0_grow", "M5"]
