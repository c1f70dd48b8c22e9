import json
import os

import pytest

from gnk.harness import (
    CHIRAL_PAIRS,
    ENGINE,
    Report,
    ResultRecord,
    SweepConfig,
    compare_report,
    read_records,
    run_cell,
    run_sweep,
    sort_records,
    write_records,
)


def make_record(knot="SK", n=2, target="S3", task="count", status="ok",
                value=6, stats=None, timestamp="2024-01-01T00:00:00Z"):
    return ResultRecord(
        knot=knot, n=n, target=target, task=task, status=status,
        value=value, stats=stats or {}, timestamp=timestamp, engine=ENGINE,
    )


# -- config ---------------------------------------------------------------------


def test_config_roundtrip():
    cfg = SweepConfig(("SK", "GK"), (1, 2), ("S3",), ("count",), 2, "out.jsonl")
    again = SweepConfig.from_json(cfg.to_json())
    assert again == cfg


def test_config_validation():
    with pytest.raises(ValueError, match="knots"):
        SweepConfig(("figure8",), (1,), ("S3",), ("count",))
    with pytest.raises(ValueError, match="n_values"):
        SweepConfig(("SK",), (0,), ("S3",), ("count",))
    with pytest.raises(ValueError, match="n_values"):
        SweepConfig(("SK",), (), ("S3",), ("count",))
    with pytest.raises(ValueError, match="targets"):
        SweepConfig(("SK",), (1,), (), ("count",))
    with pytest.raises(ValueError, match="tasks"):
        SweepConfig(("SK",), (1,), ("S3",), ("frobnicate",))
    with pytest.raises(ValueError, match="shards"):
        SweepConfig(("SK",), (1,), ("S3",), ("count",), 0)
    with pytest.raises(ValueError, match="unknown config fields"):
        SweepConfig.from_json('{"knots": ["SK"], "budget": 7}')


def test_shipped_configs_parse():
    here = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    for name in ("standard_suite.json", "psl27_talex.json"):
        cfg = SweepConfig.from_file(os.path.join(here, "configs", name))
        assert "SK" in cfg.knots and "GK" in cfg.knots
    suite = SweepConfig.from_file(
        os.path.join(here, "configs", "standard_suite.json")
    )
    assert len(suite.targets) == 21
    assert suite.n_values == (1, 2, 3)


# -- records --------------------------------------------------------------------


def test_record_json_roundtrip():
    rec = make_record(stats={"nodes": 3, "buckets": {"all_homs": 6}})
    again = ResultRecord.from_json(rec.to_json())
    assert again == rec


def test_write_read_append(tmp_path):
    path = str(tmp_path / "deep" / "dir" / "records.jsonl")
    first = [make_record(), make_record(task="classes", value=3)]
    write_records(path, first)
    write_records(path, [make_record(n=3, value=30)])
    got = read_records(path)
    assert got == first + [make_record(n=3, value=30)]


def test_sort_records_canonical():
    a = make_record(target="S4", n=1)
    b = make_record(target="S3", n=2)
    c = make_record(target="S3", n=1, knot="GK")
    d = make_record(target="S3", n=1, knot="SK")
    assert sort_records([a, b, c, d]) == [c, d, b, a]


# -- cells ----------------------------------------------------------------------


def test_cell_count_stats_and_buckets():
    (rec,) = run_cell("SK", 2, "S3", ("count",))
    assert rec.status == "ok" and rec.value == 6
    assert rec.stats["buckets"] == {
        "all_homs": 6,
        "nonabelian_image": 0,
        "class_representatives": 3,
    }
    assert rec.engine == ENGINE
    json.loads(rec.to_json())  # every field serializes


def test_cell_cartesian_example():
    cfg = SweepConfig(("SK", "GK"), (1, 2), ("S3", "S4"), ("count",))
    records = [
        rec
        for target in cfg.targets
        for n in cfg.n_values
        for knot in cfg.knots
        for rec in run_cell(knot, n, target, cfg.tasks)
    ]
    assert len(records) == 8


def test_cell_all_tasks_agree_with_library():
    from gnk.fingroups import SymmetricGroup
    from gnk.homsearch import check_property_t, structured_count

    group = SymmetricGroup(4)
    recs = {
        r.task: r
        for r in run_cell("GK", 2, "S4", ("count", "classes", "property_t", "structured"))
    }
    assert recs["count"].value == 144
    assert recs["classes"].value == recs["count"].stats["buckets"]["class_representatives"]
    assert recs["property_t"].value == check_property_t(group, 2, "GK").holds
    assert recs["structured"].value == structured_count(group, 2)


def test_cell_capability_skip_record():
    (rec,) = run_cell("SK", 2, "S24", ("count",))
    assert rec.status == "skip" and rec.value is None
    assert "2500" in rec.stats["reason"]


def test_cell_extension_tasks_skip_on_trefoils():
    records = run_cell("trefoil_r", 2, "S3", ("count", "property_t", "structured", "talex"))
    by_task = {r.task: r for r in records}
    assert by_task["count"].status == "ok"
    for task in ("property_t", "structured", "talex"):
        assert by_task[task].status == "skip"
        assert "composite" in by_task[task].stats["reason"]


def test_cell_talex_skip_without_matrix_route():
    (rec,) = run_cell("SK", 2, "S4", ("talex",))
    assert rec.status == "skip"
    assert "representation route" in rec.stats["reason"]


def test_cell_talex_digest_stable():
    a, = run_cell("SK", 2, "SL2_3", ("talex",))
    b, = run_cell("SK", 2, "SL2_3", ("talex",))
    assert a.status == "ok"
    assert len(a.value) == 64 and a.value == b.value
    assert a.stats["homs"] == 264


def test_cell_rejects_unknown_task():
    with pytest.raises(ValueError, match="tasks"):
        SweepConfig(("SK",), (1,), ("S3",), ("count", "mystery"))


# -- sweeps ---------------------------------------------------------------------


def test_sweep_values_independent_of_shards_and_jobs(tmp_path):
    base = dict(knots=("SK", "GK"), n_values=(1, 2), targets=("S3", "S4"),
                tasks=("count", "classes"))
    cfg1 = SweepConfig(**base, shards=1, output=str(tmp_path / "one.jsonl"))
    cfg3 = SweepConfig(**base, shards=3, output=str(tmp_path / "three.jsonl"))
    recs1 = run_sweep(cfg1)
    recs3 = run_sweep(cfg3, jobs=2)
    strip = lambda rs: [(r.key(), r.status, r.value) for r in rs]
    assert strip(recs1) == strip(recs3)
    assert len(recs1) == 16


def test_sweep_appends_and_rerun_matches(tmp_path):
    cfg = SweepConfig(("SK",), (2,), ("S3",), ("count",),
                      output=str(tmp_path / "r.jsonl"))
    first = run_sweep(cfg)
    second = run_sweep(cfg)
    on_disk = read_records(cfg.output)
    assert len(on_disk) == 2
    assert on_disk[0].value == on_disk[1].value == first[0].value == second[0].value


def test_sweep_unconstructible_target_fails_before_writing(tmp_path):
    cfg = SweepConfig(("SK",), (1,), ("S3", "Q8"), ("count",),
                      output=str(tmp_path / "r.jsonl"))
    with pytest.raises(ValueError):
        run_sweep(cfg)
    assert not os.path.exists(cfg.output)


# -- reports --------------------------------------------------------------------


def test_report_empty():
    report = compare_report([])
    assert report.rows == () and report.exit_code() == 0


def test_report_matching_pair():
    recs = [make_record(knot="SK"), make_record(knot="GK")]
    report = compare_report(recs)
    assert [r.outcome for r in report.rows] == ["match"]
    assert report.exit_code() == 0


def test_report_synthetic_mismatch():
    recs = [make_record(knot="SK", value=6), make_record(knot="GK", value=7)]
    report = compare_report(recs)
    assert report.rows[0].outcome == "MISMATCH"
    assert report.exit_code() == 3
    assert "MISMATCH" in report.text_table()


def test_report_bucket_mismatch_is_flagged():
    good = {"buckets": {"all_homs": 6, "nonabelian_image": 0}}
    bad = {"buckets": {"all_homs": 6, "nonabelian_image": 2}}
    recs = [
        make_record(knot="SK", stats=good),
        make_record(knot="GK", stats=bad),
    ]
    assert compare_report(recs).rows[0].outcome == "MISMATCH"


def test_report_incomplete_and_skip_rows():
    recs = [
        make_record(knot="SK", target="S5"),
        make_record(knot="SK", target="S3", status="skip", value=None,
                    stats={"reason": "too big"}),
        make_record(knot="GK", target="S3", status="skip", value=None,
                    stats={"reason": "too big"}),
    ]
    report = compare_report(recs)
    outcomes = {(r.target, r.outcome) for r in report.rows}
    assert ("S5", "incomplete") in outcomes
    assert ("S3", "skip") in outcomes
    assert report.exit_code() == 2  # skips present, no mismatch


def test_report_last_record_wins():
    stale = make_record(knot="GK", value=99, timestamp="2024-01-01T00:00:00Z")
    fresh = make_record(knot="GK", value=6, timestamp="2024-01-02T00:00:00Z")
    recs = [make_record(knot="SK"), stale, fresh]
    report = compare_report(recs)
    assert report.rows[0].outcome == "match"


def test_report_covers_trefoil_pair():
    recs = [
        make_record(knot="trefoil_r", value=12, n=1),
        make_record(knot="trefoil_l", value=12, n=1),
    ]
    report = compare_report(recs)
    assert report.rows[0].pair == "trefoil_r/trefoil_l"
    assert report.rows[0].outcome == "match"
    assert CHIRAL_PAIRS == (("SK", "GK"), ("trefoil_r", "trefoil_l"))
