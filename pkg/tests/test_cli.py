import json

import pytest

from gnk.cli import main
from gnk.harness import ENGINE, ResultRecord, write_records


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- present ----------------------------------------------------------------------


def test_present_text(capsys):
    code, out, _ = run(capsys, "present", "--knot", "sk", "--n", "2")
    assert code == 0
    assert out.startswith("gens: d b e")
    assert out.count("rel:") == 3


def test_present_json_parses(capsys):
    code, out, _ = run(capsys, "present", "--knot", "SK", "--n", "2", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["knot"] == "SK" and payload["n"] == 2
    assert len(payload["relators"]) == 3


def test_present_raw_has_more_generators(capsys):
    _, out_red, _ = run(capsys, "present", "--knot", "GK", "--n", "1",
                        "--format", "json")
    _, out_raw, _ = run(capsys, "present", "--knot", "GK", "--n", "1", "--raw",
                        "--format", "json")
    assert len(json.loads(out_raw)["gens"]) > len(json.loads(out_red)["gens"])


def test_unknown_knot_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["present", "--knot", "figure8", "--n", "1"])
    assert info.value.code == 1
    assert "unknown knot" in capsys.readouterr().err


def test_missing_subcommand_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 1


# -- counting ---------------------------------------------------------------------


def test_count_homs_classical_trefoil(capsys):
    code, out, _ = run(capsys, "count-homs", "--knot", "trefoil_r", "--n", "1",
                       "--target", "S3")
    assert code == 0
    assert out.strip() == "12"


def test_count_homs_sharded_matches_plain(capsys):
    code, plain, _ = run(capsys, "count-homs", "--knot", "SK", "--n", "2",
                         "--target", "SL2_3")
    assert code == 0
    code, sharded, _ = run(capsys, "count-homs", "--knot", "SK", "--n", "2",
                           "--target", "SL2_3", "--shards", "3", "--jobs", "2")
    assert code == 0
    assert plain == sharded == "264\n"


def test_count_homs_single_shard_json(capsys):
    total = 0
    for sid in range(3):
        code, out, _ = run(capsys, "count-homs", "--knot", "SK", "--n", "2",
                           "--target", "S4", "--shards", "3",
                           "--shard-id", str(sid), "--format", "json")
        assert code == 0
        total += json.loads(out)["count"]
    code, out, _ = run(capsys, "count-homs", "--knot", "SK", "--n", "2",
                       "--target", "S4")
    assert total == int(out)


def test_count_classes(capsys):
    code, out, _ = run(capsys, "count-classes", "--knot", "SK", "--n", "2",
                       "--target", "S3")
    assert code == 0
    assert out.strip() == "3"


def test_count_homs_oversized_target_skips(capsys):
    code, out, err = run(capsys, "count-homs", "--knot", "SK", "--n", "2",
                         "--target", "S24")
    assert code == 2
    assert out == ""
    assert err.startswith("skip:")


# -- roots and property checks ------------------------------------------------------


def test_roots_output(capsys):
    code, out, _ = run(capsys, "roots", "--target", "S4", "--element", "(1,2,3)",
                       "--n", "2")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == str(len(lines) - 1)
    assert "(1,3,2)" in lines[1:]


def test_check_t_holds(capsys):
    code, out, _ = run(capsys, "check-t", "--target", "S3", "--n", "2",
                       "--knot", "SK")
    assert code == 0
    assert "property T(2,SK) for S3: holds" in out
    assert "bases:" in out


def test_check_t_json_fields(capsys):
    code, out, _ = run(capsys, "check-t", "--target", "Z6", "--n", "3",
                       "--knot", "GK", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["holds"] is True
    assert payload["target"] == "Z6" and payload["knot"] == "GK"


# -- extension --------------------------------------------------------------------


def test_extend_reports_candidates(capsys):
    code, out, _ = run(capsys, "extend", "--target", "S4", "--n", "2",
                       "--knot", "SK", "--base",
                       "d=(1,2,3); b=(1,2,3); e=(1,2,3)")
    assert code == 0
    last = out.strip().split("\n")[-1]
    assert last.startswith("valid extensions:")


def test_extend_rejects_non_braid_base(capsys):
    code, _, err = run(capsys, "extend", "--target", "S4", "--n", "2",
                       "--knot", "SK", "--base",
                       "d=(1,2); b=(1,2); e=(3,4)")
    assert code == 1
    assert "braid relations" in err


def test_extend_rejects_incomplete_base(capsys):
    code, _, err = run(capsys, "extend", "--target", "S4", "--n", "2",
                       "--knot", "SK", "--base", "d=(1,2)")
    assert code == 1
    assert "must assign" in err


# -- witness ----------------------------------------------------------------------


def test_verify_witness_text(capsys):
    code, out, _ = run(capsys, "verify-witness")
    assert code == 0
    lines = out.strip().split("\n")
    assert len(lines) == 6
    assert lines[0] == "root condition d_hat^2 = D: True"
    assert lines[-1] == "property T(2,SK) counterexample: CONFIRMED"


def test_verify_witness_json(capsys):
    code, out, _ = run(capsys, "verify-witness", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["confirmed"] is True
    assert payload["root_ok"] is True


# -- talex ------------------------------------------------------------------------


def test_talex_digest(capsys):
    code, out, _ = run(capsys, "talex", "--knot", "SK", "--n", "2",
                       "--target", "SL2_3", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["homs"] == 264
    assert len(payload["digest"]) == 64


def test_talex_skip_for_permutation_target(capsys):
    code, _, err = run(capsys, "talex", "--knot", "SK", "--n", "2",
                       "--target", "S4")
    assert code == 2
    assert "skip:" in err


# -- sweep and report -------------------------------------------------------------


def write_config(tmp_path, **overrides):
    cfg = {
        "knots": ["SK", "GK"],
        "n_values": [1],
        "targets": ["S3"],
        "tasks": ["count", "classes"],
        "shards": 1,
        "output": str(tmp_path / "records.jsonl"),
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return str(path), cfg["output"]


def test_sweep_then_report_clean(capsys, tmp_path):
    config, records = write_config(tmp_path)
    code, out, _ = run(capsys, "sweep", "--config", config)
    assert code == 0
    assert "records: 4  skips: 0" in out
    code, out, _ = run(capsys, "report", "--records", records)
    assert code == 0
    assert "MISMATCH" not in out
    assert "SK/GK" in out


def test_sweep_with_skips_exits_two(capsys, tmp_path):
    config, records = write_config(tmp_path, knots=["trefoil_r"],
                                   tasks=["count", "property_t"])
    code, out, _ = run(capsys, "sweep", "--config", config)
    assert code == 2
    assert "skips: 1" in out


def test_sweep_output_override(capsys, tmp_path):
    config, _ = write_config(tmp_path)
    other = str(tmp_path / "elsewhere.jsonl")
    code, _, _ = run(capsys, "sweep", "--config", config, "--output", other)
    assert code == 0
    code, out, _ = run(capsys, "report", "--records", other)
    assert code == 0


def test_report_mismatch_exits_three(capsys, tmp_path):
    path = str(tmp_path / "bad.jsonl")
    mk = lambda knot, value: ResultRecord(
        knot=knot, n=2, target="S3", task="count", status="ok", value=value,
        stats={}, timestamp="2024-01-01T00:00:00Z", engine=ENGINE,
    )
    write_records(path, [mk("SK", 6), mk("GK", 7)])
    code, out, _ = run(capsys, "report", "--records", path)
    assert code == 3
    assert "MISMATCH" in out


def test_report_json(capsys, tmp_path):
    config, records = write_config(tmp_path)
    run(capsys, "sweep", "--config", config)
    code, out, _ = run(capsys, "report", "--records", records, "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert all(row["outcome"] == "match" for row in payload["rows"])


def test_report_missing_file_is_error(capsys, tmp_path):
    code, _, err = run(capsys, "report", "--records", str(tmp_path / "nope.jsonl"))
    assert code == 1
    assert err.startswith("error:")
