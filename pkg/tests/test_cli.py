import io
import json

from curvecount import cli, forms


def run(args):
    buf = io.StringIO()
    code = cli.main(args, stdout=buf)
    return code, buf.getvalue()


def test_tamagawa_command():
    code, out = run(["tamagawa", "--r", "3", "--q", "2", "--D", "0"])
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == "curvecount/v1"
    assert doc["rows"][0]["tau"] == "128"
    assert doc["rows"][0]["tau_dec"] == "128.000000000"
    assert doc["rows"][0]["hyp_q_gt_C3"] is False


def test_count_command_by_class():
    code, out = run(["count", "--q", "2", "--r", "3",
                     "--cls", "3; 2 2 -1 -1 -1", "--D", "8"])
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["h"] == 5
    assert row["sections"] == 0 and row["morphisms"] == 0
    assert row["k"] == "1,1,1"
    assert row["ratio"] == "0"
    assert row["hyp_q_gt_C3"] is False


def test_count_command_by_invariants():
    code, out = run(["count", "--q", "2", "--r", "3",
                     "--a", "0", "--a-prime", "0", "--k", "0,0,0"])
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["sections"] == 6


def test_scan_round_trip(tmp_path):
    code, out = run(["scan", "--q", "2", "--r", "3", "--hmax", "2", "--format", "csv"])
    assert code == 0
    config, rows = cli.parse_report(out)
    assert config["hmax"] == "2"
    assert len(rows) == 5
    assert all(r["sections"] == "0" for r in rows)
    code, out_json = run(["scan", "--q", "2", "--r", "3", "--hmax", "2"])
    _, rows_json = cli.parse_report(out_json)
    assert [r["class"] for r in rows_json] == [r["class"] for r in rows]


def test_scan_deterministic_across_jobs(tmp_path):
    outs = []
    for jobs in ("1", "2"):
        path = tmp_path / f"scan-{jobs}.json"
        code, _ = run(["scan", "--q", "2", "--r", "3", "--hmax", "3",
                       "--jobs", jobs, "--out", str(path)])
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_scan_eps_cone():
    code, out = run(["scan", "--q", "2", "--r", "3", "--hmax", "5",
                     "--cone", "eps:1/160"])
    assert code == 0
    rows = json.loads(out)["rows"]
    assert [r["class"] for r in rows] == ["3; 2 2 -1 -1 -1"]


def test_scan_include_zero_notes_model_count():
    code, out = run(["scan", "--q", "2", "--r", "3", "--hmax", "0", "--include-zero"])
    assert code == 0
    rows = json.loads(out)["rows"]
    assert len(rows) == 1
    assert rows[0]["morphisms"] == 6
    assert "model count" in rows[0]["note"]


def test_converge_command():
    code, out = run(["converge", "--q", "2", "--r", "3",
                     "--cls", "3; 2 2 -1 -1 -1", "--mmax", "2", "--D", "12"])
    assert code == 0
    doc = json.loads(out)
    assert [r["m"] for r in doc["rows"]] == [1, 2]
    assert doc["rows"][1]["h"] == 10
    assert doc["meta"]["tau_D"] == 12
    assert [r["depth_margin"] for r in doc["rows"]] == ["-3/8", "-1/4"]


def test_audit_upper_command():
    code, out = run(["audit-upper", "--q", "2", "--r", "3", "--hmax", "3"])
    assert code == 0
    doc = json.loads(out)
    assert doc["meta"]["violations"] == 0
    assert all(r["ok"] for r in doc["rows"])


def test_limits_command():
    code, out = run(["limits", "--r", "3", "--q", "3", "--n-max", "2"])
    assert code == 0
    doc = json.loads(out)
    assert doc["meta"]["passed"] is True
    assert len(doc["rows"]) == 2


def test_cones_command():
    code, out = run(["cones", "--r", "3", "--list-data"])
    assert code == 0
    doc = json.loads(out)
    row = doc["rows"][0]
    assert row["minus_one_classes"] == 10
    assert row["conic_classes"] == 5
    assert row["blow_down_data"] == 20
    assert row["ell_minus_k"] == "1/32"
    assert len(doc["meta"]["blow_down_rows"]) == 20
    assert all(d["fiber_margin_minus_k"] == 1 for d in doc["meta"]["blow_down_rows"])


def test_admissible_command():
    code, out = run(["admissible", "--q", "2", "--cls", "3; 2 2 -1 -1 -1"])
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["ell_ratio"] == "1/160"
    assert row["hyp_q_exp_gt_C"] is False


def test_error_exit_codes(tmp_path, capsys):
    # config error: missing model flags
    assert cli.main(["count", "--cls", "3; 2 2 -1 -1 -1"], stdout=io.StringIO()) == 2
    err = capsys.readouterr().err
    assert json.loads(err)["error"]["code"] == 2
    # budget error
    code = cli.main(["count", "--q", "2", "--r", "3", "--a", "3", "--a-prime", "3",
                     "--k", "0,0,0", "--budget", "100"], stdout=io.StringIO())
    assert code == 3
    err = capsys.readouterr().err
    assert json.loads(err)["error"]["estimate"] == 2**16
    # invalid model file
    bad = tmp_path / "bad.model"
    bad.write_text("2 2 1\n2\n0 1 0 1\n0 1 1 1\n")
    code = cli.main(["scan", "--model", str(bad), "--hmax", "1"], stdout=io.StringIO())
    assert code == 4
    # argparse usage error
    assert cli.main(["no-such-command"], stdout=io.StringIO()) == 2
    capsys.readouterr()


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("q=2\nr=3\nhmax=2\nformat=csv\n")
    code, out = run(["scan", "--config", str(cfg)])
    assert code == 0
    config, rows = cli.parse_report(out)
    assert len(rows) == 5
    # explicit flags override the file
    code, out = run(["scan", "--config", str(cfg), "--hmax", "0"])
    config, rows = cli.parse_report(out)
    assert rows == []


def test_model_file_input(tmp_path, model_q3):
    path = tmp_path / "q3.model"
    path.write_text(forms.serialize_model(model_q3))
    code, out = run(["count", "--model", str(path), "--a", "0", "--a-prime", "0",
                     "--k", "0,0,0"])
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["sections"] == (3**2 - 1) ** 2 - 3 * (3 - 1) ** 2  # 52
    assert row["morphisms"] == 13
