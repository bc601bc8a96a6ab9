import csv
import json


from stormspar.cli import main, run


def test_solve_reports_and_succeeds():
    code, out = run(["solve", "--n", "100", "--s", "10", "--m", "230",
                     "--sigma", "0.01", "--seed", "1"])
    assert code == 0
    assert "rel_error:" in out and "termination:" in out and "step_norm_trace:" in out


def test_solve_sparsity_exceeds_dimension(capsys):
    code, _ = run(["solve", "--n", "10", "--s", "11"])
    assert code == 2
    assert "sparsity exceeds dimension" in capsys.readouterr().err


def test_solve_deterministic_minus_timing():
    args = ["solve", "--n", "60", "--s", "4", "--seed", "9", "--output", "json"]
    a = json.loads(run(args)[1])
    b = json.loads(run(args)[1])
    a.pop("wall_time"), b.pop("wall_time")
    assert a == b


def test_solve_csv_row():
    code, out = run(["solve", "--n", "60", "--s", "4", "--seed", "2", "--output", "csv"])
    rows = list(csv.DictReader(out.splitlines()))
    assert len(rows) == 1 and "rel_error" in rows[0]
    assert "e" in rows[0]["rel_error"]
    assert out.endswith("\n")


def test_env_seed_fallback(monkeypatch):
    monkeypatch.setenv("STORMSPAR_SEED", "17")
    a = json.loads(run(["solve", "--n", "50", "--s", "3", "--output", "json"])[1])
    b = json.loads(run(["solve", "--n", "50", "--s", "3", "--seed", "17", "--output", "json"])[1])
    assert a["seed"] == 17 and a["rel_error"] == b["rel_error"]
    monkeypatch.setenv("STORMSPAR_SEED", "x")
    assert run(["solve"])[0] == 2


def test_bad_config_and_usage(tmp_path):
    assert run(["solve", "--config", str(tmp_path / "missing.json")])[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["table", "--config", str(bad)])[0] == 2
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"flavour": 1}))
    assert run(["table", "--config", str(unknown)])[0] == 2
    assert main(["no-such-command"]) == 2


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "spec.json"
    cfg.write_text(json.dumps({"n_values": [100, 200, 500], "s_values": [10],
                               "trials": 1, "base_seed": 3}))
    prefix = tmp_path / "dim"
    code, out = run(["table", "--config", str(cfg), "--n", "100,500",
                     "--output-path", str(prefix)])
    assert code == 0
    rows = list(csv.DictReader(open(f"{prefix}_aggregate.csv")))
    assert [r["m"] for r in rows] == ["230", "270"]
    assert {"n", "s", "m", "success_rate", "aver_iter", "mean_rel_error"} <= set(rows[0])


def test_dimension_table_rows(tmp_path):
    prefix = tmp_path / "t"
    code, _ = run(["table", "--n", "100,200,500", "--trials", "1", "--seed", "4",
                   "--output-path", str(prefix)])
    assert code == 0
    rows = list(csv.DictReader(open(f"{prefix}_aggregate.csv")))
    assert [(r["n"], r["m"]) for r in rows] == [("100", "230"), ("200", "247"), ("500", "270")]
    assert all(len(r["success_rate"].split(".")[1]) == 2 for r in rows)
    records = list(csv.DictReader(open(f"{prefix}_records.csv")))
    assert len(records) == 3


def test_phase_transition_factor_column(tmp_path):
    prefix = tmp_path / "pt"
    code, out = run(["phase-transition", "--n", "60", "--s", "2", "--trials", "1",
                     "--output-path", str(prefix)])
    assert code == 0
    rows = list(csv.DictReader(open(f"{prefix}_aggregate.csv")))
    assert [r["factor"] for r in rows] == ["1.00", "1.25", "1.50", "1.75", "2.00",
                                          "2.25", "2.50", "2.75", "3.00"]
    series = list(csv.reader(open(f"{prefix}_series_n60_s2.csv")))
    assert series[0] == ["factor", "success_rate"] and len(series) == 10


def test_noise_sweep_sigma_zero(tmp_path):
    prefix = tmp_path / "ns"
    code, _ = run(["noise-sweep", "--n", "80", "--s", "4", "--sigma", "0",
                   "--trials", "2", "--output-path", str(prefix)])
    assert code == 0
    (row,) = csv.DictReader(open(f"{prefix}_aggregate.csv"))
    assert float(row["mean_rel_error"]) < 1e-6
    assert row["snr_db"] == "inf"


def test_noise_sweep_snr_series_json(tmp_path):
    prefix = tmp_path / "nsj"
    code, _ = run(["noise-sweep", "--n", "80", "--s", "4", "--snr", "30,40",
                   "--trials", "2", "--output", "json", "--output-path", str(prefix)])
    assert code == 0
    doc = json.load(open(f"{prefix}_series_n80_s4_m{doc_m(prefix)}.json"))
    assert [r["snr_db"] for r in doc["rows"]] == [30.0, 40.0]
    agg = json.load(open(f"{prefix}_aggregate.json"))
    # round trip
    assert json.loads(json.dumps(agg)) == agg
    assert agg["spec"]["snr_db_values"] == [30.0, 40.0]


def doc_m(prefix):
    return json.load(open(f"{prefix}_aggregate.json"))["rows"][0]["m"]


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _ = run(["table", "--n", "50", "--s", "2", "--trials", "1",
                   "--output-path", str(blocker / "sub" / "out")])
    assert code == 2


def test_htp_bench(tmp_path):
    out_file = tmp_path / "bench.csv"
    code, out = run(["htp-bench", "--trials", "10", "--seed", "1",
                     "--output-path", str(out_file), "--min-rate", "0.5"])
    assert code == 0 and "match_rate" in out
    rows = list(csv.DictReader(open(out_file)))
    assert len(rows) == 10
    assert run(["htp-bench", "--s", "30"])[0] == 2
