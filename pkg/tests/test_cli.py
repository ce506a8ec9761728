import json

import numpy as np
import pytest

from srcf.cli import emit_report, load_report, main, parse_config, rule_check
from srcf.rng import RngStream
from srcf.rules import IntegrationScheme


class TestParseConfig:
    def test_integral_bench_defaults(self):
        cfg = parse_config(["integral-bench"])
        assert cfg.n == 6 and cfg.runs == 1000
        assert cfg.nm == {"ckf3": 1, "ckf5": 1, "sif3": 50, "sif5": 10, "qsif5": 10, "mc": 1}
        assert cfg.mc_samples == 600
        assert [s.label for s in cfg.schemes] == ["ckf3", "ckf5", "sif3", "sif5", "qsif5", "mc"]
        assert cfg.format == "csv" and cfg.seed == 0

    def test_filter_bench_defaults(self):
        cfg = parse_config(["filter-bench"])
        assert cfg.n == 10 and cfg.q == 2 and cfg.n_mc == 500 and cfg.steps == 100
        assert [s.label for s in cfg.schemes] == ["ckf3", "ckf5", "sif3", "sif5", "qsif5"]

    def test_q4_n10_flags(self):
        cfg = parse_config(["filter-bench", "--q", "4", "--n", "10"])
        assert cfg.q == 4 and cfg.n == 10

    def test_nm_overrides(self):
        cfg = parse_config(["integral-bench", "--nm", "sif5=25", "--nm", "sif3=7,qsif5=3"])
        assert cfg.nm["sif5"] == 25 and cfg.nm["sif3"] == 7 and cfg.nm["qsif5"] == 3

    def test_schemes_subset(self):
        cfg = parse_config(["integral-bench", "--schemes", "sif5,mc", "--mc-samples", "100"])
        assert [s.label for s in cfg.schemes] == ["sif5", "mc"]
        assert cfg.schemes[1].mc_samples == 100

    def test_bad_values_rejected(self):
        with pytest.raises(ValueError):
            parse_config(["integral-bench", "--runs", "0"])
        with pytest.raises(ValueError):
            parse_config(["integral-bench", "--nm", "sif5=0"])
        with pytest.raises(ValueError):
            parse_config(["integral-bench", "--schemes", "ukf"])

    def test_seed_env_fallback(self, monkeypatch):
        monkeypatch.setenv("SRCF_SEED", "77")
        assert parse_config(["integral-bench"]).seed == 77
        assert parse_config(["integral-bench", "--seed", "5"]).seed == 5

    def test_config_file_and_flag_precedence(self, tmp_path):
        path = tmp_path / "bench.cfg"
        path.write_text("n = 8\nruns = 12\nnm = sif5=4\nformat = json\n")
        cfg = parse_config(["integral-bench", "--config", str(path), "--runs", "3"])
        assert cfg.n == 8          # from file
        assert cfg.runs == 3       # flag wins
        assert cfg.nm["sif5"] == 4
        assert cfg.format == "json"

    def test_unknown_config_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("bogus = 1\n")
        with pytest.raises(ValueError, match="unknown config key"):
            parse_config(["integral-bench", "--config", str(path)])


class TestRuleCheck:
    def test_sif5_exact_to_degree_five(self):
        rep = rule_check(4, IntegrationScheme.from_label("sif5"), 100, RngStream(1))
        within = [r["max_abs_deviation"] for r in rep.rows if r["degree"] <= 5]
        assert max(within) < 1e-9
        assert rep.meta["degree_plus_one_inexact"] is True
        assert rep.meta["min_over_draws_worst_deviation_at_degree_plus_one"] > 1e-3

    def test_ckf3_fourth_moment_gap(self):
        n = 4
        rep = rule_check(n, IntegrationScheme.from_label("ckf3"), 10, RngStream(2))
        within = [r["max_abs_deviation"] for r in rep.rows if r["degree"] <= 3]
        assert max(within) < 1e-12
        row4 = next(r for r in rep.rows if r["degree"] == 4)
        # the 2n-point rule gives n for the fourth moment (truth 3)
        assert abs(row4["max_abs_deviation"] - (n - 3.0)) < 1e-12

    def test_mc_rejected(self):
        with pytest.raises(ValueError):
            rule_check(3, IntegrationScheme.from_label("mc", mc_samples=10), 5, RngStream(0))


class TestEmitAndLoad:
    def test_integral_csv_schema(self, tmp_path):
        out = tmp_path / "report.csv"
        code = main([
            "integral-bench", "--runs", "5", "--n", "4",
            "--schemes", "ckf3,sif5", "--seed", "3", "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text().splitlines()
        header_idx = next(i for i, l in enumerate(lines) if not l.startswith("#"))
        assert lines[header_idx] == "scheme,re_max_pct,re_mean_pct,n_m,points"
        assert lines[header_idx + 1].startswith("ckf3,")
        assert any(l.startswith("# seed: 3") for l in lines)

    def test_filter_csv_schema(self, tmp_path):
        out = tmp_path / "rmse.csv"
        code = main([
            "filter-bench", "--n", "2", "--q", "1", "--steps", "4", "--nmc", "3",
            "--schemes", "ckf3,sif5", "--seed", "4", "--out", str(out),
        ])
        assert code == 0
        meta, rows = load_report(str(out))
        assert [r["scheme"] for r in rows] == ["ckf3"] * 4 + ["sif5"] * 4
        assert [int(r["k"]) for r in rows] == [1, 2, 3, 4, 1, 2, 3, 4]
        assert all(float(r["rmse"]) > 0 for r in rows)

    def test_json_round_trip(self, tmp_path):
        out = tmp_path / "report.json"
        code = main([
            "integral-bench", "--runs", "4", "--n", "4", "--schemes", "sif3",
            "--seed", "5", "--format", "json", "--out", str(out),
        ])
        assert code == 0
        meta, rows = load_report(str(out))
        assert meta["command"] == "integral-bench"
        assert meta["seed"] == 5
        assert rows[0]["scheme"] == "sif3"
        # a reload of the emitted file reproduces the document exactly
        doc = json.loads(out.read_text())
        assert doc == {"meta": meta, "rows": rows}

    def test_rule_check_output(self, tmp_path):
        out = tmp_path / "check.json"
        code = main([
            "rule-check", "--n", "3", "--schemes", "ckf5,sif3", "--runs", "20",
            "--seed", "6", "--format", "json", "--out", str(out),
        ])
        assert code == 0
        meta, rows = load_report(str(out))
        assert meta["schemes"]["ckf5"]["rule_degree"] == 5
        assert meta["schemes"]["sif3"]["rule_degree"] == 3
        degrees = [r["degree"] for r in rows if r["scheme"] == "ckf5"]
        assert degrees == list(range(7))


class TestDeterminism:
    def test_same_seed_same_bytes(self, tmp_path):
        args = ["integral-bench", "--runs", "20", "--n", "4", "--seed", "9",
                "--schemes", "sif5,mc", "--mc-samples", "50"]
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_worker_count_same_bytes(self, tmp_path):
        args = ["filter-bench", "--n", "2", "--q", "1", "--steps", "5", "--nmc", "6",
                "--schemes", "sif3,ckf3", "--seed", "10"]
        out1, out2 = tmp_path / "w1.csv", tmp_path / "w4.csv"
        assert main(args + ["--out", str(out1), "--workers", "1"]) == 0
        assert main(args + ["--out", str(out2), "--workers", "4"]) == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestExitCodes:
    def test_bad_value_returns_2(self):
        assert main(["integral-bench", "--runs", "0"]) == 2

    def test_unwritable_out_returns_1(self, tmp_path):
        code = main([
            "integral-bench", "--runs", "2", "--n", "4", "--schemes", "ckf3",
            "--out", str(tmp_path / "missing-dir" / "x.csv"),
        ])
        assert code == 1
