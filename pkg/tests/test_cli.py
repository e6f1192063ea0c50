import json
import os
import socket

import pytest
from conftest import GOLDEN, RAMP_PROFILE, SEEDS

from adaptcrawl.cli import main
from adaptcrawl.config import ConfigError, build_run_config, parse_config_text

# short ramp session: the golden files pin its exact output
GOLDEN_ARGS = ["--mode", "sim", "--seeds", str(SEEDS), "--profile", str(RAMP_PROFILE), "--seed", "7",
               "--budget-sec", "2000"]
GOLDEN_FILES = ("summary.json", "crawl_log.csv", "error_trace.csv", "speed_trace.csv", "thread_trace.csv")
REGEN = os.environ.get("ADAPTCRAWL_REGEN_GOLDEN") == "1"


def golden_run(out):
    assert main(["run", *GOLDEN_ARGS, "--out", str(out)]) == 0
    assert main(["trace", str(out / "crawl_log.csv"), "--out", str(out), "--no-plots"]) == 0


def write_log(path, rows):
    path.write_text("t_sec,iwm_id,c_si,xi_cs,e_cs_sign,p_t,l_igh,l_d\n" + "".join(r + "\n" for r in rows))
    return path


class TestRun:
    def test_matches_golden(self, tmp_path):
        golden_run(tmp_path)
        if REGEN:
            GOLDEN.mkdir(exist_ok=True)
            for name in GOLDEN_FILES:
                (GOLDEN / name).write_bytes((tmp_path / name).read_bytes())
        for name in GOLDEN_FILES:
            assert (tmp_path / name).read_bytes() == (GOLDEN / name).read_bytes(), name

    def test_rerun_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["run", *GOLDEN_ARGS, "--budget-sec", "600", "--out", str(out)]) == 0
            assert main(["trace", str(out / "crawl_log.csv"), "--out", str(out)]) == 0
        for name in (*GOLDEN_FILES, "url_store.jsonl", "doc_tab.jsonl", "traces.png"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_summary_fields(self, tmp_path):
        assert main(["run", *GOLDEN_ARGS, "--budget-sec", "300", "--out", str(tmp_path)]) == 0
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["total_visited"] > 0
        assert summary["final_p_t"]["iwm0"] >= 1
        assert summary["mode"] == "sim"

    def test_missing_profile(self, tmp_path, capsys):
        rc = main(["run", "--mode", "sim", "--seeds", str(SEEDS), "--out", str(tmp_path)])
        assert rc != 0
        assert "profile" in capsys.readouterr().err

    def test_bad_flag_value(self, tmp_path, capsys):
        assert main(["run", *GOLDEN_ARGS, "--threads-max", "many", "--out", str(tmp_path)]) != 0
        assert "--threads-max" in capsys.readouterr().err

    def test_config_error_names_line(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("mode = sim\nlist_limit = twenty\n")
        assert main(["run", "--config", str(cfg)]) != 0
        assert "run.cfg:2" in capsys.readouterr().err

    def test_unknown_topic(self, tmp_path, capsys):
        seeds = tmp_path / "seeds.tsv"
        seeds.write_text("cooking\t2\thttp://site0000001.sim/\n")
        rc = main(["run", "--seeds", str(seeds), "--profile", str(RAMP_PROFILE), "--out", str(tmp_path / "o")])
        assert rc != 0
        assert "cooking" in capsys.readouterr().err

    def test_live_unreachable_seed(self, tmp_path):
        with socket.socket() as s:
            s.bind(("127.0.0.1", 0))
            port = s.getsockname()[1]
        seeds = tmp_path / "seeds.tsv"
        seeds.write_text(f"news\t2\thttp://127.0.0.1:{port}/\n")
        out = tmp_path / "out"
        assert main(["run", "--mode", "live", "--seeds", str(seeds), "--timeout", "2", "--out", str(out)]) == 0
        assert json.loads((out / "summary.json").read_text())["total_visited"] == 0


class TestConfigMerge:
    def test_flags_override_file(self):
        file_values = parse_config_text("mode=sim\nseeds=a.tsv\nprofile=p.csv\nthreads_max=9\n")
        cfg = build_run_config(file_values, {"threads_max": 4})
        assert cfg.threads_max == 4 and cfg.seeds == "a.tsv"

    def test_auto_threshold_overrides_file(self):
        file_values = parse_config_text("seeds=a.tsv\nprofile=p.csv\nspeed_threshold=2.5\n")
        assert build_run_config(file_values, {"speed_threshold": None}).speed_threshold is None

    def test_web_keys(self):
        cfg = build_run_config(parse_config_text("seeds=a\nprofile=p\nweb.pages_per_site=9\n"), {})
        assert cfg.synthetic_web().pages_per_site == 9

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="<config>:1"):
            parse_config_text("colour=blue\n")


class TestTrace:
    def test_empty_log(self, tmp_path):
        log = write_log(tmp_path / "crawl_log.csv", [])
        assert main(["trace", str(log), "--out", str(tmp_path)]) == 0
        for name in ("error_trace.csv", "speed_trace.csv", "thread_trace.csv"):
            assert len((tmp_path / name).read_text().splitlines()) == 1

    def test_decreasing_time(self, tmp_path, capsys):
        log = write_log(tmp_path / "crawl_log.csv", ["5.0,iwm0,1.0,0.1,0,2,1,0", "3.0,iwm0,1.0,0.1,0,2,1,0"])
        assert main(["trace", str(log), "--out", str(tmp_path)]) != 0
        assert "row 3" in capsys.readouterr().err

    def test_bucketing(self, tmp_path):
        log = write_log(tmp_path / "crawl_log.csv", [
            "10.0,iwm0,1.0,0.5,0,2,1,0", "50.0,iwm0,3.0,0.25,-1,3,1,1", "150.0,iwm0,2.0,0.125,1,2,1,2"])
        assert main(["trace", str(log), "--out", str(tmp_path), "--no-plots"]) == 0
        speed = (tmp_path / "speed_trace.csv").read_text().splitlines()
        assert speed[1:] == ["0.0,iwm0,2.0,2", "100.0,iwm0,2.0,1"]
        threads = (tmp_path / "thread_trace.csv").read_text().splitlines()
        assert threads[1] == "0.0,iwm0,3,2"


class TestScale:
    def test_identity(self, tmp_path):
        prof = tmp_path / "flat.csv"
        prof.write_text("t_sec,kb_per_sec\n0,40\n")
        log = write_log(tmp_path / "crawl_log.csv", ["1.0,iwm0,1.25,0,0,1,1,0", "2.0,iwm0,0.5,0,0,1,1,0"])
        assert main(["scale", str(log), "--profile", str(prof), "--target-bw-kbps", "40",
                     "--out", str(tmp_path), "--no-plots"]) == 0
        rows = (tmp_path / "scaled_speed.csv").read_text().splitlines()[1:]
        assert [r.split(",")[-1] for r in rows] == ["1.25", "0.5"]

    def test_single_point(self, tmp_path, capsys):
        log = write_log(tmp_path / "crawl_log.csv", ["7500.0,iwm0,0.8,0,0,1,1,0"])
        assert main(["scale", str(log), "--profile", str(RAMP_PROFILE), "--out", str(tmp_path), "--no-plots"]) == 0
        summary = json.loads((tmp_path / "scale_summary.json").read_text())
        assert summary["min"] == summary["max"] == summary["mean"] == pytest.approx(0.8 * 250000 / 10)

    def test_no_overlap(self, tmp_path, capsys):
        prof = tmp_path / "short.csv"
        prof.write_text("0,10\n100,5\n")
        log = write_log(tmp_path / "crawl_log.csv", ["500.0,iwm0,0.8,0,0,1,1,0"])
        assert main(["scale", str(log), "--profile", str(prof), "--out", str(tmp_path)]) != 0
        assert "span" in capsys.readouterr().err

    def test_writes_plot(self, tmp_path):
        log = write_log(tmp_path / "crawl_log.csv", ["10.0,iwm0,0.8,0,0,1,1,0", "20.0,iwm0,0.7,0,0,1,1,0"])
        assert main(["scale", str(log), "--profile", str(RAMP_PROFILE), "--out", str(tmp_path)]) == 0
        assert (tmp_path / "scaling.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
