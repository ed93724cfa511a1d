import json
import math
from pathlib import Path

import pytest

from sparsedge import cli
from sparsedge.cli import ConfigError, parse_config, run


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

def test_parse_minimal_rigidity_config():
    config = parse_config("command = rigidity\nN = 1000,2000\nb = 0.2\nM = 200\n")
    assert config.command == "rigidity"
    assert config.N == [1000, 2000]
    assert config.family == "signed-sparse"  # defaulting rule
    assert config.M == 200


def test_parse_rejects_b_out_of_range():
    with pytest.raises(ConfigError, match=r"\(0, 0.5\)"):
        parse_config("command = rigidity\nb = 0.6\n")


def test_parse_rejects_negative_m():
    with pytest.raises(ConfigError, match="'M'"):
        parse_config("command = rigidity\nM = -1\n")


def test_parse_unknown_key_names_line():
    with pytest.raises(ConfigError, match="line 3"):
        parse_config("command = density\nb = 0.2\nbogus = 1\n")


def test_parse_duplicate_key_rejected():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config("command = density\nb = 0.2\nb = 0.3\n")


def test_parse_comments_and_overrides():
    config = parse_config("command = density  # semicircle\n# full line comment\n",
                          overrides={"M": "7", "plots": "off"})
    assert config.M == 7
    assert config.plots is False


def test_flag_override_beats_file(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("command = model\nZ = 1.0, 0.0\nout = /nonexistent\n")
    out = tmp_path / "o"
    out.mkdir()
    code = cli.main([str(cfg), "--out", str(out), "--plots", "off"])
    assert code == 0
    assert (out / "model_summary.json").exists()


# ---------------------------------------------------------------------------
# Commands end to end
# ---------------------------------------------------------------------------

def _run(tmp_path, text, sub="out"):
    out = tmp_path / sub
    out.mkdir(exist_ok=True)
    config = parse_config(text + f"\nout = {out}\n")
    return run(config), out


def test_density_semicircle_csv(tmp_path):
    code, out = _run(tmp_path, "command = density\nZ = 1.0, 0.0\n"
                               "x_min = -3\nx_max = 3\nx_count = 7\n")
    assert code == 0
    lines = (out / "density_samples_grid.csv").read_text().splitlines()
    assert lines[0].startswith("schema_version")
    header = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:]]
    x_idx, rho_idx = header.index("x"), header.index("rho")
    at_zero = [r for r in rows if float(r[x_idx]) == 0.0]
    assert len(at_zero) == 1
    assert abs(float(at_zero[0][rho_idx]) - 1.0 / math.pi) <= 1e-6
    assert (out / "density_fig.png").exists()
    assert (out / "density_meta.json").exists()


def test_density_rerun_byte_identical(tmp_path):
    text = "command = density\nZ = 1.0, 0.1\nx_count = 21\nplots = off\n"
    _, out = _run(tmp_path, text, "a")
    before = {p.name: p.read_bytes() for p in out.iterdir()
              if not p.name.endswith("_meta.json")}
    _run(tmp_path, text, "a")
    after = {p.name: p.read_bytes() for p in out.iterdir()
             if not p.name.endswith("_meta.json")}
    assert before == after


def test_fluct_rerun_byte_identical(tmp_path):
    text = ("command = fluct\nN = 80\nb = 0.3\nscale = 1.0\nc_min = 0.02\n"
            "M = 500\nplots = off\nmaster_seed = 4\nworkers = 1\n")
    _, out = _run(tmp_path, text, "w")
    before = {p.name: p.read_bytes() for p in out.iterdir()
              if not p.name.endswith("_meta.json")}
    _, _ = _run(tmp_path, text.replace("workers = 1", "workers = 2"), "w2")
    # identical rerun in place
    _run(tmp_path, text, "w")
    after = {p.name: p.read_bytes() for p in out.iterdir()
             if not p.name.endswith("_meta.json")}
    assert before == after
    # worker count must not change any payload other than its own echo
    t1 = (out / "fluct_samples_N80.csv").read_bytes()
    t2 = (tmp_path / "w2" / "fluct_samples_N80.csv").read_bytes()
    assert t1 == t2


def test_missing_output_dir_exits_one_no_partial_files(tmp_path):
    config = parse_config("command = density\n" f"out = {tmp_path / 'nope'}\n")
    assert run(config) == 1
    assert not (tmp_path / "nope").exists()
    assert list(tmp_path.iterdir()) == []


def test_model_command_semicircle(tmp_path):
    code, out = _run(tmp_path, "command = model\nZ = 1.0, 0.0\nplots = off\n")
    assert code == 0
    payload = json.loads((out / "model_summary.json").read_text())
    model = payload["aggregates"]["model"]
    assert model["tau"] == 1.0
    assert model["L_root"] == 2.0
    assert model["L_series"] == 2.0


def test_model_command_degenerate_is_error(tmp_path):
    code, out = _run(tmp_path, "command = model\nZ = 1.0, -0.4\nplots = off\n")
    assert code == 1


def test_sample_command_writes_binaries(tmp_path):
    code, out = _run(tmp_path, "command = sample\nN = 12\nb = 0.3\nM = 3\n"
                               "scale = 1.0\nc_min = 0.0\nplots = off\n")
    assert code == 0
    bins = sorted(out.glob("sample_N12_*.bin"))
    assert len(bins) == 3
    assert bins[0].stat().st_size == 8 + 8 * 12 * 12


def test_spectrum_command(tmp_path):
    code, out = _run(tmp_path, "command = spectrum\nN = 16\nb = 0.3\nM = 2\n"
                               "scale = 1.0\nc_min = 0.0\nplots = off\n")
    assert code == 0
    lines = (out / "spectrum_samples_N16.csv").read_text().splitlines()
    assert len(lines) == 2 + 2 * 16


def test_fluct_contract_failure_exits_two(tmp_path):
    code, out = _run(tmp_path, "command = fluct\nN = 100\nb = 0.3\nscale = 1.0\n"
                               "c_min = 0.02\nM = 500\ncorr_floor = 0.999\n"
                               "plots = off\nmaster_seed = 3\n")
    assert code == 2
    payload = json.loads((out / "fluct_summary.json").read_text())
    assert payload["contract"]["pass"] is False
    assert payload["config"]["corr_floor"] == 0.999


def test_corrections_command_multi_n_scaling(tmp_path):
    code, out = _run(tmp_path, "command = corrections\nN = 100,800\nb = 0.3\n"
                               "M = 120\nmaster_seed = 2\nplots = off\nell = 1\n")
    payload = json.loads((out / "corrections_summary.json").read_text())
    assert "scaling" in payload["aggregates"]
    fit = payload["aggregates"]["scaling"]
    assert fit["n"] == 1
    assert code in (0, 2)  # exponent window is a statistical contract
    assert (out / "corrections_samples_N100.csv").exists()


def test_rigidity_cli_files_per_n(tmp_path):
    code, out = _run(tmp_path, "command = rigidity\nN = 100,200\nb = 0.3\n"
                               "scale = 1.0\nc_min = 0.02\nM = 50\nplots = on\n")
    for n in (100, 200):
        assert (out / f"rigidity_samples_N{n}.csv").exists()
        assert (out / f"rigidity_report_N{n}.json").exists()
        assert (out / f"rigidity_plotdata_N{n}.csv").exists()
    assert (out / "rigidity_summary.json").exists()
    assert (out / "rigidity_fig_N100.png").exists()
    assert (out / "rigidity_fig_trend.png").exists()
    assert code in (0, 2)


def test_cli_main_with_config_file(tmp_path):
    out = tmp_path / "out"
    out.mkdir()
    cfg = tmp_path / "density.cfg"
    cfg.write_text(f"command = density\nZ = 1.0, 0.0\nx_count = 5\nout = {out}\n"
                   "plots = off\n")
    assert cli.main([str(cfg)]) == 0


def test_cli_main_unknown_flag_rejected():
    with pytest.raises(SystemExit):
        cli.main(["--bogus", "1"])
