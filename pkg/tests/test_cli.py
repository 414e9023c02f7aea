"""Config parsing, the experiment runner, report merging, and the CLI."""

import json
import math
import os

import pytest

from banach.cli import main
from banach.config import ConfigError, load_config, parse_config
from banach.reporting import (
    format_value,
    markdown_report,
    merge_reports,
    read_csv,
)
from banach.runner import run
from banach.svgplot import render_plot


def _base_config(**over):
    cfg = {
        "experiment": "stats",
        "body": {"kind": "pnorm", "p": 2, "dim": 8},
        "grid": {"n": [8]},
        "seeds": [1, 2],
        "samples": 500,
    }
    cfg.update(over)
    return cfg


def _write(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj, indent=1))
    return str(path)


# ---------------------------------------------------------------- parsing

def test_parse_minimal_config():
    cfg = parse_config(_base_config())
    assert cfg.experiment == "stats"
    assert cfg.seeds == (1, 2)
    assert len(cfg.config_hash) == 16


def test_unknown_top_level_key_rejected():
    with pytest.raises(ConfigError, match="unknown"):
        parse_config(_base_config(bogus=1))


def test_unknown_constant_rejected():
    with pytest.raises(ConfigError, match="constant"):
        parse_config(_base_config(constants={"not_a_knob": 2.0}))


def test_unknown_experiment_rejected():
    with pytest.raises(ConfigError):
        parse_config(_base_config(experiment="warp"))


def test_missing_grid_key_rejected():
    cfg = _base_config(experiment="lemma1")
    with pytest.raises(ConfigError, match="t"):
        parse_config(cfg)


def test_bad_eps_rejected():
    cfg = _base_config(experiment="blocks",
                       grid={"n": [8], "eps": [1.5]})
    with pytest.raises(ConfigError, match="eps"):
        parse_config(cfg)


def test_negative_seed_rejected():
    with pytest.raises(ConfigError, match="seed"):
        parse_config(_base_config(seeds=[-1]))


def test_samples_floor_rejected():
    with pytest.raises(ConfigError, match="samples"):
        parse_config(_base_config(samples=10))


def test_body_dim_must_match_grid():
    cfg = _base_config(body={"kind": "polytope",
                             "facets": [[1.0, 0.0], [-1.0, 0.0],
                                        [0.0, 1.0], [0.0, -1.0]]})
    with pytest.raises(ConfigError, match="dim"):
        parse_config(cfg)


def test_json_error_carries_line_number(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n "experiment": "stats",\n}\n')
    with pytest.raises(ConfigError, match="line"):
        load_config(str(path))


def test_config_error_names_offending_line(tmp_path):
    path = _write(tmp_path, _base_config(bogus=1))
    with pytest.raises(ConfigError, match=r"line \d+"):
        load_config(str(path))


def test_hash_ignores_whitespace_and_seeds(tmp_path):
    a = load_config(_write(tmp_path, _base_config(), "a.json"))
    ugly = json.dumps(_base_config(seeds=[77]), indent=7)
    path_b = tmp_path / "b.json"
    path_b.write_text(ugly)
    b = load_config(str(path_b))
    assert a.config_hash == b.config_hash


def test_hash_tracks_substance():
    a = parse_config(_base_config())
    b = parse_config(_base_config(samples=600))
    assert a.config_hash != b.config_hash


def test_body_for_substitutes_pnorm_dim():
    cfg = parse_config(_base_config(grid={"n": [4, 8]}))
    body, contacts = cfg.body_for(4)
    assert body.dim == 4
    assert contacts is None


def test_john_flag_positions_body():
    cfg = parse_config(_base_config(
        body={"kind": "pnorm", "p": 1, "dim": 8}, john=True))
    body, contacts = cfg.body_for(8)
    import numpy as np
    assert np.allclose(body.weights, np.full(8, 8 ** -0.5))
    assert contacts is not None


# ----------------------------------------------------------------- runner

def test_run_writes_deterministic_csv(tmp_path):
    cfg = parse_config(_base_config())
    r1 = run(cfg, out_dir=str(tmp_path / "a"))
    r2 = run(cfg, out_dir=str(tmp_path / "b"))
    b1 = open(r1.csv_path, "rb").read()
    b2 = open(r2.csv_path, "rb").read()
    assert b1 == b2
    assert b"\r" not in b1
    cols, rows = read_csv(r1.csv_path)
    assert cols[:3] == ("experiment", "body", "n")
    assert cols[-4:] == ("pass", "seed", "version", "config_hash")
    assert len(rows) == 2


def test_run_threads_agree(tmp_path):
    cfg = parse_config(_base_config(seeds=[1, 2, 3, 4]))
    r1 = run(cfg, out_dir=str(tmp_path / "t1"), threads=1)
    r4 = run(cfg, out_dir=str(tmp_path / "t4"), threads=4)
    assert open(r1.csv_path, "rb").read() == open(r4.csv_path, "rb").read()


def test_run_seed_override(tmp_path):
    cfg = parse_config(_base_config())
    res = run(cfg, out_dir=str(tmp_path), seed_override=9)
    _, rows = read_csv(res.csv_path)
    assert [r["seed"] for r in rows] == ["9"]


def test_run_json_summary(tmp_path):
    cfg = parse_config(_base_config())
    res = run(cfg, out_dir=str(tmp_path))
    summary = json.load(open(res.json_path))
    assert summary["config_hash"] == cfg.config_hash
    assert summary["rows"] == 2
    assert len(summary["cells"]) == 2
    assert summary["wall_ms_total"] >= 0
    cols, _ = read_csv(res.csv_path)
    assert "wall_ms" not in cols


def test_run_emits_plot(tmp_path):
    cfg = parse_config({
        "experiment": "lemma1",
        "body": {"kind": "pnorm", "p": 2, "dim": 8},
        "grid": {"n": [8], "t": [1.0, 2.0]},
        "seeds": [3],
        "samples": 400,
    })
    res = run(cfg, out_dir=str(tmp_path), plot=True)
    assert res.svg_paths
    text = open(res.svg_paths[0]).read()
    assert text.startswith("<svg") and "polyline" in text


# ------------------------------------------------------------------ merge

def _run_seeds(tmp_path, seeds, sub):
    cfg = parse_config(_base_config(seeds=seeds))
    return run(cfg, out_dir=str(tmp_path / sub))


def test_merge_union_of_disjoint_seeds(tmp_path):
    r1 = _run_seeds(tmp_path, [1, 2], "a")
    r2 = _run_seeds(tmp_path, [3], "b")
    merged = merge_reports([r1.csv_path, r2.csv_path])
    rows = merged["stats"]["rows"]
    assert len(rows) == 3
    assert sorted(r["seed"] for r in rows) == ["1", "2", "3"]


def test_merge_refuses_different_configs(tmp_path):
    r1 = _run_seeds(tmp_path, [1], "a")
    cfg2 = parse_config(_base_config(samples=600))
    r2 = run(cfg2, out_dir=str(tmp_path / "b"))
    with pytest.raises(ConfigError):
        merge_reports([r1.csv_path, r2.csv_path])


def test_markdown_report_lists_experiment(tmp_path):
    res = _run_seeds(tmp_path, [1, 2], "a")
    text = markdown_report(merge_reports([res.csv_path]))
    assert "stats" in text
    assert text.count("|") > 4


# -------------------------------------------------------------------- cli

def test_cli_run_ok(tmp_path, capsys):
    path = _write(tmp_path, _base_config())
    rc = main(["run", path, "--out", str(tmp_path / "out")])
    assert rc == 0
    assert (tmp_path / "out").is_dir()
    assert any(f.suffix == ".csv" for f in (tmp_path / "out").iterdir())


def test_cli_validate_ok(tmp_path, capsys):
    path = _write(tmp_path, _base_config())
    assert main(["validate", path]) == 0
    assert "ok" in capsys.readouterr().out


def test_cli_bad_config_exit_2(tmp_path, capsys):
    path = _write(tmp_path, _base_config(bogus=1))
    assert main(["run", path, "--out", str(tmp_path / "out")]) == 2
    assert "bogus" in capsys.readouterr().err


def test_cli_missing_file_exit_2(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.json")]) == 2


def test_cli_runtime_failure_exit_3(tmp_path, capsys):
    # kashin requires an even dimension; n=9 passes config validation
    # (pnorm dim tracks the grid) but fails at run time
    cfg = {
        "experiment": "kashin",
        "body": {"kind": "pnorm", "p": 1, "dim": 9},
        "grid": {"n": [9]},
        "seeds": [1],
        "samples": 200,
    }
    path = _write(tmp_path, cfg)
    rc = main(["run", path, "--out", str(tmp_path / "out")])
    assert rc == 3
    err = capsys.readouterr().err
    assert "partial" in err


def test_cli_report_roundtrip(tmp_path, capsys):
    path = _write(tmp_path, _base_config())
    assert main(["run", path, "--out", str(tmp_path / "out")]) == 0
    csvs = [str(f) for f in (tmp_path / "out").iterdir()
            if f.suffix == ".csv"]
    assert main(["report", *csvs]) == 0
    out = capsys.readouterr().out
    assert "| stats" in out or "stats" in out


def test_cli_threads_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("BANACH_THREADS", "2")
    path = _write(tmp_path, _base_config())
    assert main(["run", path, "--out", str(tmp_path / "out")]) == 0


# ------------------------------------------------------------------- plots

def test_render_plot_svg_shape():
    svg = render_plot([("a", [1, 2, 3], [1.0, 0.5, 0.25])],
                      title="x", xlabel="t", ylabel="v", logy=True)
    assert svg.startswith("<svg")
    assert svg.rstrip().endswith("</svg>")
    assert "polyline" in svg


def test_render_plot_needs_finite_data():
    with pytest.raises(ValueError):
        render_plot([("a", [1.0], [math.nan])])


def test_format_value_round_trips_floats():
    for v in (1 / 3, 1e-17, 123456.789, math.pi):
        assert float(format_value(v)) == v
    assert format_value(None) == ""
    assert format_value(True) == "true"
    assert format_value(False) == "false"
