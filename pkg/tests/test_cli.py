"""Config parsing, CSV emission, and the command-line surface."""

import csv
import json

import pytest

from nrmlab import ConfigError, gen_single_resource, instance_to_json, make_instance
from nrmlab.cli import (
    _CSV_COLUMNS,
    load_config,
    main,
    parse_config,
    run_experiment,
)


def _base_config(**overrides):
    cfg = {
        "schema": 1,
        "experiment_id": "unit",
        "instance": {"generator": "single_resource",
                     "args": {"c_ratio": 0.8, "r1": 2.0, "r2": 1.0}},
        "policies": [{"name": "ff"}, {"name": "lpt"}],
        "k_grid": [100, 200],
        "replications": 3,
        "base_seed": 11,
    }
    cfg.update(overrides)
    return cfg


# ---------------------------------------------------------------- parsing

def test_parse_config_happy_path():
    cfg = parse_config(_base_config())
    assert cfg.experiment_id == "unit"
    assert cfg.generator == "single_resource"
    assert [p.kind for p in cfg.policies] == ["ff", "lpt"]
    assert cfg.k_grid == (100, 200)
    assert cfg.output == "unit.csv"


@pytest.mark.parametrize(
    "mutate, code",
    [
        (lambda c: c.update(schema=2), "unsupported-schema"),
        (lambda c: c.pop("schema"), "missing-key"),
        (lambda c: c.update(typo_key=1), "unknown-key"),
        (lambda c: c.pop("experiment_id"), "missing-key"),
        (lambda c: c.update(policies=[{"name": "greedy"}]), "unknown-policy"),
        (lambda c: c.update(policies=[{"name": "ff", "alpha": 0.3}]), "unknown-key"),
        (lambda c: c.update(policies=[{"name": "fd", "alpha": 0.3}]), "invalid-value"),
        (lambda c: c.update(policies=[]), "invalid-value"),
        (lambda c: c.update(k_grid=[200, 100]), "invalid-value"),
        (lambda c: c.update(k_grid=[100, 100]), "invalid-value"),
        (lambda c: c.update(replications=1), "invalid-value"),
        (lambda c: c.update(replications=2.5), "invalid-value"),
        (lambda c: c.update(base_seed=-1), "invalid-value"),
        (lambda c: c.update(instance={"generator": "exotic"}), "invalid-value"),
        (lambda c: c.update(
            instance={"generator": "single_resource", "args": {"c": 1}}),
         "unknown-key"),
    ],
)
def test_parse_config_fails_closed(mutate, code):
    cfg = _base_config()
    mutate(cfg)
    with pytest.raises(ConfigError) as exc:
        parse_config(cfg)
    assert exc.value.code == code


def test_inline_instance_requires_matching_grid():
    inst = gen_single_resource(50, 0.8, 2.0, 1.0)
    doc = json.loads(instance_to_json(inst))
    good = _base_config(instance={"inline": doc}, k_grid=[50])
    assert parse_config(good).inline is not None
    bad = _base_config(instance={"inline": doc}, k_grid=[50, 100])
    with pytest.raises(ConfigError):
        parse_config(bad)


def test_load_config_reports_bad_json(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError) as exc:
        load_config(p)
    assert exc.value.code == "invalid-json"


# ---------------------------------------------------------------- sweeps

def _read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_experiment_schema_order_and_determinism(tmp_path):
    cfg = parse_config(_base_config(output="sweep.csv"))
    p1 = run_experiment(cfg, out_dir=str(tmp_path))
    rows = _read_rows(p1)
    assert rows[0] == list(_CSV_COLUMNS)
    assert len(rows) == 1 + len(cfg.k_grid) * len(cfg.policies)
    ks = [int(r[1]) for r in rows[1:]]
    pols = [r[2] for r in rows[1:]]
    assert ks == sorted(ks)
    assert pols == ["ff", "lpt", "ff", "lpt"]

    p2 = run_experiment(cfg, out_dir=str(tmp_path / "again"))
    rows2 = _read_rows(p2)
    drop_wall = lambda rs: [r[:-1] for r in rs]  # noqa: E731
    assert drop_wall(rows) == drop_wall(rows2)


def test_run_experiment_honors_env_output(tmp_path, monkeypatch):
    monkeypatch.setenv("NRMLAB_OUT", str(tmp_path / "envdir"))
    cfg = parse_config(_base_config(output="here.csv"))
    p = run_experiment(cfg)
    assert p == tmp_path / "envdir" / "here.csv"
    assert p.exists()


def test_run_experiment_inline_instance(tmp_path):
    inst = gen_single_resource(60, 0.8, 2.0, 1.0)
    doc = json.loads(instance_to_json(inst))
    cfg = parse_config(_base_config(
        instance={"inline": doc}, k_grid=[60], output="inline.csv"))
    p = run_experiment(cfg, out_dir=str(tmp_path))
    rows = _read_rows(p)
    assert len(rows) == 3
    # v_dlp for C = 48, lambdaT = (30, 30): 2*30 + 1*18
    assert abs(float(rows[1][9]) - 78.0) < 1e-9


# ---------------------------------------------------------------- commands

def _write_unit_instance(tmp_path, T=2, C=2.0):
    inst = make_instance([1.0], [2.0], [[1.0]], [C], T)
    p = tmp_path / "inst.json"
    p.write_text(instance_to_json(inst))
    return p


def test_run_command_prints_hand_trace(tmp_path, capsys):
    p = _write_unit_instance(tmp_path)
    code = main(["run", "--policy", "ff", "--instance", str(p)])
    out = capsys.readouterr().out
    assert code == 0
    assert "revenue 4" in out
    assert "x 2" in out
    assert "B_final 0" in out


def test_run_command_verbose_emits_decision_rows(tmp_path, capsys):
    p = _write_unit_instance(tmp_path)
    code = main(["run", "--policy", "ff", "--instance", str(p), "--verbose"])
    out = capsys.readouterr().out
    assert code == 0
    assert "t,type,y,z,theta0" in out
    assert "1,0,1,1," in out


def test_run_command_unknown_policy_exits_2(tmp_path, capsys):
    p = _write_unit_instance(tmp_path)
    code = main(["run", "--policy", "greedy", "--instance", str(p)])
    assert code == 2
    assert "unknown-policy" in capsys.readouterr().err


def test_run_command_missing_file_exits_2(tmp_path, capsys):
    code = main(["run", "--policy", "ff",
                 "--instance", str(tmp_path / "absent.json")])
    assert code == 2


def test_run_command_short_horizon_exits_3(tmp_path, capsys):
    inst = gen_single_resource(50, 0.8, 2.0, 1.0)
    p = tmp_path / "short.json"
    p.write_text(instance_to_json(inst))
    code = main(["run", "--policy", "fd", "--instance", str(p)])
    assert code == 3
    assert "horizon-too-short" in capsys.readouterr().err


def test_experiment_command_with_overrides(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(_base_config()))
    out = tmp_path / "o.csv"
    code = main(["experiment", str(cfg_path), "--reps", "2",
                 "--seed", "5", "--out", str(out)])
    assert code == 0
    rows = _read_rows(out)
    assert rows[1][4] == "2"
    assert rows[1][10] == "5"


def test_experiment_command_bad_config_exits_2(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(_base_config(schema=99)))
    assert main(["experiment", str(cfg_path)]) == 2


def test_preset_configs_match_published_grids():
    from nrmlab.cli import _preset_configs
    fig1 = _preset_configs("single_resource_fig1", None, None, False)
    assert len(fig1) == 6
    assert all(c.k_grid == tuple(range(1000, 10001, 1000)) for c in fig1)
    assert all(c.replications == 500 for c in fig1)
    assert {c.generator_args["c_ratio"] for c in fig1} == {0.7, 0.8, 0.9}
    assert {c.generator_args["r1"] for c in fig1} == {2.0, 5.0}
    fig2 = _preset_configs("hybrid_fig2", 10, 1, False)
    assert len(fig2) == 2
    assert [p.U for p in fig2[0].policies] == [0, 1, 2, 3, 4]
    desk = _preset_configs("multi_resource", None, None, False)[0]
    assert desk.generator_args["n_types"] == 100
    assert desk.k_grid == (2000, 5000, 10000)
    full = _preset_configs("multi_resource", None, None, True)[0]
    assert full.generator_args["n_types"] == 1000
    assert full.k_grid == (50000, 100000, 200000, 500000)
    with pytest.raises(ConfigError):
        _preset_configs("fig9", None, None, False)


def test_preset_command_writes_expected_files(tmp_path):
    code = main(["preset", "single_resource_fig1", "--reps", "2",
                 "--out", str(tmp_path)])
    assert code == 0
    files = sorted(tmp_path.glob("*.csv"))
    assert len(files) == 6
    for f in files:
        rows = _read_rows(f)
        assert len(rows) == 31
        assert rows[0] == list(_CSV_COLUMNS)
