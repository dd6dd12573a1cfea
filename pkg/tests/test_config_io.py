import json

import pytest

from stablevol.config import (
    ConfigError,
    ExperimentConfig,
    dump_config,
    load_config,
    parse_step,
)
from stablevol.io import emit_csv

REQUIRED = {"mu": 1.5, "lam": 2.0, "kappa": 0.5}


def test_empty_file_uses_defaults(tmp_path):
    f = tmp_path / "c.json"
    f.write_text("")
    cfg = load_config(f, REQUIRED)
    assert (cfg.horizon, cfg.q, cfg.beta, cfg.m) == (1.0, 1.0, 0.0, 500)
    assert cfg.delta_ref == 2.0**-15
    assert cfg.deltas == tuple(2.0**-k for k in range(13, 8, -1))


def test_missing_required_keys():
    with pytest.raises(ConfigError, match="mu, lam, kappa"):
        load_config()


def test_lambda_zero_rejected():
    with pytest.raises(ConfigError, match="λ > 0"):
        load_config(overrides={**REQUIRED, "lam": 0.0})


def test_threshold_violation_reports_threshold():
    with pytest.raises(ConfigError, match=r"threshold = 0\.08"):
        load_config(overrides={**REQUIRED, "lam": 0.05, "alphas": [1.8]})


def test_unknown_key_lists_valid_keys(tmp_path):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"mu": 1.5, "sigma_v": 2}))
    with pytest.raises(ConfigError) as exc:
        load_config(f)
    msg = str(exc.value)
    assert "sigma_v" in msg and "delta_ref" in msg and "kappa" in msg


def test_table1_preset():
    cfg = load_config(preset="table1")
    assert (cfg.mu, cfg.lam, cfg.kappa, cfg.x0) == (1.5, 2.0, 0.5, 1.0)
    assert cfg.deltas == tuple(2.0**-k for k in (14, 13, 12, 11, 10))
    assert cfg.delta_ref == 2.0**-16 and cfg.m == 1000
    assert cfg.alphas == (1.8, 1.6, 1.4, 1.1)


@pytest.mark.parametrize("name,vals", [("table2", (2.0, 3.0, 0.5)), ("table3", (2.0, 3.0, 0.2))])
def test_other_presets(name, vals):
    cfg = load_config(preset=name)
    assert (cfg.mu, cfg.lam, cfg.kappa) == vals


def test_desk_scaled_preset_and_overrides():
    cfg = load_config(preset="table1", scale="desk", overrides={"m": 20, "seed": 9})
    assert cfg.delta_ref == 2.0**-15 and cfg.m == 20 and cfg.seed == 9


def test_file_then_flags(tmp_path):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({**REQUIRED, "m": 10, "deltas": ["2^-9", "2^-10", "2^-11"]}))
    cfg = load_config(f, {"m": 30})
    assert cfg.m == 30
    assert cfg.deltas == (2.0**-11, 2.0**-10, 2.0**-9)


def test_round_trip(tmp_path):
    cfg = load_config(preset="table3", overrides={"beta": 0.25, "q": 1.05, "seed": 2**40})
    f = tmp_path / "c.json"
    f.write_text(dump_config(cfg))
    again = load_config(f)
    assert again == cfg
    assert dump_config(again) == dump_config(cfg)


@pytest.mark.parametrize(
    "over",
    [
        {"deltas": [3 * 2.0**-12]},
        {"delta_ref": 2.0**-8},
        {"q": 1.5},
        {"m": 0},
        {"beta": 2.0},
        {"deltas": [0.5]},
        {"error_mode": "mean"},
    ],
)
def test_invalid_grid_or_run_settings(over):
    with pytest.raises(ConfigError):
        load_config(overrides={**REQUIRED, **over})


def test_parse_step():
    assert parse_step("2^-10") == 2.0**-10
    assert parse_step("2^(-3)") == 0.125
    assert parse_step("0.25") == 0.25
    with pytest.raises(ConfigError):
        parse_step("two")


def test_config_is_value_type():
    assert ExperimentConfig(**REQUIRED) == ExperimentConfig(**REQUIRED)


def test_emit_header_only(tmp_path):
    f = tmp_path / "a.csv"
    emit_csv([], ["delta", "error"], f)
    assert f.read_bytes() == b"delta,error\n"


def test_emit_round_trips_floats(tmp_path):
    f = tmp_path / "a.csv"
    vals = [0.99951171875, 0.1 + 0.2, 2.0**-16, 1e-300, 123456789.125]
    emit_csv([(i, v) for i, v in enumerate(vals)], ["index", "value"], f)
    lines = f.read_text().splitlines()
    assert lines[0] == "index,value"
    assert lines[1] == "0,0.99951171875"
    assert [float(l.split(",")[1]) for l in lines[1:]] == vals
    assert b"\r" not in f.read_bytes()


def test_emit_dict_records(tmp_path):
    f = tmp_path / "a.csv"
    emit_csv([{"b": 2, "a": 1.5}], ["a", "b"], f)
    assert f.read_text() == "a,b\n1.5,2\n"


def test_emit_errors(tmp_path):
    with pytest.raises(ValueError):
        emit_csv([], [], tmp_path / "a.csv")
    target = tmp_path / "missing" / "a.csv"
    with pytest.raises(OSError, match="missing"):
        emit_csv([(1,)], ["x"], target)
