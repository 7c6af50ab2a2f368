"""Configuration schema validation and parsing."""

import json
import math

import pytest

from parafloq.circuit import CircuitParams, ToyParams
from parafloq.config import ConfigError, load_config, parse_config

TOY = {
    "omega_a": 4.0, "omega_b": 4.7, "omega_c": 4.3,
    "alpha_a": -0.2, "alpha_b": -0.2, "alpha_c": 0.1,
}

CIRCUIT = {
    "C_a": 134.205, "C_b": 134.218, "C_c": 75.987,
    "E_Ja": 37.0, "E_Jb": 27.0, "E_Jc": 50.0,
    "alpha": 0.258, "beta": 1.0, "N": 3,
    "C_ac": 11.11, "C_bc": 11.22,
}


def test_minimal_toy_config():
    cfg = parse_config({"toy": dict(TOY)})
    assert isinstance(cfg.model, ToyParams)
    assert not cfg.is_circuit
    assert cfg.calibrate  # no omega_d given
    assert cfg.numerics["dims"] == [5, 5, 5]
    assert cfg.numerics["propagator_tol"] == 1e-10


def test_minimal_circuit_config():
    cfg = parse_config(
        {
            "circuit": dict(CIRCUIT),
            "drive": {"phi_ext_bar_over_2pi": 0.3, "delta_phi_over_2pi": 0.02},
        }
    )
    assert isinstance(cfg.model, CircuitParams)
    assert cfg.is_circuit
    assert cfg.drive.phi_ext_bar == pytest.approx(2 * math.pi * 0.3)
    assert cfg.drive.delta_phi == pytest.approx(2 * math.pi * 0.02)


def test_exactly_one_model_section():
    with pytest.raises(ConfigError, match="exactly one"):
        parse_config({"toy": dict(TOY), "circuit": dict(CIRCUIT)})
    with pytest.raises(ConfigError, match="exactly one"):
        parse_config({"drive": {"omega_d": 1.0}})


def test_schema_error_names_offending_key():
    bad = {"toy": dict(TOY, omega_a=-1.0)}
    with pytest.raises(ConfigError, match="toy.omega_a"):
        parse_config(bad)
    with pytest.raises(ConfigError, match="numerics.grid_points"):
        parse_config({"toy": dict(TOY), "numerics": {"grid_points": 2}})
    with pytest.raises(ConfigError, match="unknown_key|additional"):
        parse_config({"toy": dict(TOY), "unknown_key": 1})


def test_missing_required_field_reported():
    incomplete = dict(TOY)
    del incomplete["omega_c"]
    with pytest.raises(ConfigError, match="omega_c"):
        parse_config({"toy": incomplete})


def test_omega_d_calibrate_keyword():
    cfg = parse_config({"toy": dict(TOY), "drive": {"omega_d": "calibrate"}})
    assert cfg.calibrate
    assert cfg.drive.omega_d is None
    cfg = parse_config({"toy": dict(TOY), "drive": {"omega_d": 0.7}})
    assert not cfg.calibrate
    assert cfg.drive.omega_d == 0.7
    with pytest.raises(ConfigError, match="omega_d"):
        parse_config({"toy": dict(TOY), "drive": {"omega_d": "resonance"}})


def test_drive_delta_flows_into_toy_model():
    cfg = parse_config({"toy": dict(TOY), "drive": {"delta": 0.3}})
    assert cfg.model.delta == 0.3


def test_sweep_axis_validation_per_model():
    sweep = {"axis": "omega_c", "start": 4.2, "stop": 4.4, "count": 3}
    cfg = parse_config({"toy": dict(TOY), "sweep": dict(sweep)})
    assert cfg.sweep["axis"] == "omega_c"
    with pytest.raises(ConfigError, match="sweep.axis"):
        parse_config({"circuit": dict(CIRCUIT), "sweep": dict(sweep)})
    with pytest.raises(ConfigError, match="sweep.axis2"):
        parse_config(
            {
                "toy": dict(TOY),
                "sweep": dict(
                    sweep, axis2={"axis": "phi_ext_bar_over_2pi", "values": [0.1]}
                ),
            }
        )


def test_numerics_overrides_merge_with_defaults():
    cfg = parse_config({"toy": dict(TOY), "numerics": {"dims": [4, 4, 4]}})
    assert cfg.numerics["dims"] == [4, 4, 4]
    assert cfg.numerics["grid_points"] == 128


def test_load_config_file_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(str(bad))
    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="root must be an object"):
        load_config(str(arr))
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"toy": TOY}))
    cfg = load_config(str(good))
    assert isinstance(cfg.model, ToyParams)
