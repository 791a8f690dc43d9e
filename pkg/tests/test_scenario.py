import math

import pytest
import yaml

from ventlab.errors import ScenarioError
from ventlab.scenario import (
    Scenario,
    available_scenarios,
    load_bundled,
    load_scenario,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)

BUNDLED = ["diner", "home", "lab", "pilot-office", "r1", "r2"]


def test_bundled_list():
    assert available_scenarios() == BUNDLED


def test_r1_layout():
    sc = load_bundled("r1")
    assert sc.dims_m == (5.0, 8.0, 3.0)
    kinds = {d.kind for d in sc.devices}
    assert "window_ventilator" in kinds
    assert "open_window" in kinds
    assert "pedestal_fan" in kinds
    assert sc.baseline_probes is not None and len(sc.baseline_probes) == 6


def test_r2_layout():
    sc = load_bundled("r2")
    assert sc.dims_m == (3.0, 5.0, 3.0)
    assert sc.build_geometry().shape == (6, 10, 6)
    assert len([d for d in sc.devices if d.kind == "window_ventilator"]) == 1
    assert len([d for d in sc.devices if d.kind == "pedestal_fan"]) == 1
    assert len([d for d in sc.devices if d.kind == "open_window"]) == 1


def test_pilot_office_layout():
    sc = load_bundled("pilot-office")
    assert sc.dims_m[0] == 15.0 and sc.dims_m[1] == 10.0
    assert len([s for s in sc.sources if s.kind == "occupant"]) == 7
    assert len(sc.partitions) > 0


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_scenarios_build(name):
    sc = load_bundled(name)
    geo = sc.build_geometry()
    devices = sc.build_devices(geo)
    sc.build_params()
    sc.build_sensor_spec()
    for dev in devices:
        if dev.is_window:
            assert dev.aperture, f"{name}:{dev.id} has an empty aperture"


@pytest.mark.parametrize("name", BUNDLED)
def test_round_trip(tmp_path, name):
    sc = load_bundled(name)
    out = tmp_path / "copy.yaml"
    save_scenario(sc, out)
    again = load_scenario(out)
    assert again == sc


def test_missing_file():
    with pytest.raises(ScenarioError, match="not found"):
        load_scenario("/nowhere/missing.yaml")


def test_parse_error_reports_line(tmp_path):
    p = tmp_path / "broken.yaml"
    p.write_text("name: x\nroom: [unclosed\n")
    with pytest.raises(ScenarioError, match="line"):
        load_scenario(p)


def test_unknown_top_level_key_rejected():
    with pytest.raises(ScenarioError, match="unknown keys"):
        scenario_from_dict({"name": "x", "room": {"dims_m": [3, 3, 3]}, "wind": 5})


def test_unknown_device_key_rejected():
    raw = {
        "name": "x",
        "room": {"dims_m": [3, 3, 3]},
        "devices": [{"id": "d", "kind": "open_window", "position": [0, 0, 1],
                     "aperture": {"min": [0, 0, 0.5], "max": [0.5, 0.5, 1.5]},
                     "turbo": True}],
    }
    with pytest.raises(ScenarioError, match="turbo"):
        scenario_from_dict(raw)


def test_source_outside_room_rejected():
    raw = {
        "name": "x",
        "room": {"dims_m": [3, 3, 3]},
        "sources": [{"id": "s", "kind": "occupant", "position": [99, 0, 0]}],
    }
    with pytest.raises(ScenarioError, match="outside room"):
        scenario_from_dict(raw)


def test_duplicate_source_id_rejected():
    raw = {
        "name": "x",
        "room": {"dims_m": [3, 3, 3]},
        "sources": [
            {"id": "s", "kind": "occupant", "position": [1, 1, 1]},
            {"id": "s", "kind": "candle", "position": [2, 2, 1]},
        ],
    }
    with pytest.raises(ScenarioError, match="duplicate"):
        scenario_from_dict(raw)


def test_window_without_aperture_rejected():
    raw = {
        "name": "x",
        "room": {"dims_m": [3, 3, 3]},
        "devices": [{"id": "w", "kind": "open_window", "position": [0, 0, 1]}],
    }
    with pytest.raises(ScenarioError, match="aperture"):
        scenario_from_dict(raw)


def test_fan_without_orientation_rejected():
    raw = {
        "name": "x",
        "room": {"dims_m": [3, 3, 3]},
        "devices": [{"id": "f", "kind": "pedestal_fan", "position": [1, 1, 1]}],
    }
    with pytest.raises(ScenarioError, match="orientation"):
        scenario_from_dict(raw)


def test_source_inside_partition_rejected():
    raw = {
        "name": "x",
        "room": {
            "dims_m": [3, 3, 3],
            "partitions": [{"min": [0.5, 0.5, 0.5], "max": [1.5, 1.5, 1.5]}],
        },
        "sources": [{"id": "s", "kind": "occupant", "position": [1.0, 1.0, 1.0]}],
    }
    with pytest.raises(ScenarioError, match="partition"):
        scenario_from_dict(raw)


def test_schedule_must_be_ordered():
    raw = {
        "name": "x",
        "room": {"dims_m": [3, 3, 3]},
        "devices": [{
            "id": "w", "kind": "open_window", "position": [0, 0, 1],
            "aperture": {"min": [0, 0, 0.5], "max": [0.5, 0.5, 1.5]},
            "schedule": [{"t": 100, "state": "on"}, {"t": 50, "state": "off"}],
        }],
    }
    with pytest.raises(ScenarioError, match="non-decreasing"):
        scenario_from_dict(raw)


def test_open_ended_source_interval():
    raw = {
        "name": "x",
        "room": {"dims_m": [3, 3, 3]},
        "sources": [{"id": "s", "kind": "occupant", "position": [1, 1, 1],
                     "active_s": [0, None]}],
    }
    sc = scenario_from_dict(raw)
    assert sc.sources[0].active_s == (0.0, math.inf)
    # and it survives the YAML round trip
    text = yaml.safe_dump(scenario_to_dict(sc))
    assert scenario_from_dict(yaml.safe_load(text)) == sc


def test_probe_heights_validated():
    raw = {
        "name": "x",
        "room": {"dims_m": [3, 3, 3]},
        "probe_grid": {"heights": {"C": 9.0}},
    }
    with pytest.raises(ScenarioError, match="heights"):
        scenario_from_dict(raw)


def test_probe_grid_positions_default_margins():
    sc = scenario_from_dict({"name": "x", "room": {"dims_m": [5.0, 8.0, 3.0]}})
    pos = sc.probe_grid.xy_positions(sc.dims_m)
    assert len(pos) == 9
    assert pos[0] == (1.0, 1.0)
    assert pos[-1] == (4.0, 7.0)


def test_column_names_follow_grid():
    sc = scenario_from_dict({"name": "x", "room": {"dims_m": [5.0, 8.0, 3.0]}})
    names = sc.probe_grid.column_names()
    assert len(names) == 27
    assert names[0] == "r0c0_G"
    assert names[1] == "r0c0_T"
    assert names[2] == "r0c0_C"
    assert names[-1] == "r2c2_C"
