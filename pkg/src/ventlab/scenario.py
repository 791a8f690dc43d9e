"""Scenario files: room layout, sources, devices, probes, and defaults.

Scenarios are YAML with keyed sections and SI units throughout. Unknown keys
are rejected so typos fail loudly. A few layouts ship with the package
(pilot-office, r1, r2, plus illustrative diner/home/lab rooms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from importlib import resources
from pathlib import Path

import yaml

from .devices import DEVICE_KINDS, FAN_KINDS, WINDOW_KINDS, VentilationDevice
from .errors import ScenarioError
from .field import DEFAULT_EMISSION_M3S, SimParams, Source
from .geometry import RoomGeometry, Vec3
from .sensor import SensorSpec

DEFAULT_HEIGHTS = {"G": 0.1, "T": 0.75, "C": 2.4}

# per-kind jet/exchange defaults used when a scenario omits them
DEVICE_DEFAULTS = {
    "ceiling_fan": {"jet_speed": 1.5, "jet_radius": 0.6, "decay_length": 3.0},
    "pedestal_fan": {"jet_speed": 2.0, "jet_radius": 0.4, "decay_length": 4.0},
    "hand_fan": {"jet_speed": 1.5, "jet_radius": 0.25, "decay_length": 1.5},
    "split_ac": {"jet_speed": 1.2, "jet_radius": 0.5, "decay_length": 3.5},
    "window_ventilator": {"exchange_rate": 0.15},
    "open_window": {"exchange_rate": 0.05},
}

_PARAM_KEYS = {"diffusivity", "settling_velocity", "dt", "time_scale", "auto_substep"}
_SENSOR_KEYS = {
    "accuracy_base_ppm",
    "accuracy_pct",
    "repeatability_sd_ppm",
    "preheat_s",
    "poll_interval_s",
    "drift_base_ppm_per_year",
    "drift_pct_per_year",
    "response_tau_s",
}


@dataclass(frozen=True)
class Box:
    lo: Vec3
    hi: Vec3

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", tuple(float(c) for c in self.lo))
        object.__setattr__(self, "hi", tuple(float(c) for c in self.hi))
        if any(l > h for l, h in zip(self.lo, self.hi)):
            raise ScenarioError(f"box min {self.lo} exceeds max {self.hi}")


@dataclass(frozen=True)
class DeviceSpec:
    """Device as written in a scenario; aperture stays a box until a grid exists."""

    id: str
    kind: str
    position: Vec3
    orientation: Vec3 | None = None
    state: bool = False
    jet_speed: float | None = None
    jet_radius: float | None = None
    decay_length: float | None = None
    exchange_rate: float | None = None
    aperture: Box | None = None
    schedule: tuple[tuple[float, bool], ...] = ()


@dataclass(frozen=True)
class ProbeGrid:
    rows: int = 3
    cols: int = 3
    margin_m: float = 1.0
    heights: tuple[tuple[str, float], ...] = tuple(DEFAULT_HEIGHTS.items())
    positions: tuple[tuple[float, float], ...] | None = None

    def height_of(self, label: str) -> float:
        for name, h in self.heights:
            if name == label:
                return h
        raise ScenarioError(f"unknown probe height {label!r}; expected one of G, T, C")

    def xy_positions(self, dims_m) -> list[tuple[float, float]]:
        if self.positions is not None:
            return list(self.positions)
        out = []
        lx, ly = dims_m[0], dims_m[1]
        for r in range(self.rows):
            y = ly / 2 if self.rows == 1 else self.margin_m + r * (ly - 2 * self.margin_m) / (self.rows - 1)
            for c in range(self.cols):
                x = lx / 2 if self.cols == 1 else self.margin_m + c * (lx - 2 * self.margin_m) / (self.cols - 1)
                out.append((x, y))
        return out

    def column_names(self) -> list[str]:
        n = len(self.positions) if self.positions is not None else self.rows * self.cols
        cols = self.cols if self.positions is None else n
        names = []
        for i in range(n):
            r, c = divmod(i, cols)
            for label, _ in self.heights:
                names.append(f"r{r}c{c}_{label}")
        return names


@dataclass
class Scenario:
    name: str
    dims_m: Vec3
    cell_m: float = 0.5
    partitions: tuple[Box, ...] = ()
    ambient_ppm: float = 400.0
    temperature_c: float = 25.0
    humidity_pct: float = 50.0
    params: dict = dc_field(default_factory=dict)
    sources: tuple[Source, ...] = ()
    devices: tuple[DeviceSpec, ...] = ()
    probe_grid: ProbeGrid = dc_field(default_factory=ProbeGrid)
    baseline_probes: tuple[Vec3, ...] | None = None
    wearable_spawn: tuple[float, float] = (1.0, 1.0)
    sensor: dict = dc_field(default_factory=dict)
    seed: int = 0
    notes: str = ""

    def build_geometry(self) -> RoomGeometry:
        base = RoomGeometry(self.dims_m, self.cell_m)
        blocked: set = set()
        for box in self.partitions:
            blocked.update(base.voxels_in_box(box.lo, box.hi))
        return RoomGeometry(self.dims_m, self.cell_m, frozenset(blocked))

    def build_params(self) -> SimParams:
        return SimParams(ambient_ppm=self.ambient_ppm, **self.params)

    def build_sensor_spec(self) -> SensorSpec:
        return SensorSpec(**self.sensor)

    def build_devices(self, geometry: RoomGeometry) -> list[VentilationDevice]:
        out = []
        for spec in self.devices:
            defaults = DEVICE_DEFAULTS.get(spec.kind, {})
            kwargs = dict(
                id=spec.id,
                kind=spec.kind,
                position=spec.position,
                orientation=spec.orientation,
                state=spec.state,
                schedule=spec.schedule,
            )
            for key in ("jet_speed", "jet_radius", "decay_length", "exchange_rate"):
                val = getattr(spec, key)
                if val is None:
                    val = defaults.get(key)
                if val is not None:
                    kwargs[key] = val
            if spec.kind in WINDOW_KINDS:
                if spec.aperture is None:
                    raise ScenarioError(f"device {spec.id}: window kinds need an aperture box")
                voxels = geometry.voxels_in_box(spec.aperture.lo, spec.aperture.hi)
                if not voxels:
                    raise ScenarioError(f"device {spec.id}: aperture box contains no voxel centers")
                kwargs["aperture"] = tuple(voxels)
            out.append(VentilationDevice(**kwargs))
        return out


def _require_keys(mapping, allowed, context: str) -> None:
    if not isinstance(mapping, dict):
        raise ScenarioError(f"{context}: expected a mapping, got {type(mapping).__name__}")
    unknown = set(mapping) - set(allowed)
    if unknown:
        raise ScenarioError(f"{context}: unknown keys {sorted(unknown)}")


def _vec(value, n: int, context: str):
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise ScenarioError(f"{context}: expected {n} numbers, got {value!r}")
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ScenarioError(f"{context}: expected numbers, got {value!r}") from None


def _inside(point, dims, context: str) -> None:
    if not all(0.0 <= point[a] <= dims[a] for a in range(len(point))):
        raise ScenarioError(f"{context}: position {tuple(point)} outside room {tuple(dims)}")


def _state(value, context: str) -> bool:
    if isinstance(value, bool):
        return value
    if value in ("on", "off"):
        return value == "on"
    raise ScenarioError(f"{context}: state must be on/off, got {value!r}")


def scenario_from_dict(raw: dict) -> Scenario:
    _require_keys(
        raw,
        {
            "name", "room", "ambient_ppm", "temperature_c", "humidity_pct", "params",
            "sources", "devices", "probe_grid", "baseline_probes", "wearable", "seed", "notes",
        },
        "scenario",
    )
    if "name" not in raw or "room" not in raw:
        raise ScenarioError("scenario: 'name' and 'room' are required")

    room = raw["room"]
    _require_keys(room, {"dims_m", "cell_m", "partitions"}, "room")
    dims = _vec(room.get("dims_m"), 3, "room.dims_m")
    cell = float(room.get("cell_m", 0.5))
    partitions = []
    for i, p in enumerate(room.get("partitions") or []):
        _require_keys(p, {"min", "max"}, f"room.partitions[{i}]")
        lo = _vec(p.get("min"), 3, f"room.partitions[{i}].min")
        hi = _vec(p.get("max"), 3, f"room.partitions[{i}].max")
        _inside(lo, dims, f"room.partitions[{i}].min")
        _inside(hi, dims, f"room.partitions[{i}].max")
        partitions.append(Box(lo, hi))

    params = dict(raw.get("params") or {})
    _require_keys(params, _PARAM_KEYS, "params")

    sources = []
    seen_ids: set[str] = set()
    for i, s in enumerate(raw.get("sources") or []):
        ctx = f"sources[{i}]"
        _require_keys(s, {"id", "kind", "position", "emission_m3s", "active_s"}, ctx)
        kind = s.get("kind")
        if kind not in DEFAULT_EMISSION_M3S:
            raise ScenarioError(f"{ctx}: unknown source kind {kind!r}")
        pos = _vec(s.get("position"), 3, f"{ctx}.position")
        _inside(pos, dims, f"{ctx}.position")
        sid = str(s.get("id") or f"{kind}-{i}")
        if sid in seen_ids:
            raise ScenarioError(f"{ctx}: duplicate source id {sid!r}")
        seen_ids.add(sid)
        active = s.get("active_s")
        if active is None:
            interval = (0.0, math.inf)
        else:
            if not isinstance(active, (list, tuple)) or len(active) != 2:
                raise ScenarioError(f"{ctx}.active_s: expected [t_on, t_off]")
            t_on = float(active[0])
            t_off = math.inf if active[1] is None else float(active[1])
            interval = (t_on, t_off)
        try:
            sources.append(
                Source(kind=kind, position=pos, emission_m3s=s.get("emission_m3s"),
                       active_s=interval, id=sid)
            )
        except ValueError as exc:
            raise ScenarioError(f"{ctx}: {exc}") from None

    devices = []
    for i, d in enumerate(raw.get("devices") or []):
        ctx = f"devices[{i}]"
        _require_keys(
            d,
            {"id", "kind", "position", "orientation", "state", "jet_speed",
             "jet_radius", "decay_length", "exchange_rate", "aperture", "schedule"},
            ctx,
        )
        kind = d.get("kind")
        if kind not in DEVICE_KINDS:
            raise ScenarioError(f"{ctx}: unknown device kind {kind!r}")
        pos = _vec(d.get("position"), 3, f"{ctx}.position")
        _inside(pos, dims, f"{ctx}.position")
        did = str(d.get("id") or f"{kind}-{i}")
        if did in seen_ids:
            raise ScenarioError(f"{ctx}: duplicate id {did!r}")
        seen_ids.add(did)
        orientation = d.get("orientation")
        if orientation is not None:
            orientation = _vec(orientation, 3, f"{ctx}.orientation")
        elif kind in FAN_KINDS:
            raise ScenarioError(f"{ctx}: fan kind {kind} needs an orientation")
        aperture = None
        if d.get("aperture") is not None:
            _require_keys(d["aperture"], {"min", "max"}, f"{ctx}.aperture")
            lo = _vec(d["aperture"].get("min"), 3, f"{ctx}.aperture.min")
            hi = _vec(d["aperture"].get("max"), 3, f"{ctx}.aperture.max")
            _inside(lo, dims, f"{ctx}.aperture.min")
            _inside(hi, dims, f"{ctx}.aperture.max")
            aperture = Box(lo, hi)
        schedule = []
        last_t = -math.inf
        for j, ev in enumerate(d.get("schedule") or []):
            _require_keys(ev, {"t", "state"}, f"{ctx}.schedule[{j}]")
            t_ev = float(ev.get("t", -1))
            if t_ev < last_t:
                raise ScenarioError(f"{ctx}.schedule: times must be non-decreasing")
            last_t = t_ev
            schedule.append((t_ev, _state(ev.get("state"), f"{ctx}.schedule[{j}]")))
        devices.append(
            DeviceSpec(
                id=did,
                kind=kind,
                position=pos,
                orientation=orientation,
                state=_state(d.get("state", False), ctx),
                jet_speed=d.get("jet_speed"),
                jet_radius=d.get("jet_radius"),
                decay_length=d.get("decay_length"),
                exchange_rate=d.get("exchange_rate"),
                aperture=aperture,
                schedule=tuple(schedule),
            )
        )

    pg_raw = raw.get("probe_grid") or {}
    _require_keys(pg_raw, {"rows", "cols", "margin_m", "heights", "positions"}, "probe_grid")
    heights = dict(DEFAULT_HEIGHTS)
    if pg_raw.get("heights"):
        _require_keys(pg_raw["heights"], {"G", "T", "C"}, "probe_grid.heights")
        heights.update({k: float(v) for k, v in pg_raw["heights"].items()})
    heights = {k: heights[k] for k in ("G", "T", "C")}
    for label, h in heights.items():
        if not 0.0 <= h <= dims[2]:
            raise ScenarioError(f"probe_grid.heights.{label}: {h} outside room height {dims[2]}")
    positions = None
    if pg_raw.get("positions") is not None:
        positions = tuple(
            _vec(p, 2, f"probe_grid.positions[{i}]")
            for i, p in enumerate(pg_raw["positions"])
        )
        for i, p in enumerate(positions):
            _inside(p, dims[:2], f"probe_grid.positions[{i}]")
    probe_grid = ProbeGrid(
        rows=int(pg_raw.get("rows", 3)),
        cols=int(pg_raw.get("cols", 3)),
        margin_m=float(pg_raw.get("margin_m", 1.0)),
        heights=tuple(heights.items()),
        positions=positions,
    )

    baseline = raw.get("baseline_probes")
    baseline_probes = None
    if baseline is not None:
        baseline_probes = tuple(
            _vec(p, 3, f"baseline_probes[{i}]") for i, p in enumerate(baseline)
        )
        for i, p in enumerate(baseline_probes):
            _inside(p, dims, f"baseline_probes[{i}]")

    wearable = raw.get("wearable") or {}
    _require_keys(wearable, {"spawn", "sensor"}, "wearable")
    spawn = _vec(wearable.get("spawn", (1.0, 1.0)), 2, "wearable.spawn")
    _inside(spawn, dims[:2], "wearable.spawn")
    sensor = dict(wearable.get("sensor") or {})
    _require_keys(sensor, _SENSOR_KEYS, "wearable.sensor")

    sc = Scenario(
        name=str(raw["name"]),
        dims_m=dims,
        cell_m=cell,
        partitions=tuple(partitions),
        ambient_ppm=float(raw.get("ambient_ppm", 400.0)),
        temperature_c=float(raw.get("temperature_c", 25.0)),
        humidity_pct=float(raw.get("humidity_pct", 50.0)),
        params=params,
        sources=tuple(sources),
        devices=tuple(devices),
        probe_grid=probe_grid,
        baseline_probes=baseline_probes,
        wearable_spawn=spawn,
        sensor=sensor,
        seed=int(raw.get("seed", 0)),
        notes=str(raw.get("notes", "")),
    )
    # surface geometry/params problems (bad dims, blocked probes...) at load time
    try:
        geo = sc.build_geometry()
        sc.build_params()
        sc.build_sensor_spec()
        sc.build_devices(geo)
        for s in sc.sources:
            if geo.is_blocked(geo.voxel_of(s.position)):
                raise ScenarioError(f"source {s.id}: position sits inside a partition")
        for x, y in sc.probe_grid.xy_positions(dims):
            for label, h in sc.probe_grid.heights:
                if geo.is_blocked(geo.voxel_of((x, y, h))):
                    raise ScenarioError(
                        f"probe ({x}, {y}) at height {label} sits inside a partition"
                    )
        for i, p in enumerate(sc.baseline_probes or ()):
            if geo.is_blocked(geo.voxel_of(p)):
                raise ScenarioError(f"baseline_probes[{i}] sits inside a partition")
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(str(exc)) from None
    return sc


def scenario_to_dict(sc: Scenario) -> dict:
    out: dict = {
        "name": sc.name,
        "room": {
            "dims_m": list(sc.dims_m),
            "cell_m": sc.cell_m,
            "partitions": [{"min": list(b.lo), "max": list(b.hi)} for b in sc.partitions],
        },
        "ambient_ppm": sc.ambient_ppm,
        "temperature_c": sc.temperature_c,
        "humidity_pct": sc.humidity_pct,
        "params": dict(sc.params),
        "sources": [
            {
                "id": s.id,
                "kind": s.kind,
                "position": list(s.position),
                "emission_m3s": s.emission_m3s,
                "active_s": [s.active_s[0], None if math.isinf(s.active_s[1]) else s.active_s[1]],
            }
            for s in sc.sources
        ],
        "devices": [],
        "probe_grid": {
            "rows": sc.probe_grid.rows,
            "cols": sc.probe_grid.cols,
            "margin_m": sc.probe_grid.margin_m,
            "heights": {k: v for k, v in sc.probe_grid.heights},
            "positions": (
                None if sc.probe_grid.positions is None
                else [list(p) for p in sc.probe_grid.positions]
            ),
        },
        "wearable": {"spawn": list(sc.wearable_spawn), "sensor": dict(sc.sensor)},
        "seed": sc.seed,
        "notes": sc.notes,
    }
    for d in sc.devices:
        entry: dict = {
            "id": d.id,
            "kind": d.kind,
            "position": list(d.position),
            "state": "on" if d.state else "off",
        }
        if d.orientation is not None:
            entry["orientation"] = list(d.orientation)
        for key in ("jet_speed", "jet_radius", "decay_length", "exchange_rate"):
            if getattr(d, key) is not None:
                entry[key] = getattr(d, key)
        if d.aperture is not None:
            entry["aperture"] = {"min": list(d.aperture.lo), "max": list(d.aperture.hi)}
        if d.schedule:
            entry["schedule"] = [{"t": t, "state": "on" if s else "off"} for t, s in d.schedule]
        out["devices"].append(entry)
    if sc.baseline_probes is not None:
        out["baseline_probes"] = [list(p) for p in sc.baseline_probes]
    return out


def load_scenario(path) -> Scenario:
    """Parse and validate a scenario file; bundled names work too."""
    p = Path(path)
    if not p.exists():
        bundled = _bundled_path(str(path))
        if bundled is None:
            raise ScenarioError(f"scenario file not found: {path}")
        p = bundled
    try:
        raw = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ScenarioError(f"{p.name}: parse error{loc}: {exc}") from None
    if not isinstance(raw, dict):
        raise ScenarioError(f"{p.name}: expected a mapping at top level")
    return scenario_from_dict(raw)


def save_scenario(sc: Scenario, path) -> None:
    Path(path).write_text(yaml.safe_dump(scenario_to_dict(sc), sort_keys=False))


def available_scenarios() -> list[str]:
    root = resources.files("ventlab") / "scenarios"
    return sorted(f.name[: -len(".yaml")] for f in root.iterdir() if f.name.endswith(".yaml"))


def _bundled_path(name: str) -> Path | None:
    fname = name if name.endswith(".yaml") else f"{name}.yaml"
    candidate = resources.files("ventlab") / "scenarios" / fname
    try:
        if candidate.is_file():
            return Path(str(candidate))
    except (OSError, TypeError):
        return None
    return None


def load_bundled(name: str) -> Scenario:
    p = _bundled_path(name)
    if p is None:
        raise ScenarioError(
            f"unknown bundled scenario {name!r}; available: {', '.join(available_scenarios())}"
        )
    return load_scenario(p)
