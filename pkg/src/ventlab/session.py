"""Game session orchestration.

One Session owns a clock, the concentration field, the sensors, the bubbles
and the device states. ``advance(wall_dt)`` performs one tick: queued commands
apply first (so command effects are atomic with respect to field steps), then
the field steps by ``wall_dt * time_scale``, sensors relax toward their local
truth and poll, bubbles refresh under the 1 m proximity rule, and completion
is evaluated against the 800 ppm target.

Sessions are deterministic: identical (scenario, seed, command timeline)
produce identical event logs, which makes record/replay testing possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import bubbles as bub
from . import wire
from .bubbles import HealthThresholds
from .errors import InsufficientDataError, ScenarioError, SolverFault
from .field import ConcentrationField, init_field, sample, step
from .scenario import Scenario
from .sensor import Reading, VirtualSensor

MODES = ("ar_bubbles", "heatmap_baseline")
SUSTAIN_S = 60.0
AVATAR_SPEED_MS = 1.5
WRIST_HEIGHT_M = 0.75
BASELINE_PROBE_COUNT = 6

THRESHOLDS = HealthThresholds()


@dataclass(frozen=True)
class Command:
    target: str
    verb: str
    args: dict = dc_field(default_factory=dict)


class CommandError(Exception):
    """Rejected command; ``code`` follows HTTP semantics (400/404/409)."""

    def __init__(self, code: int, detail: str):
        super().__init__(detail)
        self.code = code
        self.detail = detail


@dataclass(frozen=True)
class SessionMetrics:
    start_ppm: float
    end_ppm: float
    reduction_ppm: float
    duration_min: float
    min_per_100ppm: float | None

    def to_dict(self) -> dict:
        return {
            "start_ppm": round(self.start_ppm, 1),
            "end_ppm": round(self.end_ppm, 1),
            "reduction_ppm": round(self.reduction_ppm, 1),
            "duration_min": round(self.duration_min, 3),
            "min_per_100ppm": (
                None if self.min_per_100ppm is None else round(self.min_per_100ppm, 3)
            ),
        }


def compute_metrics(samples) -> SessionMetrics:
    """Metrics from a (t_seconds, monitored_average_ppm) series."""
    if len(samples) < 2:
        raise InsufficientDataError("need at least 2 monitored samples")
    t0, start = samples[0]
    t1, end = samples[-1]
    reduction = start - end
    duration_min = (t1 - t0) / 60.0
    per_100 = duration_min / (reduction / 100.0) if reduction > 0 else None
    return SessionMetrics(start, end, reduction, duration_min, per_100)


class Session:
    def __init__(
        self,
        scenario: Scenario,
        mode: str = "ar_bubbles",
        seed: int = 0,
        session_id: str = "session-0",
        time_scale: float | None = None,
    ):
        if mode not in MODES:
            raise ScenarioError(f"unknown mode {mode!r}; expected one of {MODES}")
        self.id = session_id
        self.scenario = scenario
        self.mode = mode
        self.seed = int(seed)

        self.geometry = scenario.build_geometry()
        self.params = scenario.build_params()
        if time_scale is not None:
            self.params.time_scale = float(time_scale)
        self.devices = scenario.build_devices(self.geometry)
        self.sources = list(scenario.sources)
        self.field: ConcentrationField = init_field(self.geometry, scenario.ambient_ppm)
        self.t = 0.0

        spec = scenario.build_sensor_spec()
        seeds = np.random.SeedSequence(self.seed).spawn(BASELINE_PROBE_COUNT)
        self.sensors: list[VirtualSensor] = []
        self.wearable: VirtualSensor | None = None
        if mode == "ar_bubbles":
            wrist = self._wrist_anchor(scenario.wearable_spawn)
            self.wearable = VirtualSensor(
                "wearable-0",
                wrist,
                spec=spec,
                seed=seeds[0],
                ambient_ppm=scenario.ambient_ppm,
                ambient_temp_c=scenario.temperature_c,
                ambient_rh_pct=scenario.humidity_pct,
                geometry=self.geometry,
            )
            self.sensors.append(self.wearable)
        else:
            probes = scenario.baseline_probes
            if probes is None or len(probes) != BASELINE_PROBE_COUNT:
                raise ScenarioError(
                    f"heatmap_baseline needs exactly {BASELINE_PROBE_COUNT} baseline_probes, "
                    f"scenario has {0 if probes is None else len(probes)}"
                )
            for i, pos in enumerate(probes):
                self.sensors.append(
                    VirtualSensor(
                        f"probe-{i}",
                        pos,
                        spec=spec,
                        seed=seeds[i],
                        ambient_ppm=scenario.ambient_ppm,
                        ambient_temp_c=scenario.temperature_c,
                        ambient_rh_pct=scenario.humidity_pct,
                        geometry=self.geometry,
                    )
                )

        self.avatar_pos = tuple(scenario.wearable_spawn)
        self.walk_target: tuple[float, float] | None = None
        self.bubbles: list[bub.Bubble] = []
        self._bubble_counter = 0

        self.status = "running"  # running | complete | aborted
        self.ended = False
        self.completed_t: float | None = None
        self._below_since: float | None = None
        self._fired_schedule: set[tuple[str, int]] = set()

        self.events: list[dict] = []
        self._seq = 0
        self.event_sink = None  # optional callable(event_dict)
        self.monitored_samples: list[tuple[float, float]] = []
        self._queue: list[tuple[Command, object]] = []

        self._emit(
            "session_start",
            {
                "session_id": self.id,
                "scenario": scenario.name,
                "mode": mode,
                "seed": self.seed,
                "room": {"dims_m": list(self.geometry.dims_m), "cell_m": self.geometry.cell_m},
                "target_ppm": THRESHOLDS.session_target_ppm,
                "sustain_s": SUSTAIN_S,
            },
        )

    # ------------------------------------------------------------------ util

    def _wrist_anchor(self, xy) -> tuple[float, float, float]:
        return (float(xy[0]), float(xy[1]), WRIST_HEIGHT_M)

    def _emit(self, kind: str, payload: dict) -> None:
        self._seq += 1
        event = {"seq": self._seq, "t": round(self.t, 3), "kind": kind, "payload": payload}
        self.events.append(event)
        if self.event_sink is not None:
            self.event_sink(event)

    def device(self, device_id: str):
        for d in self.devices:
            if d.id == device_id:
                return d
        return None

    def sensor(self, device_id: str) -> VirtualSensor | None:
        for s in self.sensors:
            if s.device_id == device_id:
                return s
        return None

    # -------------------------------------------------------------- commands

    def submit(self, command: Command, on_applied=None) -> None:
        """Queue a command; it applies at the next tick boundary."""
        self._queue.append((command, on_applied))

    def apply_now(self, command: Command) -> dict:
        """Apply immediately (between ticks). Raises CommandError on rejection."""
        return self._apply(command)

    def _apply(self, cmd: Command) -> dict:
        if self.ended:
            raise CommandError(409, "session has ended")
        verb = cmd.verb
        if verb in ("set_state", "aim"):
            dev = self.device(cmd.target)
            if dev is None:
                if any(b.id == cmd.target for b in self.bubbles) or self.sensor(cmd.target):
                    raise CommandError(409, f"verb {verb} not valid for target {cmd.target}")
                raise CommandError(404, f"unknown target {cmd.target!r}")
            if verb == "set_state":
                state = cmd.args.get("state")
                if isinstance(state, str):
                    if state not in ("on", "off"):
                        raise CommandError(400, f"state must be on/off, got {state!r}")
                    state = state == "on"
                if not isinstance(state, bool):
                    raise CommandError(400, "set_state needs args.state on/off")
                if dev.state != state:
                    dev.state = state
                    self._emit_device(dev)
                return {"device": self._device_dict(dev)}
            direction = cmd.args.get("direction")
            if direction is None or len(direction) != 3:
                raise CommandError(400, "aim needs args.direction [x,y,z]")
            if not dev.is_fan:
                raise CommandError(409, f"{dev.kind} cannot be aimed")
            try:
                dev.aim(tuple(float(c) for c in direction))
            except (TypeError, ValueError) as exc:
                raise CommandError(400, f"bad direction: {exc}") from None
            self._emit_device(dev)
            return {"device": self._device_dict(dev)}

        if verb in ("move_avatar", "place_bubble", "start", "stop"):
            if cmd.target not in (self.id, "session"):
                if self.device(cmd.target) is not None or self.sensor(cmd.target) is not None:
                    raise CommandError(409, f"verb {verb} not valid for target {cmd.target}")
                raise CommandError(404, f"unknown target {cmd.target!r}")
            if verb == "move_avatar":
                to = cmd.args.get("to")
                if to is None or len(to) < 2:
                    raise CommandError(400, "move_avatar needs args.to [x,y]")
                x, y = float(to[0]), float(to[1])
                dims = self.geometry.dims_m
                if not (0 <= x <= dims[0] and 0 <= y <= dims[1]):
                    raise CommandError(400, f"target ({x},{y}) outside room")
                self.walk_target = (x, y)
                return {"avatar": self._avatar_dict()}
            if verb == "place_bubble":
                if self.mode != "ar_bubbles":
                    raise CommandError(409, "bubbles are only placed in ar_bubbles mode")
                reading = self.wearable.last_sample
                if reading is None or reading.status != "ok":
                    raise CommandError(409, "wearable has no reading yet (warming)")
                pos = cmd.args.get("position")
                if pos is None:
                    pos = self.wearable.position
                elif len(pos) == 2:
                    pos = self._wrist_anchor(pos)
                else:
                    pos = tuple(float(c) for c in pos)
                if not self.geometry.contains(pos):
                    raise CommandError(400, f"bubble position {pos} outside room")
                self._bubble_counter += 1
                bubble = bub.make_bubble(
                    f"bubble-{self._bubble_counter}", pos, reading.co2_ppm, self.t
                )
                merged = bub.merge_bubbles(self.bubbles + [bubble])
                self._publish_bubbles(merged, placed_id=bubble.id)
                return {"bubbles": [wire.bubble_payload(b) for b in self.bubbles]}
            if verb == "start":
                raise CommandError(409, "session already running")
            # stop
            self.ended = True
            if self.status != "complete":
                self.status = "aborted"
            self._emit("session_end", {"status": self.status})
            return {"status": self.status, "ended": True}

        raise CommandError(400, f"unknown verb {verb!r}")

    def _device_dict(self, dev) -> dict:
        out = {
            "id": dev.id,
            "kind": dev.kind,
            "position": [round(c, 3) for c in dev.position],
            "state": "on" if dev.state else "off",
        }
        if dev.orientation is not None:
            out["orientation"] = [round(c, 4) for c in dev.orientation]
        return out

    def _avatar_dict(self) -> dict:
        return {
            "pos": [round(c, 3) for c in self.avatar_pos],
            "target": None if self.walk_target is None else [round(c, 3) for c in self.walk_target],
        }

    def _emit_device(self, dev) -> None:
        self._emit("device_state", self._device_dict(dev))

    def _publish_bubbles(self, new_bubbles, placed_id: str | None = None) -> None:
        """Swap in a new bubble list, emitting events for visible differences."""
        old = {b.id: b for b in self.bubbles}
        new = {b.id: b for b in new_bubbles}
        for bid in old:
            if bid not in new:
                self._emit("bubble", {"op": "removed", "id": bid})
        for bid, b in new.items():
            prev = old.get(bid)
            if prev is None:
                op = "placed" if bid == placed_id else "merged"
                self._emit("bubble", {"op": op, **wire.bubble_payload(b)})
            elif wire.bubble_payload(prev) != wire.bubble_payload(b):
                self._emit("bubble", {"op": "updated", **wire.bubble_payload(b)})
        self.bubbles = list(new_bubbles)

    # ----------------------------------------------------------------- tick

    def advance(self, wall_dt: float) -> None:
        """One tick: commands, schedules, motion, physics, sensing, completion."""
        if wall_dt < 0:
            raise ValueError("wall_dt must be >= 0")
        if self.ended:
            self._drain_queue()  # reject stragglers with "session has ended"
            return
        if wall_dt == 0:
            return
        self._drain_queue()
        if self.ended:
            return
        sim_dt = wall_dt * self.params.time_scale

        self._fire_schedules()
        self._move_avatar(sim_dt)

        try:
            self.field = step(self.field, self.sources, self.devices, self.params, sim_dt)
        except SolverFault as exc:
            self._emit("fault", {"error": str(exc)})
            self.ended = True
            self.status = "aborted"
            self._emit("session_end", {"status": self.status})
            raise
        self.t = self.field.t

        fresh_wearable: Reading | None = None
        for sensor in self.sensors:
            vox = self.geometry.voxel_of(sensor.position)
            if not self.geometry.is_blocked(vox):
                truth = sample(self.field, sensor.position)
                sensor.tick(truth, sim_dt)
            prev = sensor.last_sample
            reading = sensor.read(self.t)
            if reading.status == "ok" and reading is not prev:
                self._emit("reading", wire.reading_payload(reading))
                if sensor is self.wearable:
                    fresh_wearable = reading

        if self.mode == "ar_bubbles" and self.bubbles:
            if fresh_wearable is not None:
                updated = bub.update_bubbles(
                    self.bubbles, self.wearable.position, fresh_wearable, self.t
                )
            else:
                updated = [bub.age_bubble(b, self.t) for b in self.bubbles]
            self._publish_bubbles(updated)

        self._evaluate_completion()

    def _drain_queue(self) -> None:
        queue, self._queue = self._queue, []
        for cmd, on_applied in queue:
            try:
                result = self._apply(cmd)
                error = None
            except CommandError as exc:
                result, error = None, exc
            if on_applied is not None:
                on_applied(result, error)

    def _fire_schedules(self) -> None:
        for dev in self.devices:
            for i, (t_ev, state) in enumerate(dev.schedule):
                key = (dev.id, i)
                if t_ev <= self.t and key not in self._fired_schedule:
                    self._fired_schedule.add(key)
                    if dev.state != state:
                        dev.state = state
                        self._emit_device(dev)

    def _move_avatar(self, sim_dt: float) -> None:
        if self.walk_target is None:
            return
        x, y = self.avatar_pos
        tx, ty = self.walk_target
        dx, dy = tx - x, ty - y
        dist = math.hypot(dx, dy)
        max_d = AVATAR_SPEED_MS * sim_dt
        if dist <= max_d:
            self.avatar_pos = (tx, ty)
            self.walk_target = None
        else:
            self.avatar_pos = (x + dx / dist * max_d, y + dy / dist * max_d)
        wrist = self._wrist_anchor(self.avatar_pos)
        if self.wearable is not None:
            self.wearable.set_position(wrist)
        for dev in self.devices:
            if dev.kind == "hand_fan":
                dev.position = wrist
        self._emit("avatar", self._avatar_dict())

    # ----------------------------------------------------------- monitoring

    def monitored_values(self) -> list[tuple[str, float]]:
        """Latest reading per monitored point; empty until everything reports."""
        if self.mode == "ar_bubbles":
            return [(b.id, b.last_ppm) for b in self.bubbles]
        vals = []
        for s in self.sensors:
            if s.last_sample is None or s.last_sample.status != "ok":
                return []
            vals.append((s.device_id, s.last_sample.co2_ppm))
        return vals

    def _evaluate_completion(self) -> None:
        monitored = self.monitored_values()
        if not monitored:
            self._below_since = None
            return
        avg = sum(v for _, v in monitored) / len(monitored)
        self.monitored_samples.append((self.t, avg))
        if all(v <= THRESHOLDS.session_target_ppm for _, v in monitored):
            if self._below_since is None:
                self._below_since = self.t
            if (
                self.completed_t is None
                and self.t - self._below_since >= SUSTAIN_S
            ):
                self.completed_t = self.t
                self.status = "complete"
                self._emit(
                    "completion",
                    {
                        "completed_t": round(self.t, 3),
                        "sustained_s": SUSTAIN_S,
                        "target_ppm": THRESHOLDS.session_target_ppm,
                    },
                )
        else:
            self._below_since = None

    def check_completion(self) -> str:
        return self.status

    def metrics(self) -> SessionMetrics:
        return compute_metrics(self.monitored_samples)

    def heatmap(self, height_label: str) -> dict:
        """Field sampled on the scenario probe grid at the named height layer.

        Serves hue per cell alongside ppm so clients render without owning
        the color law.
        """
        h = self.scenario.probe_grid.height_of(height_label)
        positions = self.scenario.probe_grid.xy_positions(self.geometry.dims_m)
        values = [round(sample(self.field, (x, y, h)), 1) for x, y in positions]
        hues = [round(bub.bubble_visual(v).hue_deg, 2) for v in values]
        cols = (
            self.scenario.probe_grid.cols
            if self.scenario.probe_grid.positions is None
            else len(positions)
        )
        rows = [values[i : i + cols] for i in range(0, len(values), cols)]
        hue_rows = [hues[i : i + cols] for i in range(0, len(hues), cols)]
        return {
            "height": height_label,
            "height_m": h,
            "positions": [[round(x, 3), round(y, 3)] for x, y in positions],
            "values": rows,
            "hues": hue_rows,
        }

    # ------------------------------------------------------------- snapshot

    def snapshot(self) -> dict:
        readings = {}
        for s in self.sensors:
            if s.last_sample is not None:
                readings[s.device_id] = wire.reading_payload(s.last_sample)
            else:
                readings[s.device_id] = wire.reading_payload(
                    Reading(s.device_id, self.t, None, None, None, "warming")
                )
        return {
            "session_id": self.id,
            "scenario": self.scenario.name,
            "mode": self.mode,
            "status": self.status,
            "ended": self.ended,
            "t": round(self.t, 3),
            "time_scale": self.params.time_scale,
            "room": {
                "dims_m": list(self.geometry.dims_m),
                "cell_m": self.geometry.cell_m,
                "partitions": [
                    {"min": list(b.lo), "max": list(b.hi)} for b in self.scenario.partitions
                ],
            },
            "avatar": self._avatar_dict(),
            "devices": [self._device_dict(d) for d in self.devices],
            "bubbles": [wire.bubble_payload(b) for b in self.bubbles],
            "readings": readings,
            "completion": {
                "complete": self.status == "complete",
                "completed_t": None if self.completed_t is None else round(self.completed_t, 3),
                "target_ppm": THRESHOLDS.session_target_ppm,
                "sustain_s": SUSTAIN_S,
            },
            "seq": self._seq,
        }
