"""Scripted session drivers.

Two players for the same scenario: the *informed* driver reacts to what the
bubbles show (ventilators on as soon as any bubble reads over target, fan
aimed at the hottest bubble), while the *uniform* driver toggles through the
available devices blindly, one at a time on a fixed rotation, never aiming.
Both patrol their placed bubbles identically so monitoring is equal; only the
use of the information differs. Used to demonstrate that acting on situated
readings clears a room faster than blind toggling.
"""

from __future__ import annotations

import math

from .bubbles import HealthThresholds
from .devices import WINDOW_KINDS
from .scenario import Scenario
from .session import Command, Session

TARGET = HealthThresholds().session_target_ppm
DWELL_S = 6.0  # unmoving time at a waypoint; covers one 5 s poll
UNIFORM_TOGGLE_S = 30.0


class _Driver:
    """Shared waypoint logic: place one bubble per source, then patrol them."""

    def __init__(self, session: Session):
        self.session = session
        self.waypoints = _bubble_sites(session.scenario)
        self.placed: set[int] = set()
        self.wp_index = 0
        self.dwell_until = 0.0
        self.moving = False

    def _at_waypoint(self) -> bool:
        wx, wy = self.waypoints[self.wp_index]
        ax, ay = self.session.avatar_pos
        return math.hypot(ax - wx, ay - wy) < 0.05

    def _try_place(self) -> None:
        s = self.session
        if self.wp_index in self.placed or not self._at_waypoint():
            return
        if s.wearable.last_sample is not None:  # preheat over, a reading exists
            s.apply_now(Command(s.id, "place_bubble", {}))
            self.placed.add(self.wp_index)

    def _go(self, index: int) -> None:
        self.wp_index = index
        self.session.apply_now(
            Command(self.session.id, "move_avatar", {"to": list(self.waypoints[index])})
        )
        self.moving = True

    def step_navigation(self) -> None:
        s = self.session
        if self.moving:
            if s.walk_target is None:  # arrived
                self.moving = False
                self.dwell_until = s.t + DWELL_S
                self._try_place()
            return
        if s.t < self.dwell_until:
            self._try_place()
            return
        if not self._at_waypoint():
            self._go(self.wp_index)
            return
        if self.wp_index not in self.placed:
            self._try_place()
            if self.wp_index not in self.placed:
                return  # stay put until the sensor warms up
        self._go((self.wp_index + 1) % len(self.waypoints))

    def act(self) -> None:
        raise NotImplementedError


class InformedDriver(_Driver):
    """Turns on exchange devices and aims fans at the hottest over-target bubble."""

    def act(self) -> None:
        self.step_navigation()
        s = self.session
        hot = [b for b in s.bubbles if b.last_ppm > TARGET]
        if not hot:
            return
        hottest = max(hot, key=lambda b: (b.last_ppm, b.id))
        for dev in s.devices:
            if dev.kind in WINDOW_KINDS and not dev.state:
                s.apply_now(Command(dev.id, "set_state", {"state": "on"}))
            elif dev.kind == "pedestal_fan":
                direction = tuple(
                    hottest.position[a] - dev.position[a] for a in range(3)
                )
                if any(abs(c) > 1e-9 for c in direction):
                    current = dev.orientation
                    want = _unit(direction)
                    if not dev.state or _angle_off(current, want) > 0.05:
                        s.apply_now(Command(dev.id, "aim", {"direction": list(want)}))
                if not dev.state:
                    s.apply_now(Command(dev.id, "set_state", {"state": "on"}))


class UniformDriver(_Driver):
    """Blind rotation: exactly one device on at a time, switched every 30 s."""

    def __init__(self, session: Session):
        super().__init__(session)
        self.order = sorted(d.id for d in session.devices)
        self.active = -1
        self.next_switch = 0.0

    def act(self) -> None:
        self.step_navigation()
        s = self.session
        if s.t < self.next_switch:
            return
        if self.active >= 0:
            s.apply_now(Command(self.order[self.active], "set_state", {"state": "off"}))
        self.active = (self.active + 1) % len(self.order)
        s.apply_now(Command(self.order[self.active], "set_state", {"state": "on"}))
        self.next_switch = s.t + UNIFORM_TOGGLE_S


DRIVERS = {"informed": InformedDriver, "uniform": UniformDriver}


def run_policy(
    scenario: Scenario,
    policy: str,
    seed: int = 0,
    tick_s: float = 0.5,
    max_sim_s: float = 1800.0,
) -> dict:
    """Play one session to completion (or the cap). Returns timing and metrics."""
    session = Session(scenario, mode="ar_bubbles", seed=seed, time_scale=1.0)
    driver = DRIVERS[policy](session)
    while session.t < max_sim_s and session.status != "complete":
        driver.act()
        session.advance(tick_s)
    completed = session.status == "complete"
    return {
        "policy": policy,
        "seed": seed,
        "completed": completed,
        "completion_t": session.completed_t if completed else None,
        "elapsed_t": session.t,
        "session": session,
    }


def _bubble_sites(scenario: Scenario) -> list[tuple[float, float]]:
    """Where to monitor: one site per source cluster (deduplicated within 1 m)."""
    sites: list[tuple[float, float]] = []
    for src in scenario.sources:
        xy = (src.position[0], src.position[1])
        if all(math.hypot(xy[0] - s[0], xy[1] - s[1]) > 1.0 for s in sites):
            sites.append(xy)
    if not sites:
        sites.append(tuple(scenario.wearable_spawn))
    return sites


def _unit(v):
    n = math.sqrt(sum(c * c for c in v))
    return tuple(c / n for c in v)


def _angle_off(a, b) -> float:
    dot = max(-1.0, min(1.0, sum(x * y for x, y in zip(a, b))))
    return math.acos(dot)
