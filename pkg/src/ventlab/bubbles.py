"""Mapping CO2 readings to bubble visuals, and the bubble lifecycle rules.

Anchors: 400 ppm renders as a green 0.2 m bubble, 3000 ppm as a red 1.5 m
bubble; diameter and hue are linear in between and clamp outside. A bubble
only refreshes while the wearer stands within 1 m of it; unattended bubbles
fade toward transparent so stale data looks stale.

All functions are pure over bubble lists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

PPM_LOW = 400.0
PPM_HIGH = 3000.0
DIAMETER_LOW_M = 0.2
DIAMETER_HIGH_M = 1.5
HUE_GREEN_DEG = 120.0
HUE_RED_DEG = 0.0

PROXIMITY_RADIUS_M = 1.0
STALENESS_HALF_LIFE_S = 300.0
OPACITY_FLOOR = 0.15
MERGE_RADIUS_M = 0.5


@dataclass(frozen=True)
class HealthThresholds:
    """Concentration levels the game surfaces to the player."""

    cognition_ppm: float = 1000.0
    symptoms_ppm: float = 2000.0
    session_target_ppm: float = 800.0

    def __post_init__(self) -> None:
        if not (self.session_target_ppm < self.cognition_ppm < self.symptoms_ppm):
            raise ValueError("expected target < cognition < symptoms")


@dataclass(frozen=True)
class BubbleStyle:
    hue_deg: float
    diameter_m: float
    opacity: float = 1.0


@dataclass(frozen=True)
class Bubble:
    id: str
    position: tuple[float, float, float]
    last_ppm: float
    placed_t: float
    updated_t: float
    style: BubbleStyle


def bubble_visual(ppm: float) -> BubbleStyle:
    """Style for a fresh reading. Linear between the two anchor points, clamped."""
    if ppm < 0:
        raise ValueError(f"ppm must be >= 0, got {ppm}")
    u = (ppm - PPM_LOW) / (PPM_HIGH - PPM_LOW)
    u = min(max(u, 0.0), 1.0)
    # lerp form keeps both anchors bit-exact
    diameter = (1.0 - u) * DIAMETER_LOW_M + u * DIAMETER_HIGH_M
    hue = (1.0 - u) * HUE_GREEN_DEG + u * HUE_RED_DEG
    return BubbleStyle(hue_deg=hue, diameter_m=diameter, opacity=1.0)


def staleness_opacity(age_s: float) -> float:
    """Exponential fade with a readability floor."""
    if age_s <= 0:
        return 1.0
    return max(OPACITY_FLOOR, 0.5 ** (age_s / STALENESS_HALF_LIFE_S))


def make_bubble(bubble_id: str, position, ppm: float, now: float) -> Bubble:
    return Bubble(
        id=bubble_id,
        position=tuple(float(c) for c in position),
        last_ppm=float(ppm),
        placed_t=float(now),
        updated_t=float(now),
        style=bubble_visual(ppm),
    )


def update_bubbles(bubbles, wearer_position, reading, now: float) -> list[Bubble]:
    """Refresh bubbles within reach of the wearer; age the styles of the rest."""
    if reading.status != "ok":
        raise ValueError("update_bubbles needs an ok reading")
    wx, wy, wz = (float(c) for c in wearer_position)
    out = []
    for b in bubbles:
        dx, dy, dz = b.position[0] - wx, b.position[1] - wy, b.position[2] - wz
        if math.sqrt(dx * dx + dy * dy + dz * dz) <= PROXIMITY_RADIUS_M:
            out.append(
                replace(
                    b,
                    last_ppm=float(reading.co2_ppm),
                    updated_t=float(now),
                    style=bubble_visual(reading.co2_ppm),
                )
            )
        else:
            out.append(age_bubble(b, now))
    return out


def age_bubble(bubble: Bubble, now: float) -> Bubble:
    opacity = staleness_opacity(now - bubble.updated_t)
    if opacity == bubble.style.opacity:
        return bubble
    return replace(bubble, style=replace(bubble.style, opacity=opacity))


def merge_bubbles(bubbles, merge_radius_m: float = MERGE_RADIUS_M) -> list[Bubble]:
    """Collapse clusters of bubbles closer than the radius.

    Each connected cluster becomes one bubble at the member centroid carrying
    the freshest reading; the lowest id survives. Repeats until no two centers
    are within the radius, so the operation is idempotent.
    """
    if merge_radius_m <= 0:
        raise ValueError("merge_radius_m must be positive")
    current = sorted(bubbles, key=lambda b: b.id)
    while True:
        clusters = _clusters(current, merge_radius_m)
        if all(len(c) == 1 for c in clusters):
            return current
        merged = []
        for cluster in clusters:
            if len(cluster) == 1:
                merged.append(cluster[0])
                continue
            n = len(cluster)
            centroid = tuple(
                sum(b.position[a] for b in cluster) / n for a in range(3)
            )
            freshest = max(cluster, key=lambda b: (b.updated_t, b.id))
            survivor_id = min(b.id for b in cluster)
            merged.append(
                Bubble(
                    id=survivor_id,
                    position=centroid,
                    last_ppm=freshest.last_ppm,
                    placed_t=min(b.placed_t for b in cluster),
                    updated_t=freshest.updated_t,
                    style=freshest.style,
                )
            )
        current = sorted(merged, key=lambda b: b.id)


def _clusters(bubbles, radius: float) -> list[list[Bubble]]:
    """Connected components under pairwise center distance <= radius."""
    n = len(bubbles)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            pi, pj = bubbles[i].position, bubbles[j].position
            d2 = sum((pi[a] - pj[a]) ** 2 for a in range(3))
            if d2 <= radius * radius:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[Bubble]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(bubbles[i])
    return [groups[r] for r in sorted(groups)]
