"""Wire formats: JSON payload builders shared by the HTTP service and event log.

Field order is fixed and floats are rounded to wire precision so identical
states serialize to identical bytes (golden-file stable).
"""

from __future__ import annotations

import json

from .bubbles import Bubble
from .sensor import Reading


def reading_payload(reading: Reading) -> dict:
    """Measurement as served to clients. co2_ppm present iff status is ok."""
    payload: dict = {
        "device_id": reading.device_id,
        "ts_ms": int(round(reading.t * 1000)),
    }
    if reading.status == "ok":
        payload["co2_ppm"] = round(reading.co2_ppm, 1)
        payload["temp_c"] = round(reading.temp_c, 2)
        payload["rh_pct"] = round(reading.rh_pct, 2)
    payload["status"] = reading.status
    return payload


def bubble_payload(bubble: Bubble) -> dict:
    return {
        "id": bubble.id,
        "pos": [round(c, 3) for c in bubble.position],
        "ppm": round(bubble.last_ppm, 1),
        "diameter_m": round(bubble.style.diameter_m, 4),
        "hue_deg": round(bubble.style.hue_deg, 2),
        "opacity": round(bubble.style.opacity, 2),
        "updated_t": round(bubble.updated_t, 3),
    }


def event_line(event: dict) -> str:
    """One event as a newline-delimited JSON record."""
    return json.dumps(event, separators=(",", ":"))


def dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))
