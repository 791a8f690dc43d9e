import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ventlab.bubbles import (
    Bubble,
    BubbleStyle,
    HealthThresholds,
    bubble_visual,
    make_bubble,
    merge_bubbles,
    staleness_opacity,
    update_bubbles,
)
from ventlab.sensor import Reading


def ok_reading(ppm: float, t: float = 100.0) -> Reading:
    return Reading("wearable-0", t, ppm, 25.0, 50.0, "ok")


# ----------------------------------------------------------- visual law

def test_green_anchor_bit_exact():
    style = bubble_visual(400.0)
    assert style.diameter_m == 0.2
    assert style.hue_deg == 120.0
    assert style.opacity == 1.0


def test_red_anchor_bit_exact():
    style = bubble_visual(3000.0)
    assert style.diameter_m == 1.5
    assert style.hue_deg == 0.0


def test_midpoint_is_yellow_085m():
    style = bubble_visual(1700.0)
    assert style.diameter_m == pytest.approx(0.85, abs=1e-12)
    assert style.hue_deg == pytest.approx(60.0, abs=1e-12)


def test_clamps_below_and_above():
    assert bubble_visual(350.0) == bubble_visual(400.0)
    assert bubble_visual(5000.0) == bubble_visual(3000.0)


def test_negative_ppm_rejected():
    with pytest.raises(ValueError):
        bubble_visual(-1.0)


def test_monotonicity_random_pairs():
    rng = np.random.default_rng(0)
    pairs = rng.uniform(0.0, 6000.0, size=(10_000, 2))
    for a, b in pairs:
        lo, hi = min(a, b), max(a, b)
        sa, sb = bubble_visual(lo), bubble_visual(hi)
        assert sa.diameter_m <= sb.diameter_m
        assert sa.hue_deg >= sb.hue_deg  # hue falls toward red as ppm rises


# ------------------------------------------------------------ staleness

def test_staleness_half_life():
    assert staleness_opacity(0.0) == 1.0
    assert staleness_opacity(300.0) == pytest.approx(0.5)
    assert staleness_opacity(600.0) == pytest.approx(0.25)


def test_staleness_floor():
    assert staleness_opacity(36000.0) == 0.15


# --------------------------------------------------------------- update

def test_bubble_within_reach_refreshes():
    b = make_bubble("bubble-1", (1.0, 1.0, 0.75), 1500.0, 0.0)
    out = update_bubbles([b], (1.5, 1.0, 0.75), ok_reading(600.0), now=10.0)
    assert out[0].last_ppm == 600.0
    assert out[0].updated_t == 10.0
    assert out[0].style == bubble_visual(600.0)


def test_bubble_outside_reach_untouched_but_fades():
    b = make_bubble("bubble-1", (1.0, 1.0, 0.75), 1500.0, 0.0)
    out = update_bubbles([b], (3.5, 1.0, 0.75), ok_reading(600.0), now=600.0)
    assert out[0].last_ppm == 1500.0
    assert out[0].style.opacity == pytest.approx(0.25)
    assert out[0].style.diameter_m == b.style.diameter_m


def test_boundary_exactly_one_meter_refreshes():
    b = make_bubble("bubble-1", (1.0, 1.0, 0.75), 1500.0, 0.0)
    out = update_bubbles([b], (2.0, 1.0, 0.75), ok_reading(500.0), now=5.0)
    assert out[0].last_ppm == 500.0


def test_update_requires_ok_reading():
    b = make_bubble("bubble-1", (1.0, 1.0, 0.75), 1500.0, 0.0)
    warming = Reading("wearable-0", 10.0, None, None, None, "warming")
    with pytest.raises(ValueError):
        update_bubbles([b], (1.0, 1.0, 0.75), warming, now=10.0)


@settings(max_examples=200, deadline=None)
@given(
    bx=st.floats(0, 5), by=st.floats(0, 5),
    wx=st.floats(0, 5), wy=st.floats(0, 5),
    ppm=st.floats(400, 3000),
)
def test_proximity_gating_property(bx, by, wx, wy, ppm):
    """last_ppm changes only when the wearer is within 1 m."""
    b = make_bubble("bubble-1", (bx, by, 0.75), 1111.0, 0.0)
    out = update_bubbles([b], (wx, wy, 0.75), ok_reading(ppm), now=1.0)[0]
    dist = ((bx - wx) ** 2 + (by - wy) ** 2) ** 0.5
    if dist <= 1.0:
        assert out.last_ppm == ppm
    else:
        assert out.last_ppm == 1111.0


# ---------------------------------------------------------------- merge

def test_merge_two_close_bubbles():
    b1 = make_bubble("bubble-1", (1.0, 1.0, 0.75), 800.0, 0.0)
    b2 = make_bubble("bubble-2", (1.1, 1.0, 0.75), 1200.0, 5.0)
    out = merge_bubbles([b1, b2], 0.3)
    assert len(out) == 1
    m = out[0]
    assert m.id == "bubble-1"  # lowest id survives
    assert m.position[0] == pytest.approx(1.05)
    assert m.last_ppm == 1200.0  # freshest reading wins
    assert m.placed_t == 0.0


def test_merge_leaves_distant_bubbles():
    b1 = make_bubble("bubble-1", (0.5, 0.5, 0.75), 800.0, 0.0)
    b2 = make_bubble("bubble-2", (4.5, 4.5, 0.75), 900.0, 0.0)
    out = merge_bubbles([b1, b2], 0.5)
    assert {b.id for b in out} == {"bubble-1", "bubble-2"}


def test_merge_empty_set():
    assert merge_bubbles([], 0.5) == []


def test_merge_chain_collapses_transitively():
    bs = [
        make_bubble(f"bubble-{i}", (0.4 * i, 0.0, 0.75), 500.0 + i, float(i))
        for i in range(4)
    ]
    out = merge_bubbles(bs, 0.5)
    assert len(out) == 1
    assert out[0].id == "bubble-0"
    assert out[0].last_ppm == 503.0


@settings(max_examples=100, deadline=None)
@given(
    st.lists(
        st.tuples(st.floats(0, 4), st.floats(0, 4), st.floats(400, 3000)),
        min_size=0,
        max_size=8,
    )
)
def test_merge_idempotent(items):
    bubbles = [
        make_bubble(f"bubble-{i}", (x, y, 0.75), ppm, float(i))
        for i, (x, y, ppm) in enumerate(items)
    ]
    once = merge_bubbles(bubbles, 0.5)
    twice = merge_bubbles(once, 0.5)
    assert once == twice


def test_merge_radius_must_be_positive():
    with pytest.raises(ValueError):
        merge_bubbles([], 0.0)


# ------------------------------------------------------------ thresholds

def test_health_thresholds_defaults():
    th = HealthThresholds()
    assert th.cognition_ppm == 1000.0
    assert th.symptoms_ppm == 2000.0
    assert th.session_target_ppm == 800.0


def test_health_thresholds_ordering_enforced():
    with pytest.raises(ValueError):
        HealthThresholds(cognition_ppm=700.0)
