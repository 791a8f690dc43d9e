"""Headless batch runs: probe traces, heatmap exports, and calibration sweeps."""

from __future__ import annotations

import colorsys
import csv
import json
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bubbles import HUE_GREEN_DEG, PPM_HIGH, PPM_LOW
from .errors import ScenarioError
from .field import init_field, sample, step
from .scenario import Scenario


def _apply_schedules(devices, t: float, fired: set) -> None:
    for dev in devices:
        for i, (t_ev, state) in enumerate(dev.schedule):
            key = (dev.id, i)
            if t_ev <= t and key not in fired:
                fired.add(key)
                dev.state = state


def run_headless(
    scenario: Scenario,
    duration_s: float,
    out_dir,
    sample_every_s: float = 10.0,
    snapshot_every_s: float | None = None,
) -> dict:
    """Step the scenario without a UI, writing a probe time-series CSV.

    Returns paths and a small summary. Deterministic per scenario (the batch
    path uses no randomness at all).
    """
    if duration_s < 0:
        raise ValueError("duration_s must be >= 0")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    geometry = scenario.build_geometry()
    params = scenario.build_params()
    devices = scenario.build_devices(geometry)
    sources = list(scenario.sources)
    field = init_field(geometry, scenario.ambient_ppm)

    grid = scenario.probe_grid
    xy = grid.xy_positions(geometry.dims_m)
    probes = [
        (x, y, h) for (x, y) in xy for _, h in grid.heights
    ]
    columns = grid.column_names()

    trace_path = out / f"{scenario.name}_trace.csv"
    meta_path = out / f"{scenario.name}_trace.meta.json"
    snap_dir = out / "snapshots"
    fired: set = set()
    written = 0

    with trace_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_s"] + columns)

        def write_row(t: float) -> None:
            nonlocal written
            row = [f"{t:.3f}"] + [f"{sample(field, p):.4f}" for p in probes]
            writer.writerow(row)
            written += 1

        def snap(t: float) -> None:
            snap_dir.mkdir(exist_ok=True)
            np.save(snap_dir / f"c_{int(round(t)):08d}.npy", field.c)

        if duration_s > 0:
            _apply_schedules(devices, 0.0, fired)
            write_row(0.0)
            if snapshot_every_s is not None:
                snap(0.0)
            next_sample = sample_every_s
            next_snap = snapshot_every_s
            t = 0.0
            while t < duration_s - 1e-9:
                tick = min(params.dt, duration_s - t)
                _apply_schedules(devices, t, fired)
                field = step(field, sources, devices, params, tick)
                t = field.t
                if t >= next_sample - 1e-9:
                    write_row(t)
                    next_sample += sample_every_s
                if next_snap is not None and t >= next_snap - 1e-9:
                    snap(t)
                    next_snap += snapshot_every_s

    meta = {
        "scenario": scenario.name,
        "duration_s": duration_s,
        "sample_every_s": sample_every_s,
        "rows": grid.rows if grid.positions is None else 1,
        "cols": grid.cols if grid.positions is None else len(xy),
        "heights": {k: v for k, v in grid.heights},
        "positions": [[x, y] for x, y in xy],
        "dims_m": list(geometry.dims_m),
        "cell_m": geometry.cell_m,
    }
    meta_path.write_text(json.dumps(meta, indent=2))
    return {
        "trace": str(trace_path),
        "meta": str(meta_path),
        "rows_written": written,
        "final_t": field.t,
    }


def read_trace(trace_path) -> tuple[list[str], np.ndarray]:
    """Header names (without t_s) and a (rows, 1+n) float array of the trace."""
    with Path(trace_path).open() as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    return header[1:], np.array(rows) if rows else np.empty((0, len(header)))


def ppm_color(ppm: float) -> tuple[float, float, float]:
    """RGB color for a concentration, same hue law the bubbles use."""
    u = min(max((ppm - PPM_LOW) / (PPM_HIGH - PPM_LOW), 0.0), 1.0)
    hue = (1.0 - u) * HUE_GREEN_DEG / 360.0
    return colorsys.hsv_to_rgb(hue, 0.85, 0.95)


def render_heatmap(trace_path, t: float, height: str, out_dir=None) -> dict:
    """Export the probe grid at time ``t`` and height layer as CSV and PNG."""
    if height not in ("G", "T", "C"):
        raise ScenarioError(f"unknown probe height {height!r}; expected one of G, T, C")
    names, data = read_trace(trace_path)
    if data.size == 0:
        raise ValueError("trace has no samples")
    times = data[:, 0]
    if not (times[0] - 1e-9 <= t <= times[-1] + 1e-9):
        raise ValueError(f"t={t} outside trace [{times[0]}, {times[-1]}]")
    row = data[int(np.argmin(np.abs(times - t)))]

    sel = [(i, n) for i, n in enumerate(names) if n.endswith(f"_{height}")]
    n_rows = max(int(n[1 : n.index("c")]) for _, n in sel) + 1
    n_cols = max(int(n[n.index("c") + 1 : n.index("_")]) for _, n in sel) + 1
    grid = np.zeros((n_rows, n_cols))
    for i, name in sel:
        r = int(name[1 : name.index("c")])
        c = int(name[name.index("c") + 1 : name.index("_")])
        grid[r, c] = row[i + 1]

    out = Path(out_dir) if out_dir else Path(trace_path).parent
    out.mkdir(parents=True, exist_ok=True)
    stem = f"heatmap_{height}_t{int(round(t))}"
    csv_path = out / f"{stem}.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        for r in range(n_rows):
            writer.writerow([f"{v:.2f}" for v in grid[r]])

    png_path = out / f"{stem}.png"
    _plot_grid(grid, height, t, png_path)
    return {"csv": str(csv_path), "png": str(png_path), "grid": grid.tolist()}


def _plot_grid(grid: np.ndarray, height: str, t: float, png_path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.colors import ListedColormap

    ramp = ListedColormap([ppm_color(p) for p in np.linspace(PPM_LOW, PPM_HIGH, 256)])
    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.imshow(grid, cmap=ramp, vmin=PPM_LOW, vmax=PPM_HIGH, origin="lower")
    ax.set_title(f"[{height}] CO2 ppm at t={t:.0f}s")
    ax.set_xlabel("probe column")
    ax.set_ylabel("probe row")
    fig.colorbar(im, ax=ax, label="ppm")
    for (r, c), v in np.ndenumerate(grid):
        ax.text(c, r, f"{v:.0f}", ha="center", va="center", fontsize=8)
    fig.tight_layout()
    fig.savefig(png_path, dpi=110)
    plt.close(fig)


def corner_table_max(scenario: Scenario, trace_names, trace_row) -> float:
    """Max over the four corner probes at table height for one trace row."""
    grid = scenario.probe_grid
    n_rows, n_cols = grid.rows, grid.cols
    corners = {(0, 0), (0, n_cols - 1), (n_rows - 1, 0), (n_rows - 1, n_cols - 1)}
    vals = []
    for i, name in enumerate(trace_names):
        if not name.endswith("_T"):
            continue
        r = int(name[1 : name.index("c")])
        c = int(name[name.index("c") + 1 : name.index("_")])
        if (r, c) in corners:
            vals.append(trace_row[i + 1])
    return max(vals)


def calibrate(
    scenario: Scenario,
    target_ppm: float = 1635.0,
    target_minutes: float = 90.0,
    window_minutes: float = 15.0,
    bracket=(1400.0, 1900.0),
    emission_scales=(0.6, 0.8, 1.0, 1.25, 1.5),
    diffusivity_scales=(0.6, 0.8, 1.0, 1.25),
    out_dir=None,
    progress=print,
) -> dict:
    """Sweep emission and mixing scales; score each run by how close the
    table-height corner maximum lands to the target at the target time.

    Returns the best setting and whether it satisfies the acceptance bracket:
    the corner maximum passes through [bracket] somewhere inside the target
    window.
    """
    import tempfile

    base_params = scenario.build_params()
    results = []
    lo_t = (target_minutes - window_minutes) * 60.0
    hi_t = (target_minutes + window_minutes) * 60.0
    duration = hi_t

    for es in emission_scales:
        for ds in diffusivity_scales:
            sc = replace(
                scenario,
                sources=tuple(
                    replace(s, emission_m3s=s.emission_m3s * es) for s in scenario.sources
                ),
                params={**scenario.params, "diffusivity": base_params.diffusivity * ds},
            )
            with tempfile.TemporaryDirectory() as tmp:
                run_headless(sc, duration, tmp, sample_every_s=60.0)
                names, data = read_trace(Path(tmp) / f"{sc.name}_trace.csv")
            series = [
                (row[0], corner_table_max(sc, names, row)) for row in data
            ]
            at_target = min(series, key=lambda s: abs(s[0] - target_minutes * 60.0))[1]
            in_window = [m for t, m in series if lo_t <= t <= hi_t]
            bracket_ok = any(bracket[0] <= m <= bracket[1] for m in in_window)
            score = abs(at_target - target_ppm)
            results.append(
                {
                    "emission_scale": float(es),
                    "diffusivity_scale": float(ds),
                    "corner_max_at_target": round(float(at_target), 1),
                    "bracket_ok": bool(bracket_ok),
                    "score": round(float(score), 1),
                }
            )
            progress(
                f"emission x{es:<5} diffusivity x{ds:<5} -> corner max {at_target:7.1f} ppm "
                f"at {target_minutes:.0f} min, bracket {'PASS' if bracket_ok else 'miss'}"
            )

    best = min(results, key=lambda r: (not r["bracket_ok"], r["score"]))
    summary = {"target_ppm": target_ppm, "target_minutes": target_minutes, "best": best,
               "results": results}
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "calibration.json").write_text(json.dumps(summary, indent=2))
    return summary
