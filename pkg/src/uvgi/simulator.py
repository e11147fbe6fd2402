"""Execution simulation against a discretized dose accumulator grid.

Two integrators share the deposition model (nearest-cell assignment of
kernel elements onto the grid):

  * accumulate_static: the idealized constant-velocity spanning model --
    the kernel steps along the waypoint polyline in element-size increments
    and each step deposits irradiance * (element_size / velocity).
  * simulate_execution: time-stepped motion with per-segment trapezoidal
    (or constant) speed, lamp decay, and a virtual sensor array sampling
    the continuous irradiance field.

Light is deposited as a perpendicular projection of the kernel onto the
plane; doses only ever increase.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .planner import CoveragePlan
from .radiometry import IrradianceProfile, KernelMask, LampDecayModel, eval_profile, lamp_scale


@dataclass
class DoseGrid:
    """2D accumulator of delivered dose (J/m^2) over the output surface."""

    origin: tuple[float, float]
    resolution: float
    cells: np.ndarray  # (height, width) row-major, y-major
    region_mask: np.ndarray  # bool, same shape

    @classmethod
    def for_surface(
        cls,
        width_m: float,
        length_m: float,
        resolution: float = 0.01,
        origin: tuple[float, float] = (0.0, 0.0),
    ) -> "DoseGrid":
        if width_m <= 0 or length_m <= 0 or resolution <= 0:
            raise DomainError("surface dimensions and resolution must be positive")
        width = max(1, round(width_m / resolution))
        height = max(1, round(length_m / resolution))
        return cls(
            origin=origin,
            resolution=resolution,
            cells=np.zeros((height, width)),
            region_mask=np.zeros((height, width), dtype=bool),
        )

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """(x, y) coordinate arrays of every cell center, shape (H, W)."""
        x = self.origin[0] + (np.arange(self.width) + 0.5) * self.resolution
        y = self.origin[1] + (np.arange(self.height) + 0.5) * self.resolution
        return np.meshgrid(x, y)

    def mark_region(self, polygon) -> None:
        """Flag cells whose center lies inside the polygon as region members."""
        pts = np.asarray(polygon, dtype=float)
        xs, ys = self.cell_centers()
        inside = np.zeros(xs.shape, dtype=bool)
        n = len(pts)
        for i in range(n):
            x1, y1 = pts[i]
            x2, y2 = pts[(i + 1) % n]
            crosses = (y1 <= ys) != (y2 <= ys)
            with np.errstate(divide="ignore", invalid="ignore"):
                x_cross = x1 + (ys - y1) * (x2 - x1) / (y2 - y1)
            inside ^= crosses & (xs < x_cross)
        self.region_mask = inside

    def copy(self) -> "DoseGrid":
        return DoseGrid(
            origin=self.origin,
            resolution=self.resolution,
            cells=self.cells.copy(),
            region_mask=self.region_mask.copy(),
        )


@dataclass(frozen=True)
class MotionProfile:
    """Per-segment speed profile: constant, or trapezoidal from/to rest."""

    kind: str = "trapezoidal"
    accel: float = 1.0
    commanded_velocity: float | None = None  # None: use the plan's velocity

    def __post_init__(self) -> None:
        if self.kind not in ("constant", "trapezoidal"):
            raise ConfigurationError(f"unknown motion kind '{self.kind}'")
        if self.accel <= 0:
            raise ConfigurationError(f"accel must be positive, got {self.accel}")


@dataclass(frozen=True)
class VirtualSensorArray:
    """Point sensors sampling the irradiance field at fixed surface positions.

    Readings clamp to [0, saturation]; the tolerance is reported metadata
    unless noise injection is enabled, in which case uniform +/- tolerance
    noise is applied before clamping.
    """

    positions: tuple[tuple[float, float], ...]
    noise_tolerance: float = 10.0  # +/- W/m^2 (+/- 1 mW/cm^2)
    saturation: float = 400.0  # W/m^2 (40 mW/cm^2)
    sample_rate: float = 100.0  # Hz
    noise_enabled: bool = False
    seed: int = 0

    @classmethod
    def line(
        cls,
        count: int = 15,
        length: float = 1.0,
        lateral: float = 0.05,
        start: float = 0.0,
        axis: str = "y",
        **kwargs,
    ) -> "VirtualSensorArray":
        """Evenly spaced sensors along a line, like the physical sensor bar.

        The bar runs along the given axis (default y, the long axis of the
        standard 0.1 x 1 m surface) at the given lateral offset.
        """
        marks = np.linspace(start, start + length, count)
        if axis == "y":
            positions = tuple((lateral, float(m)) for m in marks)
        elif axis == "x":
            positions = tuple((float(m), lateral) for m in marks)
        else:
            raise ConfigurationError(f"axis must be 'x' or 'y', got '{axis}'")
        return cls(positions=positions, **kwargs)


@dataclass
class RunResult:
    """Everything one simulated execution produced."""

    grid: DoseGrid
    sensor_positions: tuple[tuple[float, float], ...]
    sensor_doses: np.ndarray  # J/m^2 per sensor
    sensor_traces: list[np.ndarray]  # per sensor: (k, 2) array of (t_s, W/m^2)
    telemetry: np.ndarray  # (k, 4) array of (t_s, x_m, y_m, speed_m_s)
    elapsed: float


def _kernel_flat(mask: KernelMask):
    """Nonzero kernel elements as flat (x_offset, y_offset, value) arrays."""
    n, e, d = mask.n, mask.element_size, mask.exposed_diameter
    offsets = (np.arange(n) + 0.5) * e - d / 2.0
    oy, ox = np.meshgrid(offsets, offsets, indexing="ij")
    vals = mask.values.ravel()
    keep = vals > 0
    return ox.ravel()[keep], oy.ravel()[keep], vals[keep]


def _grid_ratio(mask: KernelMask, grid: DoseGrid) -> int:
    ratio = mask.element_size / grid.resolution
    m = round(ratio)
    if m < 1 or abs(ratio - m) > 1e-9:
        raise ConfigurationError(
            f"grid resolution {grid.resolution} must divide the kernel element "
            f"size {mask.element_size} by an integer factor"
        )
    return m


def _deposit(grid, ox, oy, vals, bx, by, weight, ratio) -> None:
    """Add vals * weight into the grid cells nearest each kernel element."""
    half = ratio * grid.resolution / 2.0
    base_col = np.round((bx + ox - half - grid.origin[0]) / grid.resolution).astype(int)
    base_row = np.round((by + oy - half - grid.origin[1]) / grid.resolution).astype(int)
    h, w = grid.cells.shape
    for dr in range(ratio):
        for dc in range(ratio):
            rows = base_row + dr
            cols = base_col + dc
            ok = (rows >= 0) & (rows < h) & (cols >= 0) & (cols < w)
            np.add.at(grid.cells, (rows[ok], cols[ok]), vals[ok] * weight)


def _polyline_lengths(waypoints) -> tuple[np.ndarray, np.ndarray]:
    pts = np.asarray(waypoints, dtype=float)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    return pts, seg


def accumulate_static(plan: CoveragePlan, mask: KernelMask, grid: DoseGrid) -> DoseGrid:
    """Idealized constant-velocity spanning of the kernel along the plan path.

    Steps sit at whole element_size increments of arc length; each deposits
    element_size / commanded_velocity seconds of exposure. Deposits falling
    outside the grid are dropped.
    """
    ratio = _grid_ratio(mask, grid)
    out = grid.copy()
    pts, seg_lengths = _polyline_lengths(plan.waypoints)
    total = float(seg_lengths.sum())
    if total == 0.0 or len(pts) < 2:
        return out

    e = mask.element_size
    steps = np.arange(0.0, total + e / 2.0, e)
    steps = steps[steps <= total + 1e-12]
    cum = np.concatenate([[0.0], np.cumsum(seg_lengths)])
    ox, oy, vals = _kernel_flat(mask)
    exposure = e / plan.commanded_velocity
    for s in steps:
        i = int(np.searchsorted(cum, s, side="right") - 1)
        i = min(i, len(seg_lengths) - 1)
        frac = 0.0 if seg_lengths[i] == 0 else (s - cum[i]) / seg_lengths[i]
        bx, by = pts[i] + frac * (pts[i + 1] - pts[i])
        _deposit(out, ox, oy, vals, bx, by, exposure, ratio)
    return out


def _segment_schedule(length: float, v: float, motion: MotionProfile):
    """Phase times for one segment: (t_accel, t_cruise, v_peak, duration)."""
    if motion.kind == "constant":
        return 0.0, length / v, v, length / v
    a = motion.accel
    d_accel = v * v / (2.0 * a)
    if 2.0 * d_accel <= length:
        t_accel = v / a
        t_cruise = (length - 2.0 * d_accel) / v
        return t_accel, t_cruise, v, 2.0 * t_accel + t_cruise
    v_peak = math.sqrt(a * length)
    t_accel = v_peak / a
    return t_accel, 0.0, v_peak, 2.0 * t_accel


def _segment_state(t, t_accel, t_cruise, v_peak, duration, accel, kind):
    """(distance along segment, speed) at segment-local time t."""
    if kind == "constant":
        return v_peak * t, v_peak
    if t < t_accel:
        return 0.5 * accel * t * t, accel * t
    d_accel = 0.5 * accel * t_accel * t_accel
    if t < t_accel + t_cruise:
        return d_accel + v_peak * (t - t_accel), v_peak
    td = t - t_accel - t_cruise
    td = min(td, t_accel)
    return (
        d_accel + v_peak * t_cruise + v_peak * td - 0.5 * accel * td * td,
        max(v_peak - accel * td, 0.0),
    )


def simulate_execution(
    plan: CoveragePlan,
    mask: KernelMask,
    motion: MotionProfile,
    lamp: LampDecayModel,
    sensors: VirtualSensorArray,
    grid: DoseGrid,
    dt: float = 0.001,
    source: IrradianceProfile | None = None,
    progress_cb=None,
    progress_interval: float = 0.5,
) -> RunResult:
    """Time-stepped execution of the plan with per-segment speed profiles.

    Each dt interval deposits irradiance * lamp_scale * dt at the midpoint
    beam position. Sensors sample the continuous radial field of `source`
    (falling back to nearest kernel element when no source profile is
    given); traces and telemetry are recorded at the sensor sample rate.
    progress_cb(t, (x, y), speed, grid) fires every progress_interval of
    simulated time.
    """
    if dt <= 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    v = motion.commanded_velocity or plan.commanded_velocity
    if v * dt > mask.element_size + 1e-12:
        raise ConfigurationError(
            f"time step too coarse: {v} m/s * {dt} s exceeds one element "
            f"({mask.element_size} m); the beam would skip cells"
        )
    ratio = _grid_ratio(mask, grid)
    out = grid.copy()
    pts, seg_lengths = _polyline_lengths(plan.waypoints)
    ox, oy, vals = _kernel_flat(mask)

    sensor_xy = np.asarray(sensors.positions, dtype=float)
    rng = np.random.default_rng(sensors.seed)

    def read_sensors(bx: float, by: float, scale: float) -> np.ndarray:
        if source is not None:
            dists = np.hypot(sensor_xy[:, 0] - bx, sensor_xy[:, 1] - by)
            irr = np.asarray(eval_profile(source, dists), dtype=float) * scale
        else:
            # No radial field available: sample the kernel element the
            # sensor currently sits under.
            e = mask.element_size
            ci = np.floor((sensor_xy[:, 0] - bx) / e + mask.n / 2.0).astype(int)
            ri = np.floor((sensor_xy[:, 1] - by) / e + mask.n / 2.0).astype(int)
            valid = (ci >= 0) & (ci < mask.n) & (ri >= 0) & (ri < mask.n)
            irr = np.zeros(len(sensor_xy))
            irr[valid] = mask.values[ri[valid], ci[valid]] * scale
        if sensors.noise_enabled:
            irr = irr + rng.uniform(-sensors.noise_tolerance, sensors.noise_tolerance, irr.shape)
        return np.clip(irr, 0.0, sensors.saturation)

    traces: list[list[tuple[float, float]]] = [[] for _ in sensors.positions]
    telemetry: list[tuple[float, float, float, float]] = []
    sample_period = 1.0 / sensors.sample_rate
    next_sample = 0.0
    last_sample_t = -math.inf
    next_progress = progress_interval

    t_global = 0.0
    for i, length in enumerate(seg_lengths):
        if length == 0.0:
            continue
        t_accel, t_cruise, v_peak, duration = _segment_schedule(length, v, motion)
        direction = (pts[i + 1] - pts[i]) / length
        t_local = 0.0
        while t_local < duration - 1e-12:
            step = min(dt, duration - t_local)
            t_mid = t_local + step / 2.0
            dist, speed = _segment_state(
                t_mid, t_accel, t_cruise, v_peak, duration, motion.accel, motion.kind
            )
            bx, by = pts[i] + min(dist, length) * direction
            scale = lamp_scale(lamp, t_global + t_mid)
            _deposit(out, ox, oy, vals, bx, by, scale * step, ratio)

            t_abs = t_global + t_mid
            if t_abs >= next_sample:
                readings = read_sensors(bx, by, scale)
                for s, r in zip(traces, readings):
                    s.append((t_abs, float(r)))
                telemetry.append((t_abs, float(bx), float(by), float(speed)))
                last_sample_t = t_abs
                # Anchor the cadence to the actual sample time so intervals
                # never drop below the sample period despite dt jitter.
                next_sample = t_abs + sample_period
            if progress_cb is not None and t_abs >= next_progress:
                progress_cb(t_abs, (float(bx), float(by)), float(speed), out)
                next_progress += progress_interval
            t_local += step
        t_global += duration

    # Final sample at the resting end point; replaces the previous sample
    # when it would land mid-period so the series stays at <= sample_rate.
    if len(pts) >= 2 and seg_lengths.sum() > 0:
        bx, by = pts[-1]
        scale = lamp_scale(lamp, t_global)
        readings = read_sensors(float(bx), float(by), scale)
        replace = telemetry and t_global - last_sample_t < sample_period - 1e-9
        for s, r in zip(traces, readings):
            if replace:
                s[-1] = (t_global, float(r))
            else:
                s.append((t_global, float(r)))
        final = (t_global, float(bx), float(by), 0.0)
        if replace:
            telemetry[-1] = final
        else:
            telemetry.append(final)
        if progress_cb is not None:
            progress_cb(t_global, (float(bx), float(by)), 0.0, out)

    trace_arrays = [np.asarray(t, dtype=float).reshape(-1, 2) for t in traces]
    doses = np.array(
        [np.trapezoid(tr[:, 1], tr[:, 0]) if len(tr) > 1 else 0.0 for tr in trace_arrays]
    )
    return RunResult(
        grid=out,
        sensor_positions=sensors.positions,
        sensor_doses=doses,
        sensor_traces=trace_arrays,
        telemetry=np.asarray(telemetry, dtype=float).reshape(-1, 4),
        elapsed=t_global,
    )


def coverage_report(grid: DoseGrid, d_req: float) -> dict:
    """Region coverage summary against the required dose."""
    if d_req <= 0:
        raise DomainError(f"required dose must be positive, got {d_req}")
    mask = grid.region_mask
    if not mask.any():
        raise ConfigurationError("grid has an empty disinfection region")
    doses = grid.cells[mask]
    xs, ys = grid.cell_centers()
    failing = doses < d_req
    fx = xs[mask][failing]
    fy = ys[mask][failing]
    return {
        "fraction_covered": float(np.count_nonzero(doses >= d_req) / doses.size),
        "min_dose_J_m2": float(doses.min()),
        "max_dose_J_m2": float(doses.max()),
        "mean_dose_J_m2": float(doses.mean()),
        "d_req_J_m2": float(d_req),
        "region_cells": int(doses.size),
        "failing_cells": [[float(x), float(y)] for x, y in zip(fx, fy)],
    }


def heatmap_export(grid: DoseGrid, d_req: float) -> dict:
    """Row-major dose map plus per-cell opacity normalized against d_req."""
    dose = grid.cells.ravel()
    if d_req > 0:
        normalized = np.minimum(dose / d_req, 1.0)
    else:
        normalized = np.zeros_like(dose)
    return {
        "width": grid.width,
        "height": grid.height,
        "resolution_m": grid.resolution,
        "origin_m": [grid.origin[0], grid.origin[1]],
        "d_req_J_m2": float(d_req),
        "dose": [float(x) for x in dose],
        "normalized": [float(x) for x in normalized],
    }


def sensor_csv_export(result: RunResult) -> str:
    """Per-sensor dose table: id, position, accumulated dose."""
    lines = ["id,x_m,y_m,dose_J_m2"]
    for i, ((x, y), d) in enumerate(zip(result.sensor_positions, result.sensor_doses)):
        lines.append(f"S{i},{x:.6g},{y:.6g},{d:.9g}")
    return "\n".join(lines) + "\n"


def trace_csv_export(result: RunResult) -> str:
    """Companion time series: one row per sensor sample."""
    lines = ["sensor_id,t_s,irradiance_W_m2"]
    for i, trace in enumerate(result.sensor_traces):
        for t, irr in trace:
            lines.append(f"S{i},{t:.6g},{irr:.9g}")
    return "\n".join(lines) + "\n"


def telemetry_jsonl_export(result: RunResult) -> str:
    """Beam telemetry as JSON lines (already decimated to the sample rate)."""
    lines = [
        json.dumps({"t_s": t, "x_m": x, "y_m": y, "speed_m_s": s})
        for t, x, y, s in result.telemetry
    ]
    return "\n".join(lines) + ("\n" if lines else "")
