"""Shared plan/simulate/export flows used by both the CLI and the service.

Keeping this glue in one place guarantees the two entry points produce
identical artifacts for identical inputs.
"""

from __future__ import annotations

import json

from .planner import CoveragePlan, PlannerConfig, RegionSpec, plan_lawnmower
from .radiometry import (
    DisinfectionSpec,
    IrradianceProfile,
    KernelMask,
    LampDecayModel,
    build_kernel,
)
from .simulator import (
    DoseGrid,
    MotionProfile,
    RunResult,
    VirtualSensorArray,
    accumulate_static,
    coverage_report,
    heatmap_export,
    sensor_csv_export,
    simulate_execution,
    telemetry_jsonl_export,
    trace_csv_export,
)

DEFAULT_EXPOSED_DIAMETER = 0.16  # m; irradiance is negligible past 8 cm
DEFAULT_KERNEL_N = 16  # 0.01 m elements
DEFAULT_RESOLUTION = 0.01  # m per grid cell
DEFAULT_DT = 0.001  # s
DEFAULT_SENSOR_COUNT = 15


def rectangle_region(width_m: float, length_m: float) -> RegionSpec:
    """A flat axis-aligned rectangle region at z = 0, origin corner at (0, 0)."""
    return RegionSpec.from_vertices(
        [
            (0.0, 0.0, 0.0),
            (width_m, 0.0, 0.0),
            (width_m, length_m, 0.0),
            (0.0, length_m, 0.0),
        ]
    )


def make_kernel(
    profile: IrradianceProfile,
    exposed_diameter: float = DEFAULT_EXPOSED_DIAMETER,
    n: int = DEFAULT_KERNEL_N,
) -> KernelMask:
    return build_kernel(profile, exposed_diameter, n)


def make_plan(
    profile: IrradianceProfile,
    region: RegionSpec,
    spec: DisinfectionSpec,
    v_max: float = 1.0,
    pass_spacing: float | None = None,
    exposed_diameter: float = DEFAULT_EXPOSED_DIAMETER,
    kernel_n: int = DEFAULT_KERNEL_N,
) -> CoveragePlan:
    mask = make_kernel(profile, exposed_diameter, kernel_n)
    config = PlannerConfig(v_max=v_max, pass_spacing=pass_spacing)
    return plan_lawnmower(region, config, mask, spec)


def make_grid(
    region: RegionSpec,
    surface_width: float | None = None,
    surface_length: float | None = None,
    resolution: float = DEFAULT_RESOLUTION,
) -> DoseGrid:
    """Dose grid over the surface (defaults to the region bounding box)."""
    u_min, v_min, u_max, v_max = region.bounds
    width = surface_width if surface_width is not None else u_max - u_min
    length = surface_length if surface_length is not None else v_max - v_min
    grid = DoseGrid.for_surface(width, length, resolution, origin=(0.0, 0.0))
    grid.mark_region(region.polygon)
    return grid


def sensor_line_for_region(
    region: RegionSpec, count: int = DEFAULT_SENSOR_COUNT, **kwargs
) -> VirtualSensorArray:
    """Sensor bar spanning the region's long axis at mid-width."""
    u_min, v_min, u_max, v_max = region.bounds
    if region.long_axis() == "v":
        return VirtualSensorArray.line(
            count, length=v_max - v_min, lateral=(u_min + u_max) / 2.0,
            start=v_min, axis="y", **kwargs,
        )
    return VirtualSensorArray.line(
        count, length=u_max - u_min, lateral=(v_min + v_max) / 2.0,
        start=u_min, axis="x", **kwargs,
    )


def execute_run(
    plan: CoveragePlan,
    profile: IrradianceProfile,
    grid: DoseGrid,
    motion: MotionProfile,
    lamp: LampDecayModel,
    sensors: VirtualSensorArray,
    dt: float = DEFAULT_DT,
    exposed_diameter: float = DEFAULT_EXPOSED_DIAMETER,
    kernel_n: int = DEFAULT_KERNEL_N,
    progress_cb=None,
) -> tuple[RunResult, dict]:
    """Simulate one execution and produce its coverage report."""
    mask = make_kernel(profile, exposed_diameter, kernel_n)
    result = simulate_execution(
        plan, mask, motion, lamp, sensors, grid,
        dt=dt, source=profile, progress_cb=progress_cb,
    )
    report = coverage_report(result.grid, plan.required_dose)
    return result, report


def render_artifacts(result: RunResult, report: dict, d_req: float) -> dict[str, str]:
    """All run artifacts as name -> serialized document."""
    return {
        "heatmap.json": json.dumps(heatmap_export(result.grid, d_req), indent=2),
        "report.json": json.dumps(report, indent=2),
        "sensors.csv": sensor_csv_export(result),
        "traces.csv": trace_csv_export(result),
        "telemetry.jsonl": telemetry_jsonl_export(result),
    }


def static_model_check(plan: CoveragePlan, profile: IrradianceProfile, grid: DoseGrid,
                       exposed_diameter: float = DEFAULT_EXPOSED_DIAMETER,
                       kernel_n: int = DEFAULT_KERNEL_N) -> tuple[DoseGrid, dict]:
    """Idealized constant-velocity model of the plan (no dynamics, no decay)."""
    mask = make_kernel(profile, exposed_diameter, kernel_n)
    out = accumulate_static(plan, mask, grid)
    return out, coverage_report(out, plan.required_dose)
