"""Batch entry point: fit profiles, plan sweeps, simulate, report, serve.

Exit codes: 0 success, 2 usage error, 3 data error, 4 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import workflows
from .errors import ConfigurationError, DomainError, FitError, PlanningError
from .fixtures import reference_lamp_decay
from .planner import CoveragePlan
from .radiometry import (
    RATE_LEVELS,
    DisinfectionSpec,
    IrradianceProfile,
    LampDecayModel,
    fit_profile,
    fit_residuals,
    load_measurements_csv,
)
from .simulator import MotionProfile

USAGE_ERROR = 2
DATA_ERROR = 3
RUNTIME_ERROR = 4


class UsageError(Exception):
    pass


def _rate_fraction(rate_pct: float) -> float:
    fraction = rate_pct / 100.0
    for level in RATE_LEVELS:
        if abs(fraction - level) < 1e-9:
            return level
    levels = ", ".join(f"{r * 100:g}" for r in RATE_LEVELS)
    raise UsageError(f"--rate must be one of {levels} (percent), got {rate_pct:g}")


def cmd_fit(args) -> int:
    try:
        text = Path(args.measurements).read_text()
    except OSError as exc:
        print(f"error: cannot read {args.measurements}: {exc}", file=sys.stderr)
        return DATA_ERROR
    measurements = load_measurements_csv(text)
    profile = fit_profile(
        measurements,
        args.order,
        cutoff_radius=args.cutoff_m,
        calibration_height=args.height_m,
    )
    residuals = fit_residuals(profile, measurements)
    Path(args.output).write_text(profile.to_json() + "\n")
    peak = max(m.irradiance for m in measurements)
    worst = float(abs(residuals).max())
    print(
        f"fit order {args.order} over {len(measurements)} samples: "
        f"max residual {worst:.4g} W/m^2 ({100 * worst / peak:.3f}% of peak), "
        f"cutoff {profile.cutoff_radius:g} m -> {args.output}"
    )
    return 0


def cmd_plan(args) -> int:
    profile = IrradianceProfile.from_json(Path(args.profile).read_text())
    rate = _rate_fraction(args.rate)
    spec = DisinfectionSpec(k=args.k, rate=rate)
    region = workflows.rectangle_region(args.width, args.length)
    plan = workflows.make_plan(
        profile, region, spec, v_max=args.vmax, pass_spacing=args.spacing
    )
    Path(args.output).write_text(plan.to_json() + "\n")
    print(
        f"D_req={spec.required_dose:.2f} J/m^2 v={plan.commanded_velocity:.2f} m/s "
        f"(SF={plan.scale_factor:.4f}, {len(plan.waypoints) // 2} passes) -> {args.output}"
    )
    return 0


def cmd_simulate(args) -> int:
    plan = CoveragePlan.from_json(Path(args.plan).read_text())
    profile = IrradianceProfile.from_json(Path(args.profile).read_text())
    region = workflows.rectangle_region(args.width, args.length)
    grid = workflows.make_grid(
        region,
        surface_width=args.surface_width,
        surface_length=args.surface_length,
        resolution=args.resolution,
    )
    motion = MotionProfile(kind=args.motion, accel=args.accel)
    if args.lamp_table:
        lamp = LampDecayModel.from_dict(json.loads(Path(args.lamp_table).read_text()))
    elif args.lamp_decay:
        lamp = reference_lamp_decay()
    else:
        lamp = LampDecayModel()
    sensors = workflows.sensor_line_for_region(
        region, count=args.sensors, noise_enabled=args.noise, seed=args.seed
    )
    result, report = workflows.execute_run(
        plan, profile, grid, motion, lamp, sensors, dt=args.dt
    )
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for name, data in workflows.render_artifacts(result, report, plan.required_dose).items():
        (out / name).write_text(data)
    print(
        f"simulated {result.elapsed:.2f} s ({args.motion}): "
        f"covered {report['fraction_covered'] * 100:.1f}% of region, "
        f"dose [{report['min_dose_J_m2']:.2f}, {report['max_dose_J_m2']:.2f}] J/m^2 "
        f"vs required {plan.required_dose:.2f} -> {out}/"
    )
    return 0


def cmd_report(args) -> int:
    path = Path(args.run_dir) / "report.json"
    if not path.exists():
        print(f"error: no report at {path}", file=sys.stderr)
        return DATA_ERROR
    report = json.loads(path.read_text())
    verdict = "PASS" if report["fraction_covered"] >= 1.0 else "FAIL"
    print(
        f"{verdict}: {report['fraction_covered'] * 100:.1f}% of "
        f"{report['region_cells']} region cells at or above "
        f"{report['d_req_J_m2']:.2f} J/m^2"
    )
    print(
        f"dose min {report['min_dose_J_m2']:.2f} / mean {report['mean_dose_J_m2']:.2f} "
        f"/ max {report['max_dose_J_m2']:.2f} J/m^2"
    )
    for x, y in report["failing_cells"][:20]:
        print(f"  failing cell at ({x:.3f}, {y:.3f}) m")
    if len(report["failing_cells"]) > 20:
        print(f"  ... and {len(report['failing_cells']) - 20} more")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.data_dir)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except (OSError, SystemExit) as exc:
        print(f"error: cannot serve on {args.host}:{args.port}: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uvgi",
        description="Plan and simulate UV disinfection sweeps over planar surfaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit an irradiance profile from a measurement CSV")
    p.add_argument("measurements", help="CSV with header distance_cm,irradiance_mW_cm2")
    p.add_argument("-o", "--output", default="profile.json")
    p.add_argument("--order", type=int, default=15)
    p.add_argument("--cutoff-m", type=float, default=None,
                   help="override the cutoff radius (default: largest measured distance)")
    p.add_argument("--height-m", type=float, default=0.3,
                   help="source height the measurements were taken at")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("plan", help="plan a lawnmower sweep for a disinfection target")
    p.add_argument("profile", help="profile JSON from 'fit'")
    p.add_argument("-o", "--output", default="plan.json")
    p.add_argument("--k", type=float, required=True, help="UV rate constant, m^2/J")
    p.add_argument("--rate", type=float, required=True,
                   help="disinfection rate percent: 90, 99, 99.9, 99.99, 99.999")
    p.add_argument("--vmax", type=float, default=1.0)
    p.add_argument("--width", type=float, default=0.1, help="region width, m")
    p.add_argument("--length", type=float, default=1.0, help="region length, m")
    p.add_argument("--spacing", type=float, default=None,
                   help="pass spacing, m (default: half the exposed diameter)")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="execute a plan against a dose grid")
    p.add_argument("plan", help="plan JSON from 'plan'")
    p.add_argument("--profile", required=True, help="profile JSON the plan was built from")
    p.add_argument("-o", "--output", default="run", help="output directory")
    p.add_argument("--width", type=float, default=0.1, help="region width, m")
    p.add_argument("--length", type=float, default=1.0, help="region length, m")
    p.add_argument("--surface-width", type=float, default=None)
    p.add_argument("--surface-length", type=float, default=None)
    p.add_argument("--resolution", type=float, default=0.01)
    p.add_argument("--motion", choices=["constant", "trapezoidal"], default="trapezoidal")
    p.add_argument("--accel", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=0.001)
    p.add_argument("--sensors", type=int, default=15)
    p.add_argument("--noise", action="store_true", help="inject uniform sensor noise")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lamp-decay", action="store_true",
                   help="apply the reference output droop table")
    p.add_argument("--lamp-table", default=None,
                   help="JSON file with a custom decay table")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="print the coverage verdict for a run directory")
    p.add_argument("run_dir")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default=os.environ.get("UVGI_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int, default=int(os.environ.get("UVGI_PORT", "8000")))
    p.add_argument("--data-dir", default=os.environ.get("UVGI_DATA_DIR", "uvgi-data"))
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (DomainError, FitError, PlanningError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON: {exc}", file=sys.stderr)
        return DATA_ERROR
    except Exception as exc:  # noqa: BLE001 -- keep batch exits classified
        print(f"unexpected error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
