
import numpy as np
import pytest

from uvgi import workflows
from uvgi.errors import ConfigurationError
from uvgi.planner import CoveragePlan, RegionSpec
from uvgi.radiometry import (
    DisinfectionSpec,
    IrradianceMeasurement,
    LampDecayModel,
    build_kernel,
    fit_profile,
)
from uvgi.simulator import (
    DoseGrid,
    MotionProfile,
    VirtualSensorArray,
    accumulate_static,
    coverage_report,
    heatmap_export,
    sensor_csv_export,
    simulate_execution,
    telemetry_jsonl_export,
    trace_csv_export,
)

EBOLA_K = 0.0867


def uniform_profile(value=100.0, cutoff=1.0):
    ms = [IrradianceMeasurement(d, value) for d in (0.0, 0.5, 1.0)]
    return fit_profile(ms, 0, cutoff_radius=cutoff)


def single_pass_plan(velocity=1.0, lateral=0.08, lo0=-0.08, lo1=1.08, d_req=16.0):
    """One pass along the y axis at the given lateral x position."""
    return CoveragePlan(
        waypoints=((lateral, lo0), (lateral, lo1)),
        commanded_velocity=velocity,
        pass_spacing=0.08,
        scale_factor=1.0,
        d_min_at_vmax=16.0,
        required_dose=d_req,
    )


def brute_force_accumulate(plan, mask, grid):
    """Plain triple-loop rendition of the spanning contract."""
    out = grid.copy()
    pts = [np.asarray(p, dtype=float) for p in plan.waypoints]
    seg_lengths = [float(np.linalg.norm(b - a)) for a, b in zip(pts, pts[1:])]
    total = sum(seg_lengths)
    if total == 0.0:
        return out
    e = mask.element_size
    exposure = e / plan.commanded_velocity
    n_steps = int(total / e + 1e-12)
    positions = []
    for k in range(n_steps + 1):
        s = k * e
        if s > total + 1e-12:
            break
        acc = 0.0
        for seg_index, seg_len in enumerate(seg_lengths):
            if s <= acc + seg_len or seg_index == len(seg_lengths) - 1:
                frac = 0.0 if seg_len == 0 else (s - acc) / seg_len
                frac = min(frac, 1.0)
                positions.append(pts[seg_index] + frac * (pts[seg_index + 1] - pts[seg_index]))
                break
            acc += seg_len
    half = grid.resolution / 2.0
    for bx, by in positions:
        for i in range(mask.n):
            for j in range(mask.n):
                value = mask.values[i][j]
                if value <= 0.0:
                    continue
                px = bx + (j + 0.5) * e - mask.exposed_diameter / 2.0
                py = by + (i + 0.5) * e - mask.exposed_diameter / 2.0
                col = round((px - half - grid.origin[0]) / grid.resolution)
                row = round((py - half - grid.origin[1]) / grid.resolution)
                if 0 <= row < out.height and 0 <= col < out.width:
                    out.cells[row][col] += value * exposure
    return out


class TestAccumulateStatic:
    def test_matches_brute_force_oracle_on_small_grid(self, reference_profile):
        # 20 x 20 grid with a 3-pass plan over a 0.2 m square region.
        region = RegionSpec.from_vertices(
            [(0, 0, 0), (0.2, 0, 0), (0.2, 0.2, 0), (0, 0.2, 0)]
        )
        spec = DisinfectionSpec(k=EBOLA_K, rate=0.90)
        plan = workflows.make_plan(reference_profile, region, spec)
        mask = workflows.make_kernel(reference_profile)
        grid = workflows.make_grid(region)
        assert grid.cells.shape == (20, 20)
        fast = accumulate_static(plan, mask, grid)
        slow = brute_force_accumulate(plan, mask, grid)
        assert np.allclose(fast.cells, slow.cells, rtol=0.0, atol=1e-9)

    def test_uniform_kernel_centerline_dose(self):
        mask = build_kernel(uniform_profile(100.0), 0.16, 16)
        grid = DoseGrid.for_surface(0.1, 1.0, 0.01)
        out = accumulate_static(single_pass_plan(velocity=1.0, lateral=0.08), mask, grid)
        # Interior cells along the pass line integrate the full kernel row.
        column = out.cells[:, 7]  # x = 0.075, adjacent to the pass at x = 0.08
        interior = column[10:90]
        assert np.allclose(interior, 16.0, rtol=1e-9)

    def test_zero_length_path_leaves_grid_unchanged(self, reference_kernel):
        grid = DoseGrid.for_surface(0.1, 1.0, 0.01)
        grid.cells[:] = 1.5
        plan = CoveragePlan(
            waypoints=((0.05, 0.5), (0.05, 0.5)),
            commanded_velocity=0.5,
            pass_spacing=0.08,
            scale_factor=1.0,
            d_min_at_vmax=16.0,
            required_dose=16.0,
        )
        out = accumulate_static(plan, reference_kernel, grid)
        assert np.array_equal(out.cells, grid.cells)

    def test_halving_velocity_doubles_dose(self, d90_plan, reference_kernel, standard_grid):
        full = accumulate_static(d90_plan, reference_kernel, standard_grid)
        slow_plan = CoveragePlan(
            waypoints=d90_plan.waypoints,
            commanded_velocity=d90_plan.commanded_velocity / 2.0,
            pass_spacing=d90_plan.pass_spacing,
            scale_factor=d90_plan.scale_factor,
            d_min_at_vmax=d90_plan.d_min_at_vmax,
            required_dose=d90_plan.required_dose,
        )
        half_speed = accumulate_static(slow_plan, reference_kernel, standard_grid)
        assert np.allclose(half_speed.cells, 2.0 * full.cells, rtol=1e-12, atol=1e-12)

    def test_d90_band_over_standard_region(self, d90_plan, reference_kernel, standard_grid, d90_spec):
        out = accumulate_static(d90_plan, reference_kernel, standard_grid)
        report = coverage_report(out, d90_spec.required_dose)
        assert report["fraction_covered"] == 1.0
        assert report["min_dose_J_m2"] >= d90_spec.required_dose
        assert report["max_dose_J_m2"] <= 1.15 * d90_spec.required_dose
        # Every region cell shows fully opaque in the heatmap.
        doc = heatmap_export(out, d90_spec.required_dose)
        normalized = np.array(doc["normalized"]).reshape(out.cells.shape)
        assert (normalized[out.region_mask] == 1.0).all()

    def test_energy_consistency(self, reference_profile):
        # Inflated grid so the whole beam stays on it: total deposited energy
        # equals beam surface power times exposure time.
        mask = workflows.make_kernel(reference_profile)
        grid = DoseGrid.for_surface(0.6, 1.8, 0.01, origin=(-0.25, -0.4))
        plan = single_pass_plan(velocity=0.5, lateral=0.05, lo0=0.0, lo1=1.0)
        out = accumulate_static(plan, mask, grid)
        total_energy = out.cells.sum() * grid.resolution**2
        beam_power = mask.values.sum() * mask.element_size**2
        n_steps = int(round(1.0 / mask.element_size)) + 1
        exposure_time = n_steps * mask.element_size / plan.commanded_velocity
        assert total_energy == pytest.approx(beam_power * exposure_time, rel=0.02)

    def test_finer_grid_integer_ratio(self, d90_plan, reference_profile, standard_region, d90_spec):
        mask = workflows.make_kernel(reference_profile)
        coarse = workflows.make_grid(standard_region, resolution=0.01)
        fine = workflows.make_grid(standard_region, resolution=0.005)
        out_c = accumulate_static(d90_plan, mask, coarse)
        out_f = accumulate_static(d90_plan, mask, fine)
        rep_c = coverage_report(out_c, d90_spec.required_dose)
        rep_f = coverage_report(out_f, d90_spec.required_dose)
        assert rep_f["min_dose_J_m2"] == pytest.approx(rep_c["min_dose_J_m2"], rel=1e-6)
        assert rep_f["max_dose_J_m2"] == pytest.approx(rep_c["max_dose_J_m2"], rel=1e-6)

    def test_mismatched_resolution_rejected(self, d90_plan, reference_kernel):
        grid = DoseGrid.for_surface(0.1, 1.0, 0.003)
        with pytest.raises(ConfigurationError):
            accumulate_static(d90_plan, reference_kernel, grid)


class TestSimulateExecution:
    def test_constant_motion_matches_static(
        self, d90_plan, reference_profile, reference_kernel, standard_grid
    ):
        static = accumulate_static(d90_plan, reference_kernel, standard_grid)
        result = simulate_execution(
            d90_plan,
            reference_kernel,
            MotionProfile(kind="constant"),
            LampDecayModel(),
            VirtualSensorArray.line(),
            standard_grid,
            dt=0.001,
            source=reference_profile,
        )
        sel = static.cells > 0.5
        rel = np.abs(result.grid.cells[sel] - static.cells[sel]) / static.cells[sel]
        assert rel.max() < 0.02

    def test_trapezoidal_end_saturation(
        self, d90_plan, reference_profile, reference_kernel, standard_grid, d90_spec
    ):
        result = simulate_execution(
            d90_plan,
            reference_kernel,
            MotionProfile(kind="trapezoidal", accel=1.0),
            LampDecayModel(),
            VirtualSensorArray.line(),
            standard_grid,
            dt=0.001,
            source=reference_profile,
        )
        doses = result.sensor_doses
        for end in (doses[0], doses[14]):
            for middle in doses[6:9]:
                assert end > middle
        assert (doses >= d90_spec.required_dose).all()

    def test_trapezoidal_vs_constant_cruise_and_endpoints(
        self, d90_plan, reference_profile, reference_kernel, standard_grid
    ):
        constant = simulate_execution(
            d90_plan, reference_kernel, MotionProfile(kind="constant"),
            LampDecayModel(), VirtualSensorArray.line(), standard_grid,
            dt=0.001, source=reference_profile,
        )
        trapezoid = simulate_execution(
            d90_plan, reference_kernel, MotionProfile(kind="trapezoidal", accel=1.0),
            LampDecayModel(), VirtualSensorArray.line(), standard_grid,
            dt=0.001, source=reference_profile,
        )
        # Rows near the pass ends saturate; cruise rows stay within 2%.
        end_rows = np.concatenate([trapezoid.grid.cells[:3], trapezoid.grid.cells[-3:]])
        end_rows_const = np.concatenate([constant.grid.cells[:3], constant.grid.cells[-3:]])
        assert (end_rows >= end_rows_const * (1.0 - 1e-9)).all()
        cruise = slice(40, 60)
        c = constant.grid.cells[cruise]
        t = trapezoid.grid.cells[cruise]
        sel = c > 0.5
        assert (np.abs(t[sel] - c[sel]) / c[sel]).max() < 0.02

    def test_sensor_trace_integral_matches_dose(
        self, d90_plan, reference_profile, reference_kernel, standard_grid
    ):
        result = simulate_execution(
            d90_plan, reference_kernel, MotionProfile(kind="trapezoidal"),
            LampDecayModel(), VirtualSensorArray.line(), standard_grid,
            dt=0.001, source=reference_profile,
        )
        for trace, dose in zip(result.sensor_traces, result.sensor_doses):
            integral = np.trapezoid(trace[:, 1], trace[:, 0])
            assert integral == pytest.approx(dose, rel=5e-3, abs=1e-9)

    def test_lamp_decay_never_increases_dose(
        self, d90_plan, reference_profile, reference_kernel, standard_grid
    ):
        sensors = VirtualSensorArray.line()
        baseline = simulate_execution(
            d90_plan, reference_kernel, MotionProfile(kind="constant"),
            LampDecayModel(), sensors, standard_grid, dt=0.001, source=reference_profile,
        )
        decayed = simulate_execution(
            d90_plan, reference_kernel, MotionProfile(kind="constant"),
            LampDecayModel(table=((0.0, 1.0), (600.0, 0.9))), sensors,
            standard_grid, dt=0.001, source=reference_profile,
        )
        assert (decayed.grid.cells <= baseline.grid.cells + 1e-9).all()
        assert (decayed.sensor_doses <= baseline.sensor_doses + 1e-9).all()

    def test_progress_snapshots_are_monotone(
        self, d90_plan, reference_profile, reference_kernel, standard_grid
    ):
        snapshots = []
        simulate_execution(
            d90_plan, reference_kernel, MotionProfile(kind="trapezoidal"),
            LampDecayModel(), VirtualSensorArray.line(), standard_grid,
            dt=0.001, source=reference_profile,
            progress_cb=lambda t, beam, speed, grid: snapshots.append(grid.cells.copy()),
        )
        assert len(snapshots) >= 2
        for earlier, later in zip(snapshots, snapshots[1:]):
            assert (later >= earlier - 1e-12).all()

    def test_mid_sensor_window_and_speed(
        self, d90_plan, reference_profile, reference_kernel, standard_grid
    ):
        result = simulate_execution(
            d90_plan, reference_kernel, MotionProfile(kind="trapezoidal", accel=1.0),
            LampDecayModel(), VirtualSensorArray.line(), standard_grid,
            dt=0.001, source=reference_profile,
        )
        trace = result.sensor_traces[7]
        nonzero = trace[trace[:, 1] > 0.0]
        # The sweep passes the sensor twice; examine the first pass window.
        gaps = np.where(np.diff(nonzero[:, 0]) > 0.5)[0]
        first = nonzero[: gaps[0] + 1] if len(gaps) else nonzero
        t0, t1 = first[0, 0], first[-1, 0]
        tel = result.telemetry
        y0 = np.interp(t0, tel[:, 0], tel[:, 2])
        y1 = np.interp(t1, tel[:, 0], tel[:, 2])
        travel = abs(y1 - y0)
        assert 0.2 <= travel <= 0.4  # twice the ~0.15 m sensing span
        avg_speed = travel / (t1 - t0)
        assert avg_speed <= d90_plan.commanded_velocity * (1.0 + 1e-9)

    def test_dt_skip_guard(self, d90_plan, reference_profile, reference_kernel, standard_grid):
        with pytest.raises(ConfigurationError):
            simulate_execution(
                d90_plan, reference_kernel, MotionProfile(kind="constant"),
                LampDecayModel(), VirtualSensorArray.line(), standard_grid,
                dt=1.0, source=reference_profile,
            )

    def test_noise_is_deterministic_and_clamped(
        self, d90_plan, reference_profile, reference_kernel, standard_grid
    ):
        def run(seed):
            return simulate_execution(
                d90_plan, reference_kernel, MotionProfile(kind="constant"),
                LampDecayModel(),
                VirtualSensorArray.line(noise_enabled=True, seed=seed),
                standard_grid, dt=0.001, source=reference_profile,
            )

        a, b = run(42), run(42)
        for ta, tb in zip(a.sensor_traces, b.sensor_traces):
            assert np.array_equal(ta, tb)
        for trace in a.sensor_traces:
            assert (trace[:, 1] >= 0.0).all()
            assert (trace[:, 1] <= 400.0).all()


class TestCoverageReport:
    def test_uniform_exact_dose(self, standard_grid):
        standard_grid.cells[:] = 26.56
        report = coverage_report(standard_grid, 26.56)
        assert report["fraction_covered"] == 1.0
        assert report["min_dose_J_m2"] == report["max_dose_J_m2"] == 26.56
        assert report["failing_cells"] == []

    def test_half_zero(self, standard_grid):
        standard_grid.cells[:50] = 10.0
        standard_grid.cells[50:] = 0.0
        report = coverage_report(standard_grid, 10.0)
        assert report["fraction_covered"] == pytest.approx(0.5)
        assert len(report["failing_cells"]) == 500

    def test_empty_region_rejected(self):
        grid = DoseGrid.for_surface(0.1, 0.1, 0.01)
        with pytest.raises(ConfigurationError):
            coverage_report(grid, 1.0)


class TestExports:
    def test_heatmap_zero_and_saturated(self, standard_grid):
        doc = heatmap_export(standard_grid, 10.0)
        assert doc["width"] == 10 and doc["height"] == 100
        assert set(doc["normalized"]) == {0.0}
        standard_grid.cells[:] = 20.0
        doc = heatmap_export(standard_grid, 10.0)
        assert set(doc["normalized"]) == {1.0}
        assert doc["dose"][0] == 20.0

    def test_sensor_csv_row_per_sensor(
        self, d90_plan, reference_profile, reference_kernel, standard_grid
    ):
        result = simulate_execution(
            d90_plan, reference_kernel, MotionProfile(kind="constant"),
            LampDecayModel(), VirtualSensorArray.line(), standard_grid,
            dt=0.001, source=reference_profile,
        )
        csv = sensor_csv_export(result)
        lines = csv.strip().splitlines()
        assert lines[0] == "id,x_m,y_m,dose_J_m2"
        assert len(lines) == 16
        traces = trace_csv_export(result)
        assert traces.splitlines()[0] == "sensor_id,t_s,irradiance_W_m2"

    def test_zero_duration_run_has_zero_doses(self, reference_profile, reference_kernel):
        grid = DoseGrid.for_surface(0.1, 1.0, 0.01)
        plan = CoveragePlan(
            waypoints=((0.05, 0.5), (0.05, 0.5)),
            commanded_velocity=0.5,
            pass_spacing=0.08,
            scale_factor=1.0,
            d_min_at_vmax=16.0,
            required_dose=16.0,
        )
        result = simulate_execution(
            plan, reference_kernel, MotionProfile(kind="constant"),
            LampDecayModel(), VirtualSensorArray.line(), grid,
            dt=0.001, source=reference_profile,
        )
        assert (result.sensor_doses == 0.0).all()
        assert result.elapsed == 0.0
        csv = sensor_csv_export(result)
        assert len(csv.strip().splitlines()) == 16

    def test_telemetry_jsonl(self, d90_plan, reference_profile, reference_kernel, standard_grid):
        import json

        result = simulate_execution(
            d90_plan, reference_kernel, MotionProfile(kind="constant"),
            LampDecayModel(), VirtualSensorArray.line(), standard_grid,
            dt=0.001, source=reference_profile,
        )
        lines = telemetry_jsonl_export(result).strip().splitlines()
        first = json.loads(lines[0])
        assert set(first) == {"t_s", "x_m", "y_m", "speed_m_s"}
        # Decimated to the sensor sample rate (100 Hz).
        times = [json.loads(line)["t_s"] for line in lines]
        assert min(np.diff(times)) >= 1.0 / 100.0 - 1e-9
