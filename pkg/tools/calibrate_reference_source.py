"""Regenerate the reference UV source fixture (src/uvgi/fixtures.py data).

The fixture is a synthetic flashlight measurement set engineered so that:

  * a 15th-order fit reproduces the samples to well under 1% of peak,
  * the 16x16 kernel's center-row dose at 1 m/s lands on the calibration
    target (15.14 J/m^2), which pins the planned sweep velocities,
  * a two-pass sweep (spacing 0.08 m) over the standard 0.1 m x 1 m region
    puts every grid cell in a tight band just above the required dose,
  * irradiance stays faintly positive out to ~0.15 m so a mid-array sensor
    sees the beam over roughly 0.3 m of travel.

Construction: start from a physically-shaped initial guess (an Abel
inversion of a plateau-with-rolloff lateral dose target, plus a wide faint
tail and the LED-ring bump at 2.5 cm), then exploit that fitting,
evaluation, and row sums are all linear in the sample values: probe the
sample-to-targets linear map and solve a small constrained least-squares
problem that pins the dose calibration and the coverage band while staying
close to the initial shape.

Run from the repo root:  python3 tools/calibrate_reference_source.py
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
from scipy import optimize

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from uvgi import radiometry  # noqa: E402

TARGET_CENTER_ROW_DOSE = 15.14  # J/m^2 at 1 m/s, the velocity calibration anchor
SAMPLE_DISTANCES_CM = np.arange(0, 17)  # 17 samples, 1 cm apart
FIT_ORDER = 15
EXPOSED_DIAMETER = 0.16
KERNEL_N = 16
ELEMENT = EXPOSED_DIAMETER / KERNEL_N

# Coverage-band design targets for the standard two-pass sweep: every cell
# between +0.8% and +9% over the required dose (the contract is [0%, +15%]).
BAND_LO = 1.008
BAND_HI = 1.120

# Roll-off window of the lateral row-sum target (m).
ROLL_START = 0.015
ROLL_END = 0.068
# Wide faint tail: fraction of the Abel component's peak, and 1/e radius (m).
TAIL_FRACTION = 0.045
TAIL_RADIUS = 0.060
# LED-ring bump at 2.5 cm: relative height and width (m).
BUMP_FRACTION = 0.06
BUMP_CENTER = 0.025
BUMP_WIDTH = 0.012

# Lateral offsets seen by region cell rows: the planner places the two
# passes at y = 0.02 / 0.08 (edge-reach rule), cells sit at y = 0.005,
# 0.015, ..., 0.095 (symmetric, five distinct pairs, all within the
# kernel's 0.075 m outermost row).
CELL_OFFSET_PAIRS = [
    (0.015, 0.075),
    (0.005, 0.065),
    (0.005, 0.055),
    (0.015, 0.045),
    (0.025, 0.035),
]


def rolloff_density(delta: np.ndarray) -> np.ndarray:
    """-dR/dy: a C1 compact bump on [ROLL_START, ROLL_END], unnormalized."""
    inside = (delta > ROLL_START) & (delta < ROLL_END)
    out = np.zeros_like(delta)
    d = delta[inside]
    out[inside] = ((d - ROLL_START) * (ROLL_END - d)) ** 2
    return out


def abel_inverted_component(r: np.ndarray) -> np.ndarray:
    """Radial profile whose line integrals reproduce the roll-off target."""
    # I(r) = (1/pi) * integral_r^inf g(d) / sqrt(d^2 - r^2) dd with g = -R'.
    # Substituting d = r*cosh(u) removes the endpoint singularity; for r = 0
    # integrate g(d)/d directly (g vanishes near 0 so this is finite).
    values = np.zeros_like(r)
    u = np.linspace(0.0, 12.0, 4001)
    for i, ri in enumerate(r):
        if ri == 0.0:
            d = np.linspace(ROLL_START, ROLL_END, 2001)
            values[i] = np.trapezoid(rolloff_density(d) / d, d) / np.pi
        elif ri < ROLL_END:
            d = ri * np.cosh(u)
            values[i] = np.trapezoid(rolloff_density(d), u) / np.pi
    return values


def initial_shape(r: np.ndarray) -> np.ndarray:
    base = abel_inverted_component(r)
    peak = base[0]
    tail = TAIL_FRACTION * peak * np.exp(-((r / TAIL_RADIUS) ** 2))
    bump = BUMP_FRACTION * peak * np.exp(-(((r - BUMP_CENTER) / BUMP_WIDTH) ** 2))
    return base + tail + bump


def fit_samples(samples_w_m2: np.ndarray) -> radiometry.IrradianceProfile:
    measurements = [
        radiometry.IrradianceMeasurement(d_cm * 0.01, v)
        for d_cm, v in zip(SAMPLE_DISTANCES_CM, samples_w_m2)
    ]
    return radiometry.fit_profile(measurements, FIT_ORDER)


def linear_targets(samples_w_m2: np.ndarray, positivity_r: np.ndarray) -> np.ndarray:
    """All design quantities for one sample vector (each linear in samples).

    Layout: [d_min, row_sum at the 6 distinct cell offsets, profile values
    at the positivity probe radii].
    """
    profile = fit_samples(samples_w_m2)
    # Raw polynomial values (no clamping) keep the map exactly linear.
    def poly(r: np.ndarray) -> np.ndarray:
        return np.polynomial.polynomial.polyval(
            np.asarray(r) / profile.domain_scale, profile.coefficients
        )

    x_off = (np.arange(KERNEL_N) + 0.5) * ELEMENT - EXPOSED_DIAMETER / 2
    offsets = sorted({d for pair in CELL_OFFSET_PAIRS for d in pair})
    row_sums = [float(np.sum(poly(np.hypot(x_off, dy)))) for dy in offsets]
    d_min = row_sums[0] * ELEMENT  # offset 0.005 is the kernel center row
    return np.concatenate([[d_min], row_sums, poly(positivity_r)])


def main() -> None:
    r_samples = SAMPLE_DISTANCES_CM * 0.01
    guess = initial_shape(r_samples)
    guess *= TARGET_CENTER_ROW_DOSE / linear_targets(guess, np.array([0.0]))[0]

    # Probe the sample->targets linear map column by column. Positivity is
    # enforced over every radius the band row-sums can touch (<= 0.115 m,
    # keeping the clamp inactive there so the map stays exactly linear) and
    # near 0.15 m so the sensing window reaches ~0.3 m; the polynomial may
    # dip below zero in between, where evaluation clamps it.
    positivity_r = np.concatenate(
        [np.linspace(0.0, 0.115, 116), np.linspace(0.142, 0.152, 11)]
    )
    n_inner = 116
    n_pos = len(positivity_r)
    columns = [linear_targets(np.eye(17)[j], positivity_r) for j in range(17)]
    M = np.stack(columns, axis=1)

    offsets = sorted({d for pair in CELL_OFFSET_PAIRS for d in pair})
    row_idx = {d: 1 + i for i, d in enumerate(offsets)}
    ref_row = 1514.0  # row sum matching d_min = 15.14 over 0.01 m elements

    constraints = [
        # Calibration anchor: center-row dose at 1 m/s.
        optimize.LinearConstraint(M[0:1], TARGET_CENTER_ROW_DOSE, TARGET_CENTER_ROW_DOSE),
    ]
    # Coverage band: each distinct cell-offset pair sums into the band.
    pair_rows = np.stack(
        [M[row_idx[a]] + M[row_idx[b]] for a, b in CELL_OFFSET_PAIRS]
    )
    constraints.append(
        optimize.LinearConstraint(pair_rows, BAND_LO * ref_row, BAND_HI * ref_row)
    )
    # Fitted polynomial strictly positive through the kernel/band region and
    # faintly positive near 0.15 m so the sensing window reaches ~0.3 m.
    pos_rows = M[1 + len(offsets):]
    lower = np.concatenate([np.full(n_inner, 0.05), np.full(n_pos - n_inner, 0.02)])
    constraints.append(optimize.LinearConstraint(pos_rows, lower, np.inf))
    # Keep the decay tail monotone so the dataset reads like a real sweep.
    mono = np.zeros((9, 17))
    for row, j in enumerate(range(7, 16)):
        mono[row, j] = 1.0
        mono[row, j + 1] = -1.0
    constraints.append(optimize.LinearConstraint(mono, 0.0, np.inf))

    # Feasibility first (HiGHS LP maximizing the band slack), then polish
    # toward the physical guess with trust-constr.
    a_ub, b_ub = [], []
    for con in constraints[1:]:
        A = np.atleast_2d(con.A)
        lb = np.atleast_1d(con.lb) if np.ndim(con.lb) else np.full(A.shape[0], con.lb)
        ub = np.atleast_1d(con.ub) if np.ndim(con.ub) else np.full(A.shape[0], con.ub)
        for row, lo_v, hi_v in zip(A, np.broadcast_to(lb, A.shape[:1]),
                                   np.broadcast_to(ub, A.shape[:1])):
            if np.isfinite(lo_v):
                a_ub.append(-row)
                b_ub.append(-lo_v)
            if np.isfinite(hi_v):
                a_ub.append(row)
                b_ub.append(hi_v)
    # L1-closest feasible point to the physical guess: variables [x, u] with
    # u >= |x - guess| elementwise, minimize sum(u).
    n_c = len(b_ub)
    A_ub_ext = np.block([
        [np.array(a_ub), np.zeros((n_c, 17))],
        [np.eye(17), -np.eye(17)],
        [-np.eye(17), -np.eye(17)],
    ])
    b_ub_ext = np.concatenate([b_ub, guess, -guess])
    lp = optimize.linprog(
        c=np.concatenate([np.zeros(17), np.ones(17)]),
        A_ub=A_ub_ext,
        b_ub=b_ub_ext,
        A_eq=np.hstack([M[0:1], np.zeros((1, 17))]),
        b_eq=[TARGET_CENTER_ROW_DOSE],
        bounds=[(0.0, None)] * 17 + [(None, None)] * 17,
        method="highs",
    )
    if not lp.success:
        raise SystemExit(f"calibration infeasible: {lp.message}")

    result = optimize.minimize(
        lambda x: float(np.sum((x - guess) ** 2)),
        lp.x[:17],
        jac=lambda x: 2.0 * (x - guess),
        bounds=[(0.0, None)] * 17,
        constraints=constraints,
        method="SLSQP",
        options={"maxiter": 500, "ftol": 1e-14},
    )
    samples = np.round(result.x if result.success else lp.x[:17], 2)

    # Report everything through the real pipeline (with clamping).
    profile = fit_samples(samples)
    mask = radiometry.build_kernel(profile, EXPOSED_DIAMETER, KERNEL_N)
    d_min = float(mask.center_row().sum() * mask.element_size)
    residuals = radiometry.fit_residuals(
        profile,
        [radiometry.IrradianceMeasurement(d * 0.01, v)
         for d, v in zip(SAMPLE_DISTANCES_CM, samples)],
    )
    peak = samples.max()

    print("# frozen samples (W/m^2):")
    print("(" + ", ".join(f"{v:.2f}" for v in samples) + ")")
    print(f"d_min @ 1 m/s          = {d_min:.6f}  (target {TARGET_CENTER_ROW_DOSE})")
    print(f"max |fit residual|     = {np.abs(residuals).max():.3e}"
          f"  ({100 * np.abs(residuals).max() / peak:.4f}% of peak {peak:.2f})")

    for d_req, label in ((26.558, "90%"), (79.674, "99.9%"), (132.790, "99.999%")):
        v = min(1.0, d_min / d_req)
        print(f"planned velocity {label:>8}: {v:.4f} m/s")

    x_off = (np.arange(KERNEL_N) + 0.5) * mask.element_size - EXPOSED_DIAMETER / 2
    def row_sum(dy: float) -> float:
        return float(np.sum(radiometry.eval_profile(profile, np.hypot(x_off, dy))))
    ref = row_sum(0.005)
    ratios = []
    for yc in np.arange(0.005, 0.1, 0.01):
        total = row_sum(abs(yc - 0.02)) + row_sum(abs(yc - 0.08))
        ratios.append(total / ref)
    print(f"band ratios (want all in [1.0, 1.15]): min {min(ratios):.5f} max {max(ratios):.5f}")

    dense_r = np.linspace(0.0, 0.16, 3201)
    dense_v = radiometry.eval_profile(profile, dense_r)
    positive = dense_r[dense_v > 0]
    print(f"profile support: last positive radius {positive.max():.4f} m"
          f" (sensor window ~ {2 * positive.max():.3f} m of travel)")
    print(f"min fitted value below 0.09 m: {dense_v[dense_r < 0.09].min():.4f} (want > 0)")
    print(f"value at 0.08 m: {radiometry.eval_profile(profile, 0.08):.3f}"
          f" ({100 * radiometry.eval_profile(profile, 0.08) / peak:.2f}% of peak)")


if __name__ == "__main__":
    main()
