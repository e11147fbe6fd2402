"""Reference UV source fixture used by tests, the CLI demo flow, and the UI.

A 10 W 365 nm flashlight-class source characterized at 0.3 m height:
17 radial samples, 1 cm apart, out to 16 cm. The beam is rim-weighted
(an LED-ring source: broad central plateau, hot ring near 2.5 cm, steep
falloff past 5 cm, faint skirt out to ~15 cm). The sample values are
calibrated so the standard 16x16 kernel's center-row dose at 1 m/s is
15.14 J/m^2; regenerate with tools/calibrate_reference_source.py.
"""

from __future__ import annotations

from .radiometry import (
    IrradianceMeasurement,
    IrradianceProfile,
    KernelMask,
    LampDecayModel,
    build_kernel,
    eval_profile,
    fit_profile,
)

REFERENCE_FIT_ORDER = 15
REFERENCE_CALIBRATION_HEIGHT = 0.3  # m
REFERENCE_EXPOSED_DIAMETER = 0.16  # m
REFERENCE_KERNEL_N = 16
REFERENCE_CENTER_ROW_DOSE = 15.14  # J/m^2 at 1 m/s (calibration anchor)

# (distance m, irradiance W/m^2)
REFERENCE_SAMPLES: tuple[tuple[float, float], ...] = (
    (0.00, 114.30),
    (0.01, 120.46),
    (0.02, 233.45),
    (0.03, 168.24),
    (0.04, 50.57),
    (0.05, 24.20),
    (0.06, 13.75),
    (0.07, 7.22),
    (0.08, 7.22),
    (0.09, 7.22),
    (0.10, 0.53),
    (0.11, 0.53),
    (0.12, 0.31),
    (0.13, 0.31),
    (0.14, 0.31),
    (0.15, 0.31),
    (0.16, 0.00),
)

# Output droop fixture: the source loses about 2.46 W/m^2 of on-axis
# irradiance over 10 minutes of continuous use, encoded as a fraction of
# the beam-center value.
REFERENCE_DROOP_W_M2 = 2.46
REFERENCE_DROOP_TIME_S = 600.0


def reference_measurements() -> list[IrradianceMeasurement]:
    return [IrradianceMeasurement(d, v) for d, v in REFERENCE_SAMPLES]


def reference_profile() -> IrradianceProfile:
    return fit_profile(
        reference_measurements(),
        REFERENCE_FIT_ORDER,
        calibration_height=REFERENCE_CALIBRATION_HEIGHT,
    )


def reference_kernel(n: int = REFERENCE_KERNEL_N) -> KernelMask:
    return build_kernel(reference_profile(), REFERENCE_EXPOSED_DIAMETER, n)


def reference_lamp_decay() -> LampDecayModel:
    center = eval_profile(reference_profile(), 0.0)
    return LampDecayModel(
        table=(
            (0.0, 1.0),
            (REFERENCE_DROOP_TIME_S, 1.0 - REFERENCE_DROOP_W_M2 / center),
        )
    )
