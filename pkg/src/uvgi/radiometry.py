"""UV irradiance and dose math.

First-order decay survival model, dose arithmetic, measured-profile
fitting/evaluation, kernel mask construction, and lamp power decay.
All quantities are SI internally: m, s, W/m^2, J/m^2. Measurement CSVs
arrive in cm and mW/cm^2 and are converted on load (1 mW/cm^2 = 10 W/m^2).
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FitError

# Disinfection rate follows the logarithmic convention: 1 to 5 log reduction.
RATE_LEVELS = (0.90, 0.99, 0.999, 0.9999, 0.99999)

MW_CM2_TO_W_M2 = 10.0
CM_TO_M = 0.01

MEASUREMENT_CSV_HEADER = "distance_cm,irradiance_mW_cm2"


def survival_fraction(k: float, dose: float) -> float:
    """Fraction of virus still active after the given dose, exp(-k*dose)."""
    if k <= 0:
        raise DomainError(f"rate constant must be positive, got {k}")
    if dose < 0:
        raise DomainError(f"dose must be non-negative, got {dose}")
    return math.exp(-k * dose)


def required_dose(k: float, rate: float) -> float:
    """Dose (J/m^2) needed to inactivate the given fraction of virus."""
    if k <= 0:
        raise DomainError(f"rate constant must be positive, got {k}")
    if not 0.0 < rate < 1.0:
        raise DomainError(f"disinfection rate must be in (0, 1), got {rate}")
    return -math.log(1.0 - rate) / k


def dose(exposure_time: float, irradiance: float) -> float:
    """Accumulated dose (J/m^2) for constant irradiance over an exposure."""
    if exposure_time < 0:
        raise DomainError(f"exposure time must be non-negative, got {exposure_time}")
    if irradiance < 0:
        raise DomainError(f"irradiance must be non-negative, got {irradiance}")
    return exposure_time * irradiance


def attenuated_irradiance(power: float, exposed_area: float, eta: float) -> float:
    """Analytic fallback estimate of surface irradiance from source power.

    Only used when no measured profile exists; eta is the attenuation
    fraction of rated power reaching the exposed area.
    """
    if power <= 0:
        raise DomainError(f"power must be positive, got {power}")
    if exposed_area <= 0:
        raise DomainError(f"exposed area must be positive, got {exposed_area}")
    if not 0.0 < eta <= 1.0:
        raise DomainError(f"attenuation factor must be in (0, 1], got {eta}")
    return eta * power / exposed_area


@dataclass(frozen=True)
class DisinfectionSpec:
    """Virus susceptibility plus target rate, with the derived required dose."""

    k: float
    rate: float
    required_dose: float = field(init=False)

    def __post_init__(self) -> None:
        if self.k <= 0:
            raise DomainError(f"rate constant must be positive, got {self.k}")
        if not any(math.isclose(self.rate, level) for level in RATE_LEVELS):
            raise DomainError(
                f"disinfection rate must be one of {RATE_LEVELS}, got {self.rate}"
            )
        object.__setattr__(self, "required_dose", required_dose(self.k, self.rate))


@dataclass(frozen=True)
class IrradianceMeasurement:
    """One radial sample of the source's footprint on the surface."""

    distance: float  # m from beam center
    irradiance: float  # W/m^2

    def __post_init__(self) -> None:
        if self.distance < 0:
            raise DomainError(f"distance must be non-negative, got {self.distance}")
        if self.irradiance < 0:
            raise DomainError(f"irradiance must be non-negative, got {self.irradiance}")


@dataclass(frozen=True)
class IrradianceProfile:
    """Radial irradiance model: polynomial in (r / domain_scale).

    Evaluation clamps to >= 0 and is exactly 0 beyond cutoff_radius; the
    polynomial has no physical meaning outside its measured domain.
    """

    coefficients: tuple[float, ...]
    domain_scale: float
    cutoff_radius: float
    calibration_height: float
    fit_order: int

    def __call__(self, r: float) -> float:
        return eval_profile(self, r)

    def at_height(self, height: float) -> "IrradianceProfile":
        """Inverse-square rescaling to a different source height.

        Approximation only; the profile was measured at a single height.
        """
        if height <= 0:
            raise DomainError(f"height must be positive, got {height}")
        ratio = self.calibration_height / height
        return IrradianceProfile(
            coefficients=tuple(c * ratio * ratio for c in self.coefficients),
            domain_scale=self.domain_scale / ratio,
            cutoff_radius=self.cutoff_radius / ratio,
            calibration_height=height,
            fit_order=self.fit_order,
        )

    def to_dict(self) -> dict:
        return {
            "coefficients": list(self.coefficients),
            "domain_scale": self.domain_scale,
            "cutoff_radius_m": self.cutoff_radius,
            "calibration_height_m": self.calibration_height,
            "fit_order": self.fit_order,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "IrradianceProfile":
        return cls(
            coefficients=tuple(float(c) for c in doc["coefficients"]),
            domain_scale=float(doc["domain_scale"]),
            cutoff_radius=float(doc["cutoff_radius_m"]),
            calibration_height=float(doc["calibration_height_m"]),
            fit_order=int(doc["fit_order"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "IrradianceProfile":
        return cls.from_dict(json.loads(text))


def fit_profile(
    measurements: list[IrradianceMeasurement],
    order: int,
    cutoff_radius: float | None = None,
    calibration_height: float = 0.3,
) -> IrradianceProfile:
    """Least-squares polynomial fit of irradiance vs radial distance.

    Distances are rescaled to [0, 1] before fitting so high orders stay
    numerically tame; coefficients are stored in the scaled domain together
    with the scale factor. cutoff_radius defaults to the largest measured
    distance.
    """
    if order < 0:
        raise FitError(f"fit order must be >= 0, got {order}")
    distances = np.array([m.distance for m in measurements], dtype=float)
    values = np.array([m.irradiance for m in measurements], dtype=float)
    if len(np.unique(distances)) < order + 1:
        raise FitError(
            f"need at least {order + 1} distinct distances for an order-{order} fit, "
            f"got {len(np.unique(distances))}"
        )
    scale = float(distances.max())
    if scale <= 0:
        # All samples at r = 0: only a constant fit is meaningful.
        scale = 1.0
    design = np.vander(distances / scale, order + 1, increasing=True)
    coeffs, _, rank, _ = np.linalg.lstsq(design, values, rcond=None)
    if rank < order + 1:
        raise FitError(f"rank-deficient fit: rank {rank} < {order + 1} coefficients")
    return IrradianceProfile(
        coefficients=tuple(float(c) for c in coeffs),
        domain_scale=scale,
        cutoff_radius=float(cutoff_radius) if cutoff_radius is not None else scale,
        calibration_height=calibration_height,
        fit_order=order,
    )


def eval_profile(profile: IrradianceProfile, r) -> float | np.ndarray:
    """Irradiance at radial distance r: clamped to >= 0, zero past the cutoff.

    Accepts a scalar or an ndarray of distances.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise DomainError("radial distance must be non-negative")
    x = r_arr / profile.domain_scale
    value = np.polynomial.polynomial.polyval(x, profile.coefficients)
    value = np.where(r_arr > profile.cutoff_radius, 0.0, np.maximum(value, 0.0))
    if np.isscalar(r) or r_arr.ndim == 0:
        return float(value)
    return value


def fit_residuals(profile: IrradianceProfile, measurements: list[IrradianceMeasurement]) -> np.ndarray:
    """Pointwise model-minus-sample residuals at the measured distances."""
    return np.array(
        [eval_profile(profile, m.distance) - m.irradiance for m in measurements]
    )


@dataclass(frozen=True)
class KernelMask:
    """Discretized n x n irradiance footprint of the source on the surface."""

    values: np.ndarray  # W/m^2, shape (n, n), row-major
    element_size: float  # m, height and width of one element
    exposed_diameter: float
    n: int

    def center_row(self) -> np.ndarray:
        """Irradiance values along the row through the mask center.

        For even n there is no exact center row; the row at offset
        +element_size/2 is used, which slightly under-reports the true
        centerline and keeps the planned dose conservative.
        """
        return self.values[self.n // 2]


def build_kernel(profile: IrradianceProfile, exposed_diameter: float, n: int) -> KernelMask:
    """Sample the profile at each element center to build the footprint mask."""
    if n < 1:
        raise DomainError(f"mask dimension must be >= 1, got {n}")
    if exposed_diameter <= 0:
        raise DomainError(f"exposed diameter must be positive, got {exposed_diameter}")
    element_size = exposed_diameter / n
    offsets = (np.arange(n) + 0.5) * element_size - exposed_diameter / 2.0
    yy, xx = np.meshgrid(offsets, offsets, indexing="ij")
    radii = np.hypot(xx, yy)
    values = eval_profile(profile, radii)
    return KernelMask(
        values=np.asarray(values, dtype=float),
        element_size=element_size,
        exposed_diameter=exposed_diameter,
        n=n,
    )


@dataclass(frozen=True)
class LampDecayModel:
    """Source output decay over elapsed runtime, as a (time, scale) table.

    An empty table means decay is disabled and the scale is 1 everywhere.
    """

    table: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        times = [t for t, _ in self.table]
        scales = [s for _, s in self.table]
        if self.table:
            if times[0] != 0.0 or scales[0] != 1.0:
                raise DomainError("decay table must start at (0, 1.0)")
            if any(t1 >= t2 for t1, t2 in zip(times, times[1:])):
                raise DomainError("decay table times must be strictly increasing")
            if any(s2 > s1 for s1, s2 in zip(scales, scales[1:])):
                raise DomainError("decay table scales must be non-increasing")
            if any(not 0.0 < s <= 1.0 for s in scales):
                raise DomainError("decay table scales must be in (0, 1]")

    @property
    def enabled(self) -> bool:
        return bool(self.table)

    def to_dict(self) -> dict:
        return {"table": [[t, s] for t, s in self.table]}

    @classmethod
    def from_dict(cls, doc: dict) -> "LampDecayModel":
        return cls(table=tuple((float(t), float(s)) for t, s in doc.get("table", [])))


def lamp_scale(model: LampDecayModel, t: float) -> float:
    """Output scale after t seconds of runtime; last table value held beyond it."""
    if t < 0:
        raise DomainError(f"elapsed time must be non-negative, got {t}")
    if not model.table:
        return 1.0
    times = [row[0] for row in model.table]
    scales = [row[1] for row in model.table]
    if t >= times[-1]:
        return scales[-1]
    return float(np.interp(t, times, scales))


def load_measurements_csv(text: str) -> list[IrradianceMeasurement]:
    """Parse a measurement CSV (distance_cm,irradiance_mW_cm2) into SI samples."""
    reader = io.StringIO(text)
    header = reader.readline().strip()
    if header != MEASUREMENT_CSV_HEADER:
        raise DomainError(
            f"measurement CSV must start with header '{MEASUREMENT_CSV_HEADER}', got '{header}'"
        )
    samples = []
    for lineno, line in enumerate(reader, start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise DomainError(f"line {lineno}: expected 2 fields, got {len(parts)}")
        try:
            distance_cm = float(parts[0])
            irradiance_mw_cm2 = float(parts[1])
        except ValueError as exc:
            raise DomainError(f"line {lineno}: {exc}") from exc
        try:
            samples.append(
                IrradianceMeasurement(
                    distance=distance_cm * CM_TO_M,
                    irradiance=irradiance_mw_cm2 * MW_CM2_TO_W_M2,
                )
            )
        except DomainError as exc:
            raise DomainError(f"line {lineno}: {exc}") from exc
    return samples


def dump_measurements_csv(measurements: list[IrradianceMeasurement]) -> str:
    """Render SI samples back to the CSV wire units."""
    lines = [MEASUREMENT_CSV_HEADER]
    for m in measurements:
        lines.append(f"{m.distance / CM_TO_M:.6g},{m.irradiance / MW_CM2_TO_W_M2:.10g}")
    return "\n".join(lines) + "\n"
