"""Coverage planning: plane fit, lawnmower path, dose-scaled sweep velocity.

The planner works in 2D plane coordinates obtained by projecting the
supervisor's 3D region vertices onto their least-squares plane. Passes run
along the region's long axis, overrun each end by half the exposed
diameter (so boundary cells receive the full center-row sweep), and are
laterally snapped to the kernel element grid so deposition aligns with
dose-grid cells.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PlanningError
from .radiometry import DisinfectionSpec, KernelMask


def fit_plane(points) -> tuple[np.ndarray, float]:
    """Orthogonal least-squares plane through >= 3 non-collinear 3D points.

    Returns (unit normal, offset) with the plane defined by normal . x =
    offset. The normal is oriented toward positive z (the light source
    side), falling back to lexicographic orientation for vertical planes.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 3:
        raise PlanningError("plane fit needs at least 3 points of dimension 3")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    span = float(np.linalg.norm(centered))
    if span == 0.0 or singular[1] <= 1e-12 * singular[0]:
        raise PlanningError("points are collinear or coincident; no unique plane")
    normal = vt[2]
    for component in (normal[2], normal[1], normal[0]):
        if component != 0.0:
            if component < 0.0:
                normal = -normal
            break
    normal = normal / np.linalg.norm(normal)
    return normal, float(normal @ centroid)


@dataclass(frozen=True)
class RegionSpec:
    """A disinfection region: 3D vertices, their fitted plane, and the 2D frame.

    Plane coordinates: the global origin projected onto the plane is (0, 0),
    the u axis is the projected global x axis (or the first vertex edge when
    the plane is perpendicular to x), and v completes the right-handed frame.
    Vertices entered on the z = 0 plane keep their (x, y) coordinates.
    """

    vertices: tuple[tuple[float, float, float], ...]
    normal: tuple[float, float, float]
    offset: float
    axis_u: tuple[float, float, float]
    axis_v: tuple[float, float, float]
    polygon: tuple[tuple[float, float], ...]  # vertices in plane coordinates
    bounds: tuple[float, float, float, float]  # u_min, v_min, u_max, v_max
    max_residual: float

    @classmethod
    def from_vertices(cls, vertices) -> "RegionSpec":
        pts = np.asarray(vertices, dtype=float)
        normal, offset = fit_plane(pts)
        residuals = np.abs(pts @ normal - offset)

        u = np.array([1.0, 0.0, 0.0]) - normal[0] * normal
        if np.linalg.norm(u) < 1e-9:
            edge = pts[1] - pts[0]
            u = edge - (edge @ normal) * normal
        u = u / np.linalg.norm(u)
        v = np.cross(normal, u)

        plane_origin = offset * normal
        projected = pts - np.outer(pts @ normal - offset, normal)
        coords = np.stack([(projected - plane_origin) @ u,
                           (projected - plane_origin) @ v], axis=1)
        u_min, v_min = coords.min(axis=0)
        u_max, v_max = coords.max(axis=0)
        return cls(
            vertices=tuple(map(tuple, pts)),
            normal=tuple(normal),
            offset=offset,
            axis_u=tuple(u),
            axis_v=tuple(v),
            polygon=tuple(map(tuple, coords)),
            bounds=(float(u_min), float(v_min), float(u_max), float(v_max)),
            max_residual=float(residuals.max()),
        )

    @property
    def extent_u(self) -> float:
        return self.bounds[2] - self.bounds[0]

    @property
    def extent_v(self) -> float:
        return self.bounds[3] - self.bounds[1]

    def long_axis(self) -> str:
        """'u' or 'v'; ties resolved toward the first vertex edge direction."""
        if self.extent_u > self.extent_v:
            return "u"
        if self.extent_v > self.extent_u:
            return "v"
        e0 = np.subtract(self.polygon[1], self.polygon[0])
        return "u" if abs(e0[0]) >= abs(e0[1]) else "v"

    def to_dict(self) -> dict:
        return {
            "vertices": [list(p) for p in self.vertices],
            "normal": list(self.normal),
            "offset_m": self.offset,
            "polygon": [list(p) for p in self.polygon],
            "bounds": list(self.bounds),
            "max_residual_m": self.max_residual,
        }


@dataclass(frozen=True)
class PlannerConfig:
    """Sweep limits: peak carriage speed, pass spacing, plane-fit tolerance.

    pass_spacing defaults to half the exposed diameter so adjacent passes
    over-cover the gap between them.
    """

    v_max: float = 1.0
    pass_spacing: float | None = None
    plane_tolerance: float = 0.01

    def __post_init__(self) -> None:
        if self.v_max <= 0:
            raise DomainError(f"v_max must be positive, got {self.v_max}")
        if self.pass_spacing is not None and self.pass_spacing <= 0:
            raise DomainError(f"pass_spacing must be positive, got {self.pass_spacing}")

    def spacing_for(self, mask: KernelMask) -> float:
        if self.pass_spacing is not None:
            return self.pass_spacing
        return mask.exposed_diameter / 2.0


@dataclass(frozen=True)
class CoveragePlan:
    """Lawnmower waypoints in plane coordinates plus the commanded velocity."""

    waypoints: tuple[tuple[float, float], ...]
    commanded_velocity: float
    pass_spacing: float
    scale_factor: float
    d_min_at_vmax: float
    required_dose: float

    def path_length(self) -> float:
        pts = np.asarray(self.waypoints)
        return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))

    def to_dict(self) -> dict:
        return {
            "waypoints": [list(p) for p in self.waypoints],
            "commanded_velocity_m_s": self.commanded_velocity,
            "pass_spacing_m": self.pass_spacing,
            "scale_factor": self.scale_factor,
            "d_min_J_m2": self.d_min_at_vmax,
            "d_req_J_m2": self.required_dose,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CoveragePlan":
        return cls(
            waypoints=tuple((float(x), float(y)) for x, y in doc["waypoints"]),
            commanded_velocity=float(doc["commanded_velocity_m_s"]),
            pass_spacing=float(doc["pass_spacing_m"]),
            scale_factor=float(doc["scale_factor"]),
            d_min_at_vmax=float(doc["d_min_J_m2"]),
            required_dose=float(doc["d_req_J_m2"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "CoveragePlan":
        return cls.from_dict(json.loads(text))


def min_center_dose(mask: KernelMask, v_max: float) -> float:
    """Dose a swept-over point receives from the kernel center row at v_max.

    Each element exposes the point for element_size / v_max seconds; the
    minimum dose along the pass line is the center-row sum of those element
    doses.
    """
    if v_max <= 0:
        raise DomainError(f"v_max must be positive, got {v_max}")
    exposure = mask.element_size / v_max
    return float(np.sum(mask.center_row() * exposure))


def scale_velocity(d_min: float, d_req: float, v_max: float) -> float:
    """Sweep velocity delivering d_req on the pass line, clamped to v_max."""
    if d_min <= 0 or d_req <= 0 or v_max <= 0:
        raise DomainError("d_min, d_req and v_max must all be positive")
    return min(v_max, (d_min / d_req) * v_max)


def plan_lawnmower(
    region: RegionSpec,
    config: PlannerConfig,
    mask: KernelMask,
    spec: DisinfectionSpec,
) -> CoveragePlan:
    """Serpentine coverage of the region's bounding rectangle.

    Passes run along the long axis, spaced by config.pass_spacing and
    centered across the short axis (snapped to the kernel element grid);
    each pass overruns the region by half the exposed diameter at both ends.
    """
    u_min, v_min, u_max, v_max_b = region.bounds
    if region.extent_u <= 0 and region.extent_v <= 0:
        raise PlanningError("region bounds are empty")
    along_u = region.long_axis() == "u"
    lo_min, lo_max = (u_min, u_max) if along_u else (v_min, v_max_b)
    lat_min, lat_max = (v_min, v_max_b) if along_u else (u_min, u_max)
    width = lat_max - lat_min

    element = mask.element_size
    if width < element:
        raise PlanningError(
            f"region width {width:.4f} m is narrower than one kernel element ({element:.4f} m)"
        )
    spacing = config.spacing_for(mask)
    n_passes = max(1, math.ceil(width / spacing - 1e-9))
    if n_passes == 1:
        margin = width / 2.0
    else:
        # For a two-pass sweep, make sure each edge cell also sits within the
        # kernel's outermost row of the far pass, otherwise the cells beside
        # the near pass receive exactly the center-row dose with no margin.
        # Shrinking by whole elements keeps passes aligned with grid cells.
        reach = (mask.n - 1) / 2.0 * element + element / 2.0
        margin = (width - (n_passes - 1) * spacing) / 2.0
        if n_passes == 2:
            while spacing > element and margin + spacing > reach + 1e-12:
                spacing -= element
                margin = (width - spacing) / 2.0
    base = round((lat_min + margin) / element) * element
    laterals = [base + i * spacing for i in range(n_passes)]

    overrun = mask.exposed_diameter / 2.0
    start, end = lo_min - overrun, lo_max + overrun
    waypoints: list[tuple[float, float]] = []
    for i, lat in enumerate(laterals):
        ends = (start, end) if i % 2 == 0 else (end, start)
        for lo in ends:
            waypoints.append((lo, lat) if along_u else (lat, lo))

    d_min = min_center_dose(mask, config.v_max)
    sf = d_min / spec.required_dose
    return CoveragePlan(
        waypoints=tuple(waypoints),
        commanded_velocity=scale_velocity(d_min, spec.required_dose, config.v_max),
        pass_spacing=spacing,
        scale_factor=sf,
        d_min_at_vmax=d_min,
        required_dose=spec.required_dose,
    )
