"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator

from ..radiometry import RATE_LEVELS


class SurfaceSpec(BaseModel):
    width_m: float = Field(gt=0)
    length_m: float = Field(gt=0)
    resolution_m: float = Field(default=0.01, gt=0)


class SceneCreate(BaseModel):
    surface: SurfaceSpec
    profile_id: str


class RegionPut(BaseModel):
    vertices: list[list[float]] = Field(min_length=3)

    @field_validator("vertices")
    @classmethod
    def three_coordinates_each(cls, v):
        for p in v:
            if len(p) != 3:
                raise ValueError("each vertex needs exactly 3 coordinates")
        return v


class ParamsPut(BaseModel):
    k: float = Field(gt=0, le=10, description="UV rate constant, m^2/J")
    rate: float = Field(description="disinfection fraction, one of the five levels")
    v_max: float = Field(default=1.0, gt=0)
    accel: float = Field(default=1.0, gt=0)
    motion: Literal["constant", "trapezoidal"] = "trapezoidal"
    lamp_on: bool = False

    @field_validator("rate")
    @classmethod
    def rate_is_supported_level(cls, v):
        if not any(abs(v - level) < 1e-12 for level in RATE_LEVELS):
            raise ValueError(f"rate must be one of {list(RATE_LEVELS)}")
        return v


class ParamsEcho(ParamsPut):
    required_dose_J_m2: float


class ProfileDoc(BaseModel):
    id: str
    coefficients: list[float]
    domain_scale: float
    cutoff_radius_m: float
    calibration_height_m: float
    fit_order: int
    max_residual_W_m2: float
    sample_count: int


class RegionDoc(BaseModel):
    vertices: list[list[float]]
    normal: list[float]
    offset_m: float
    polygon: list[list[float]]
    bounds: list[float]
    max_residual_m: float


class PlanDoc(BaseModel):
    waypoints: list[list[float]]
    commanded_velocity_m_s: float
    pass_spacing_m: float
    scale_factor: float
    d_min_J_m2: float
    d_req_J_m2: float


class SceneDoc(BaseModel):
    id: str
    surface: SurfaceSpec
    profile_id: str
    region: Optional[RegionDoc] = None
    params: Optional[ParamsEcho] = None
    plan: Optional[PlanDoc] = None
    run_ids: list[str] = []


class ExecuteResponse(BaseModel):
    run_id: str


class RunRecordDoc(BaseModel):
    id: str
    scene_id: str
    state: Literal["pending", "running", "done", "failed"]
    created_at: str
    finished_at: Optional[str] = None
    error: Optional[str] = None
    summary: Optional[dict] = None


class SceneList(BaseModel):
    scenes: list[str]
