"""HTTP facade: scenes, profiles, planning, execution, results.

All state lives in the document store; request handlers stay thin wrappers
over the core package. Scene mutations are serialized per scene id, and
any mutation of region or parameters drops the stored plan so a stale plan
can never be executed.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Query, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import StreamingResponse

from .. import workflows
from ..errors import DomainError, FitError, PlanningError
from ..planner import RegionSpec
from ..radiometry import (
    DisinfectionSpec,
    IrradianceProfile,
    fit_profile,
    fit_residuals,
    load_measurements_csv,
    required_dose,
)
from ..storage import DocumentStore, new_id
from .runs import RunConflict, RunManager
from .schemas import (
    ExecuteResponse,
    ParamsEcho,
    ParamsPut,
    PlanDoc,
    ProfileDoc,
    RegionDoc,
    RegionPut,
    RunRecordDoc,
    SceneCreate,
    SceneDoc,
    SceneList,
)


def create_app(data_dir: str | Path) -> FastAPI:
    app = FastAPI(title="uvgi-coverage", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = DocumentStore(data_dir)
    manager = RunManager(store)
    scene_locks: dict[str, threading.Lock] = {}
    locks_guard = threading.Lock()
    app.state.store = store
    app.state.manager = manager

    def scene_lock(scene_id: str) -> threading.Lock:
        with locks_guard:
            return scene_locks.setdefault(scene_id, threading.Lock())

    def get_scene_or_404(scene_id: str) -> dict:
        scene = store.load("scenes", scene_id)
        if scene is None:
            raise HTTPException(status_code=404, detail=f"unknown scene {scene_id}")
        return scene

    def get_profile_or_404(profile_id: str) -> dict:
        doc = store.load("profiles", profile_id)
        if doc is None:
            raise HTTPException(status_code=404, detail=f"unknown profile {profile_id}")
        return doc

    def profile_from_doc(doc: dict) -> IrradianceProfile:
        return IrradianceProfile.from_dict(doc)

    @app.post("/profiles", response_model=ProfileDoc)
    def create_profile(
        body: str = Body(..., media_type="text/csv"),
        order: int = Query(default=15, ge=0),
        cutoff_radius_m: float | None = Query(default=None, gt=0),
        calibration_height_m: float = Query(default=0.3, gt=0),
    ):
        try:
            measurements = load_measurements_csv(body)
            profile = fit_profile(
                measurements, order,
                cutoff_radius=cutoff_radius_m,
                calibration_height=calibration_height_m,
            )
            residuals = fit_residuals(profile, measurements)
        except (DomainError, FitError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        doc = {
            "id": new_id("profile"),
            **profile.to_dict(),
            "max_residual_W_m2": float(abs(residuals).max()),
            "sample_count": len(measurements),
        }
        store.save("profiles", doc["id"], doc)
        return doc

    @app.get("/profiles/{profile_id}", response_model=ProfileDoc)
    def get_profile(profile_id: str):
        return get_profile_or_404(profile_id)

    @app.get("/scenes", response_model=SceneList)
    def list_scenes():
        return {"scenes": store.list_ids("scenes")}

    @app.post("/scenes", response_model=SceneDoc, status_code=201)
    def create_scene(body: SceneCreate):
        get_profile_or_404(body.profile_id)
        scene = {
            "id": new_id("scene"),
            "surface": body.surface.model_dump(),
            "profile_id": body.profile_id,
            "region": None,
            "params": None,
            "plan": None,
            "run_ids": [],
        }
        store.save("scenes", scene["id"], scene)
        return scene

    @app.get("/scenes/{scene_id}", response_model=SceneDoc)
    def get_scene(scene_id: str):
        return get_scene_or_404(scene_id)

    @app.put("/scenes/{scene_id}/region", response_model=RegionDoc)
    def put_region(scene_id: str, body: RegionPut):
        with scene_lock(scene_id):
            scene = get_scene_or_404(scene_id)
            try:
                region = RegionSpec.from_vertices(body.vertices)
            except PlanningError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            scene["region"] = region.to_dict()
            scene["plan"] = None  # region changed: any previous plan is stale
            store.save("scenes", scene_id, scene)
            return scene["region"]

    @app.put("/scenes/{scene_id}/params", response_model=ParamsEcho)
    def put_params(scene_id: str, body: ParamsPut):
        with scene_lock(scene_id):
            scene = get_scene_or_404(scene_id)
            echo = {
                **body.model_dump(),
                "required_dose_J_m2": required_dose(body.k, body.rate),
            }
            scene["params"] = echo
            scene["plan"] = None  # parameters changed: plan is stale
            store.save("scenes", scene_id, scene)
            return echo

    @app.post("/scenes/{scene_id}/plan", response_model=PlanDoc)
    def plan_scene(scene_id: str):
        with scene_lock(scene_id):
            scene = get_scene_or_404(scene_id)
            if scene["region"] is None:
                raise HTTPException(status_code=409, detail="scene has no region")
            if scene["params"] is None:
                raise HTTPException(status_code=409, detail="scene has no parameters")
            profile = profile_from_doc(get_profile_or_404(scene["profile_id"]))
            params = scene["params"]
            try:
                spec = DisinfectionSpec(k=params["k"], rate=params["rate"])
                region = RegionSpec.from_vertices(scene["region"]["vertices"])
                plan = workflows.make_plan(profile, region, spec, v_max=params["v_max"])
            except (DomainError, PlanningError) as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            scene["plan"] = plan.to_dict()
            store.save("scenes", scene_id, scene)
            return scene["plan"]

    @app.post("/scenes/{scene_id}/execute", response_model=ExecuteResponse, status_code=202)
    def execute_scene(scene_id: str):
        with scene_lock(scene_id):
            scene = get_scene_or_404(scene_id)
            if scene["plan"] is None:
                raise HTTPException(
                    status_code=409, detail="scene has no current plan; plan first"
                )
            profile = profile_from_doc(get_profile_or_404(scene["profile_id"]))
            try:
                run_id = manager.start(scene, profile)
            except RunConflict as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            scene["run_ids"].append(run_id)
            store.save("scenes", scene_id, scene)
            return {"run_id": run_id}

    @app.get("/runs/{run_id}", response_model=RunRecordDoc)
    def get_run(run_id: str):
        record = store.load("runs", run_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"unknown run {run_id}")
        return record

    @app.get("/runs/{run_id}/events")
    def run_events(run_id: str):
        if store.load("runs", run_id) is None:
            raise HTTPException(status_code=404, detail=f"unknown run {run_id}")

        def sse():
            for event in manager.events(run_id):
                yield f"data: {json.dumps(event)}\n\n"

        return StreamingResponse(sse(), media_type="text/event-stream")

    def artifact_response(run_id: str, name: str, media_type: str) -> Response:
        record = store.load("runs", run_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"unknown run {run_id}")
        data = store.load_artifact(run_id, name)
        if data is None:
            raise HTTPException(
                status_code=409,
                detail=f"run {run_id} is {record['state']}; {name} not available",
            )
        return Response(content=data, media_type=media_type)

    @app.get("/runs/{run_id}/heatmap")
    def run_heatmap(run_id: str):
        return artifact_response(run_id, "heatmap.json", "application/json")

    @app.get("/runs/{run_id}/report")
    def run_report(run_id: str):
        return artifact_response(run_id, "report.json", "application/json")

    @app.get("/runs/{run_id}/sensors.csv")
    def run_sensors(run_id: str):
        return artifact_response(run_id, "sensors.csv", "text/csv")

    @app.get("/runs/{run_id}/traces.csv")
    def run_traces(run_id: str):
        return artifact_response(run_id, "traces.csv", "text/csv")

    @app.get("/runs/{run_id}/telemetry.jsonl")
    def run_telemetry(run_id: str):
        return artifact_response(run_id, "telemetry.jsonl", "application/jsonl")

    return app
