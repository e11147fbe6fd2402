"""Background run execution with live progress events.

One in-flight run per scene; runs from different scenes proceed in
parallel on their own threads. Progress events are buffered in memory for
live subscribers and persisted to the run directory so finished runs can
be streamed again after a restart.
"""

from __future__ import annotations

import json
import threading
from datetime import datetime, timezone

from .. import workflows
from ..fixtures import reference_lamp_decay
from ..planner import CoveragePlan, RegionSpec
from ..radiometry import IrradianceProfile, LampDecayModel
from ..simulator import MotionProfile, heatmap_export
from ..storage import DocumentStore, new_id


class RunConflict(Exception):
    """The scene already has an unfinished run."""


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


class _Handle:
    def __init__(self) -> None:
        self.events: list[dict] = []
        self.cond = threading.Condition()
        self.finished = False

    def emit(self, event: dict) -> None:
        with self.cond:
            self.events.append(event)
            if event.get("type") in ("done", "failed"):
                self.finished = True
            self.cond.notify_all()


class RunManager:
    def __init__(self, store: DocumentStore):
        self.store = store
        self._handles: dict[str, _Handle] = {}
        self._active_scenes: set[str] = set()
        self._lock = threading.Lock()
        self._fail_interrupted_runs()

    def _fail_interrupted_runs(self) -> None:
        # Runs that were pending/running when the previous process died can
        # never finish; mark them so clients are not left polling forever.
        for run_id in self.store.list_ids("runs"):
            record = self.store.load("runs", run_id)
            if record and record.get("state") in ("pending", "running"):
                record["state"] = "failed"
                record["error"] = "interrupted by service restart"
                record["finished_at"] = _utcnow()
                self.store.save("runs", run_id, record)

    def start(
        self,
        scene: dict,
        profile: IrradianceProfile,
        progress_interval: float = 0.5,
    ) -> str:
        scene_id = scene["id"]
        with self._lock:
            if scene_id in self._active_scenes:
                raise RunConflict(f"scene {scene_id} already has a run in flight")
            self._active_scenes.add(scene_id)
            run_id = new_id("run")
            self._handles[run_id] = _Handle()

        record = {
            "id": run_id,
            "scene_id": scene_id,
            "state": "pending",
            "created_at": _utcnow(),
            "finished_at": None,
            "error": None,
            "summary": None,
        }
        self.store.save("runs", run_id, record)
        thread = threading.Thread(
            target=self._work,
            args=(run_id, record, scene, profile, progress_interval),
            daemon=True,
        )
        thread.start()
        return run_id

    def _work(self, run_id, record, scene, profile, progress_interval) -> None:
        handle = self._handles[run_id]
        try:
            record["state"] = "running"
            self.store.save("runs", run_id, record)

            params = scene["params"]
            plan = CoveragePlan.from_dict(scene["plan"])
            region = RegionSpec.from_vertices(scene["region"]["vertices"])
            surface = scene["surface"]
            grid = workflows.make_grid(
                region,
                surface_width=surface["width_m"],
                surface_length=surface["length_m"],
                resolution=surface["resolution_m"],
            )
            motion = MotionProfile(kind=params["motion"], accel=params["accel"])
            lamp = reference_lamp_decay() if params.get("lamp_on") else LampDecayModel()
            sensors = workflows.sensor_line_for_region(region)

            d_req = plan.required_dose

            def on_progress(t, beam, speed, partial_grid):
                handle.emit(
                    {
                        "type": "progress",
                        "t_s": t,
                        "x_m": beam[0],
                        "y_m": beam[1],
                        "speed_m_s": speed,
                        "heatmap": heatmap_export(partial_grid, d_req),
                    }
                )

            result, report = workflows.execute_run(
                plan, profile, grid, motion, lamp, sensors,
                progress_cb=on_progress,
            )
            artifacts = workflows.render_artifacts(result, report, d_req)
            for name, data in artifacts.items():
                self.store.save_artifact(run_id, name, data)

            record["state"] = "done"
            record["finished_at"] = _utcnow()
            record["summary"] = {
                "fraction_covered": report["fraction_covered"],
                "min_dose_J_m2": report["min_dose_J_m2"],
                "max_dose_J_m2": report["max_dose_J_m2"],
                "elapsed_s": result.elapsed,
            }
            self.store.save("runs", run_id, record)
            handle.emit({"type": "done", "state": "done", "report": report})
        except Exception as exc:  # surface the failure through the record
            record["state"] = "failed"
            record["finished_at"] = _utcnow()
            record["error"] = str(exc)
            self.store.save("runs", run_id, record)
            handle.emit({"type": "failed", "state": "failed", "error": str(exc)})
        finally:
            events = "\n".join(json.dumps(e) for e in handle.events)
            self.store.save_artifact(run_id, "events.jsonl", events + "\n")
            with self._lock:
                self._active_scenes.discard(scene["id"])

    def events(self, run_id: str):
        """Yield run events: replay what happened, then follow live ones."""
        handle = self._handles.get(run_id)
        if handle is None:
            data = self.store.load_artifact(run_id, "events.jsonl")
            if data is None:
                record = self.store.load("runs", run_id)
                if record is None:
                    raise KeyError(run_id)
                # Finished (or failed) before any events were persisted.
                yield {
                    "type": record["state"],
                    "state": record["state"],
                    "error": record.get("error"),
                }
                return
            for line in data.decode().splitlines():
                if line.strip():
                    yield json.loads(line)
            return

        index = 0
        while True:
            with handle.cond:
                while index >= len(handle.events) and not handle.finished:
                    handle.cond.wait(timeout=1.0)
                events = handle.events[index:]
                index += len(events)
                finished = handle.finished and index >= len(handle.events)
            for event in events:
                yield event
            if finished:
                return
