"""Job-oriented HTTP service around the segmentation pipeline.

Jobs run on a single background worker (geodesic factorizations are
memory-heavy); per-view work inside a job is parallel. Candidate
selections posted after completion re-enter fusion without re-rendering
or re-querying the backend.
"""

from __future__ import annotations

import json
import queue
import tempfile
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Form, HTTPException, UploadFile
from fastapi.responses import FileResponse, JSONResponse

from .backends import make_backend
from .mesh import load_mesh
from .pipeline import PipelineConfig, PipelineRun, resolve_config, save_artifacts

STATES = ("rendering", "segmenting", "fusing", "done", "failed")


@dataclass
class Job:
    id: str
    query: str
    backend_spec: str
    config: PipelineConfig
    directory: Path
    mesh_filename: str
    state: str = "rendering"
    error: str | None = None
    run: PipelineRun | None = None
    result: object = None
    selections: dict = field(default_factory=dict)
    reloaded: bool = False


class JobManager:
    def __init__(self, default_backend_spec=None, persist_dir=None):
        self.default_backend_spec = default_backend_spec
        if persist_dir:
            self.jobs_root = Path(persist_dir)
            self.jobs_root.mkdir(parents=True, exist_ok=True)
            self._tmp = None
        else:
            self._tmp = tempfile.TemporaryDirectory(prefix="meshreason-jobs-")
            self.jobs_root = Path(self._tmp.name)
        self.jobs: dict[str, Job] = {}
        self.lock = threading.Lock()
        self.tasks: queue.Queue = queue.Queue()
        self.worker = threading.Thread(target=self._work, daemon=True)
        self.worker.start()
        if persist_dir:
            self._reload_persisted()

    # -- submission and worker ------------------------------------------------

    def submit(self, mesh_bytes: bytes, filename: str, query: str, config_json=None) -> Job:
        overrides = json.loads(config_json) if config_json else {}
        config = resolve_config(overrides)
        job_id = uuid.uuid4().hex[:12]
        job_dir = self.jobs_root / job_id
        job_dir.mkdir(parents=True)
        suffix = Path(filename or "mesh.obj").suffix.lower() or ".obj"
        mesh_name = f"mesh{suffix}"
        (job_dir / mesh_name).write_bytes(mesh_bytes)
        job = Job(
            id=job_id,
            query=query,
            backend_spec=self.default_backend_spec or "",
            config=config,
            directory=job_dir,
            mesh_filename=mesh_name,
        )
        with self.lock:
            self.jobs[job_id] = job
        self._write_job_meta(job)
        self.tasks.put(("run", job, None))
        return job

    def select(self, job_id: str, selections: dict) -> Job:
        job = self.get(job_id)
        if job.reloaded or job.run is None:
            raise HTTPException(409, "job was reloaded from disk; re-submit to re-fuse")
        if job.state not in ("done", "fusing"):
            raise HTTPException(409, f"job is {job.state}; selection needs a finished job")
        normalized = {}
        for key, indices in selections.items():
            view_index = int(key)
            if view_index < 0 or view_index >= len(job.run.views):
                raise HTTPException(422, f"no view {view_index}")
            cands = job.run.per_view_candidates[view_index]
            count = len(cands) if cands else 0
            indices = [int(i) for i in indices]
            if any(i < 0 or i >= count for i in indices):
                raise HTTPException(
                    422, f"selection index out of range for view {view_index}"
                )
            normalized[view_index] = indices
        job.selections = normalized
        self.tasks.put(("refuse", job, normalized))
        return job

    def get(self, job_id: str) -> Job:
        with self.lock:
            job = self.jobs.get(job_id)
        if job is None:
            raise HTTPException(404, f"unknown job {job_id}")
        return job

    def _work(self):
        while True:
            kind, job, payload = self.tasks.get()
            try:
                if kind == "run":
                    self._execute(job)
                elif kind == "refuse":
                    self._refuse(job, payload)
            except Exception as exc:
                self._set_state(job, "failed", error=str(exc))
            finally:
                self.tasks.task_done()

    def _execute(self, job: Job):
        mesh = load_mesh(job.directory / job.mesh_filename)
        backend_spec = job.backend_spec
        if not backend_spec:
            raise RuntimeError("service has no backend configured")
        self._set_state(job, "rendering")
        run = PipelineRun(mesh, None, job.config)
        run.backend = make_backend(backend_spec, mesh=run.mesh)
        run.render()
        job.run = run
        self._set_state(job, "segmenting")
        run.segment(job.query)
        self._set_state(job, "fusing")
        job.result = run.fuse()
        save_artifacts(
            job.directory, run, job.result, job.query, backend_spec=backend_spec
        )
        self._set_state(job, "done")

    def _refuse(self, job: Job, selections: dict):
        self._set_state(job, "fusing")
        job.result = run_result = job.run.fuse(selections=selections)
        save_artifacts(
            job.directory,
            job.run,
            run_result,
            job.query,
            backend_spec=job.backend_spec,
            extra_result_fields={
                "selections": {str(k): v for k, v in selections.items()}
            },
        )
        self._set_state(job, "done")

    def _set_state(self, job: Job, state: str, error=None):
        with self.lock:
            job.state = state
            job.error = error
        self._write_job_meta(job)

    def _write_job_meta(self, job: Job):
        meta = {
            "id": job.id,
            "query": job.query,
            "state": job.state,
            "error": job.error,
            "backend": job.backend_spec,
            "mesh": job.mesh_filename,
            "config": job.config.as_dict(),
        }
        (job.directory / "job.json").write_text(json.dumps(meta, indent=1))

    def _reload_persisted(self):
        for meta_path in sorted(self.jobs_root.glob("*/job.json")):
            try:
                meta = json.loads(meta_path.read_text())
            except ValueError:
                continue
            state = "done" if meta.get("state") == "done" else "failed"
            job = Job(
                id=meta["id"],
                query=meta.get("query", ""),
                backend_spec=meta.get("backend", ""),
                config=resolve_config(),
                directory=meta_path.parent,
                mesh_filename=meta.get("mesh", "mesh.obj"),
                state=state,
                error=meta.get("error"),
                reloaded=True,
            )
            with self.lock:
                self.jobs[job.id] = job

    # -- view payloads ----------------------------------------------------------

    def job_summary(self, job: Job) -> dict:
        views = []
        if job.run is not None and job.run.views is not None:
            for view in job.run.views:
                cands = None
                if job.run.per_view_candidates is not None:
                    cands = job.run.per_view_candidates[view.view_index]
                views.append(
                    {
                        "index": view.view_index,
                        "imageUrl": f"/api/jobs/{job.id}/views/{view.view_index}.png",
                        "candidates": [
                            {
                                "index": j,
                                "confidence": float(c.confidence),
                                "text": c.answer_text,
                                "maskUrl": f"/api/jobs/{job.id}/masks/{view.view_index}/{j}.png",
                            }
                            for j, c in enumerate(cands or [])
                        ],
                        "failed": (
                            job.run.view_errors.get(view.view_index)
                            if job.run.view_errors
                            else None
                        ),
                    }
                )
        elif job.reloaded:
            for png in sorted(job.directory.glob("views/view_*.png")):
                index = int(png.stem.split("_")[1])
                views.append(
                    {
                        "index": index,
                        "imageUrl": f"/api/jobs/{job.id}/views/{index}.png",
                        "candidates": [],
                        "failed": None,
                    }
                )
        body = {
            "id": job.id,
            "state": job.state,
            "query": job.query,
            "views": views,
            "selections": {str(k): v for k, v in job.selections.items()},
        }
        if job.error:
            body["error"] = job.error
        return body

    def result_payload(self, job: Job) -> dict:
        result_path = job.directory / "result.json"
        if job.state != "done" or not result_path.exists():
            raise HTTPException(409, f"job is {job.state}")
        payload = json.loads(result_path.read_text())
        mesh = load_mesh(job.directory / job.mesh_filename)
        from .mesh import normalize

        mesh = normalize(mesh)
        payload["mesh"] = {
            "vertices": [[float(x) for x in v] for v in mesh.vertices],
            "faces": [[int(i) for i in f] for f in mesh.faces],
            "labels": payload["labels"],
        }
        return payload


def create_app(default_backend_spec=None, persist_dir=None, ui_dir=None) -> FastAPI:
    app = FastAPI(title="meshreason")
    manager = JobManager(default_backend_spec=default_backend_spec, persist_dir=persist_dir)
    app.state.manager = manager

    @app.post("/api/jobs", status_code=202)
    async def create_job(mesh: UploadFile, query: str = Form(...), config: str = Form(None)):
        if not query.strip():
            raise HTTPException(422, "query must be non-empty")
        data = await mesh.read()
        try:
            job = manager.submit(data, mesh.filename, query, config_json=config)
        except (ValueError, KeyError) as exc:
            raise HTTPException(422, f"bad config: {exc}") from exc
        return {"id": job.id}

    @app.get("/api/jobs/{job_id}")
    def job_state(job_id: str):
        return manager.job_summary(manager.get(job_id))

    @app.get("/api/jobs/{job_id}/views/{index}.png")
    def view_image(job_id: str, index: int):
        job = manager.get(job_id)
        path = job.directory / "views" / f"view_{index:03d}.png"
        if not path.exists():
            raise HTTPException(404, f"no rendered view {index}")
        return FileResponse(path, media_type="image/png")

    @app.get("/api/jobs/{job_id}/masks/{index}/{cand}.png")
    def mask_image(job_id: str, index: int, cand: int):
        job = manager.get(job_id)
        path = job.directory / "candidates" / f"view_{index:03d}_cand_{cand:02d}.png"
        if not path.exists():
            raise HTTPException(404, f"no candidate {cand} for view {index}")
        return FileResponse(path, media_type="image/png")

    @app.post("/api/jobs/{job_id}/selection", status_code=202)
    def post_selection(job_id: str, body: dict):
        selections = body.get("selections")
        if not isinstance(selections, dict):
            raise HTTPException(422, 'body must be {"selections": {"<view>": [indices]}}')
        manager.select(job_id, selections)
        return {"id": job_id, "state": "fusing"}

    @app.get("/api/jobs/{job_id}/result")
    def job_result(job_id: str):
        return JSONResponse(manager.result_payload(manager.get(job_id)))

    if ui_dir and Path(ui_dir).exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
