"""HTTP API for the optimization engine.

File-backed job store (one directory per job under the data dir) with a
single FIFO worker thread; progress streams as newline-delimited JSON.
Versioned under ``/api/v1``.
"""

from __future__ import annotations

import io as _io
import json
import queue
import threading
import time
import uuid
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import PlainTextResponse, StreamingResponse

from .extensions import ChangeRequest, optimize_with_patterns, reoptimize_event
from .feasibility import check_feasibility, count_rest_days, validate_instance
from .generator import GeneratorConfig, generate_instance, toy_instance
from .hybrid import HybridConfig, optimize
from .io import (
    ParseError, export_roster_csv, import_roster_csv, instance_from_dict,
    instance_to_dict, load_pattern,
)
from .model import NO_PREF, ObjectiveWeights, RosterInstance
from .objective import (
    evaluate_objective, preference_violation_matrix, weekend_workload_matrix,
    workload_matrix,
)

API_PREFIX = "/api/v1"

JOB_KINDS = ("optimize", "event_reoptimize", "patterns")
JOB_STATES = ("queued", "running", "done", "failed", "cancelled")

_TERMINAL = ("done", "failed", "cancelled")

CONFIG_SCHEMA = {
    "employees": {"type": "integer", "min": 2, "max": 48, "default": 12},
    "weeks": {"type": "integer", "min": 1, "max": 16, "default": 8},
    "gap_target": {"type": "number", "min": 0.001, "max": 1.0, "default": 0.05},
    "time_limit": {"type": "number", "min": 1, "max": 3600, "default": 300},
    "phase1_budget": {"type": "number", "min": 1, "max": 3600, "default": 60},
    "mode": {"type": "string", "enum": ["hybrid", "milp_alone"],
             "default": "hybrid"},
    "use_relax_and_fix": {"type": "boolean", "default": True},
    "seed": {"type": "integer", "min": 0, "max": 2 ** 31 - 1, "default": 0},
    "lam": {"type": "array", "items": 3, "min": 0.0, "max": 100.0,
            "default": [1.0, 1.0, 1.0]},
    "theta": {"type": "array", "items": 3, "min": 0.0, "max": 1.0,
              "default": [0.7, 0.7, 1.0]},
    "gamma": {"type": "number", "min": 0.0, "max": 1.0, "default": 1.0},
    "mu": {"type": "number", "min": 0.0, "max": 100.0, "default": 1.0},
}


class Job:
    """In-memory handle; every state change is mirrored to disk."""

    def __init__(self, job_id: str, kind: str, config: dict, directory: Path):
        self.id = job_id
        self.kind = kind
        self.config = config
        self.directory = directory
        self.state = "queued"
        self.error: Optional[str] = None
        self.cancel_requested = threading.Event()
        self.trace_lock = threading.Lock()
        self.trace_events: list[str] = []
        self.created_at = time.time()

    def meta(self) -> dict:
        return {
            "id": self.id, "kind": self.kind, "state": self.state,
            "config": self.config, "error": self.error,
            "created_at": self.created_at,
        }

    def persist(self):
        (self.directory / "job.json").write_text(
            json.dumps(self.meta(), indent=2) + "\n")

    def append_event(self, line: str):
        with self.trace_lock:
            self.trace_events.append(line)
        with (self.directory / "trace.ndjson").open("a") as fh:
            fh.write(line + "\n")


class JobStore:
    def __init__(self, root: Path):
        self.root = root
        self.root.mkdir(parents=True, exist_ok=True)
        self.jobs: dict[str, Job] = {}
        self.lock = threading.Lock()
        self._load_existing()

    def _load_existing(self):
        for meta_path in sorted(self.root.glob("*/job.json")):
            try:
                meta = json.loads(meta_path.read_text())
            except json.JSONDecodeError:
                continue
            job = Job(meta["id"], meta["kind"], meta["config"],
                      meta_path.parent)
            job.created_at = meta.get("created_at", 0.0)
            # a process restart orphans anything that was in flight
            job.state = meta["state"] if meta["state"] in _TERMINAL else "failed"
            job.error = meta.get("error") or (
                None if meta["state"] in _TERMINAL else "interrupted by restart")
            trace = meta_path.parent / "trace.ndjson"
            if trace.exists():
                job.trace_events = trace.read_text().splitlines()
            self.jobs[job.id] = job

    def create(self, kind: str, config: dict) -> Job:
        job_id = uuid.uuid4().hex[:12]
        directory = self.root / job_id
        directory.mkdir()
        job = Job(job_id, kind, config, directory)
        with self.lock:
            self.jobs[job_id] = job
        job.persist()
        return job

    def get(self, job_id: str) -> Job:
        job = self.jobs.get(job_id)
        if job is None:
            raise HTTPException(404, f"no job {job_id}")
        return job


def _weights(config: dict) -> ObjectiveWeights:
    return ObjectiveWeights(
        lam=tuple(config.get("lam", (1.0, 1.0, 1.0))),
        theta=tuple(config.get("theta", (0.7, 0.7, 1.0))),
        gamma=float(config.get("gamma", 1.0)),
        mu=float(config.get("mu", 1.0)))


def _hybrid_config(config: dict) -> HybridConfig:
    return HybridConfig(
        gap_target=float(config.get("gap_target", 0.05)),
        phase1_time_budget=float(config.get("phase1_budget", 60.0)),
        total_time_limit=float(config.get("time_limit", 300.0)),
        use_relax_and_fix=bool(config.get("use_relax_and_fix", True)),
        mode=config.get("mode", "hybrid"),
        seed=int(config.get("seed", 0)))


def _roster_statistics(instance: RosterInstance, roster) -> list[dict]:
    W = workload_matrix(instance, roster.x)
    WG = weekend_workload_matrix(instance, roster.x)
    viol = preference_violation_matrix(instance, roster.x)
    stats = []
    for e in range(instance.n_employees):
        stated = int((instance.preferences[e] != NO_PREF).sum())
        violated = float(viol[e].sum())
        stats.append({
            "employee": e,
            "shift_counts": {instance.shift_labels[k]: W[e, k]
                             for k in range(instance.n_shift_types)},
            "weekend_counts": {instance.shift_labels[k]: WG[e, k]
                               for k in range(instance.n_shift_types)},
            "rest_days": count_rest_days(instance, roster, e),
            "preferences_stated": stated,
            "preference_satisfaction": (
                1.0 - violated / stated if stated else None),
        })
    return stats


def _run_job(job: Job):
    config = job.config
    weights = _weights(config)
    hconfig = _hybrid_config(config)

    def sink(ev):
        job.append_event(ev.to_json())

    def should_stop():
        return job.cancel_requested.is_set()

    instance = instance_from_dict(json.loads(
        (job.directory / "instance.json").read_text()))

    if job.kind == "optimize":
        result = optimize(instance, weights, hconfig, progress_sink=sink,
                          should_stop=should_stop)
        final_instance = instance
    elif job.kind == "event_reoptimize":
        changes = [
            ChangeRequest(employee=c["employee"], kind=c["kind"],
                          blocks=np.array(c["blocks"]),
                          values=np.array(c["values"]),
                          effective_from=c["effective_from"])
            for c in json.loads((job.directory / "changes.json").read_text())]
        baseline_dir = job.directory / "baseline.csv"
        baseline = import_roster_csv(instance, baseline_dir)
        result, final_instance = reoptimize_event(
            instance, baseline, changes, weights, hconfig,
            progress_sink=sink, should_stop=should_stop)
    elif job.kind == "patterns":
        pattern = load_pattern(job.directory / "pattern.txt")
        pres = optimize_with_patterns(instance, pattern, weights, hconfig,
                                      progress_sink=sink,
                                      should_stop=should_stop)
        result = pres.result
        (job.directory / "assignment.json").write_text(
            json.dumps(pres.assignment.tolist()) + "\n")
        final_instance = instance
    else:
        raise ValueError(f"unknown job kind {job.kind}")

    report = check_feasibility(final_instance, result.roster)
    summary = {
        "status": result.status,
        "objective": result.objective.as_dict(),
        "gap": result.gap,
        "lower_bound": result.lower_bound,
        "phase_timings": result.phase_timings,
        "feasible": report.feasible,
        "statistics": _roster_statistics(final_instance, result.roster),
    }
    (job.directory / "result.json").write_text(
        json.dumps(summary, indent=2) + "\n")
    buf = _io.StringIO()
    export_roster_csv(final_instance, result.roster, buf)
    (job.directory / "roster.csv").write_text(buf.getvalue())
    if final_instance is not instance:
        (job.directory / "final_instance.json").write_text(
            json.dumps(instance_to_dict(final_instance)) + "\n")


class Worker:
    """Single background thread executing jobs in FIFO order."""

    def __init__(self, store: JobStore):
        self.store = store
        self.queue: "queue.Queue[str]" = queue.Queue()
        self.thread = threading.Thread(target=self._loop, daemon=True)
        self.thread.start()

    def submit(self, job: Job):
        self.queue.put(job.id)

    def _loop(self):
        while True:
            job_id = self.queue.get()
            if job_id is None:
                return
            job = self.store.jobs.get(job_id)
            if job is None or job.state != "queued":
                continue
            if job.cancel_requested.is_set():
                job.state = "cancelled"
                job.persist()
                continue
            job.state = "running"
            job.persist()
            try:
                _run_job(job)
            except Exception as exc:  # job errors must not kill the worker
                if job.cancel_requested.is_set():
                    job.state = "cancelled"
                else:
                    job.state = "failed"
                    job.error = f"{type(exc).__name__}: {exc}"
            else:
                if job.cancel_requested.is_set():
                    job.state = "cancelled"
                else:
                    job.state = "done"
            job.persist()
            job.append_event(json.dumps({"final_state": job.state}))


def _validated_config(payload: dict) -> dict:
    config = {}
    for key, spec in CONFIG_SCHEMA.items():
        value = payload.get(key, spec["default"])
        if spec["type"] == "integer":
            if not isinstance(value, int) or isinstance(value, bool):
                raise HTTPException(422, f"{key} must be an integer")
            if not (spec["min"] <= value <= spec["max"]):
                raise HTTPException(422, f"{key} outside [{spec['min']}, {spec['max']}]")
        elif spec["type"] == "number":
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise HTTPException(422, f"{key} must be a number")
            if not (spec["min"] <= value <= spec["max"]):
                raise HTTPException(422, f"{key} outside [{spec['min']}, {spec['max']}]")
        elif spec["type"] == "boolean":
            if not isinstance(value, bool):
                raise HTTPException(422, f"{key} must be a boolean")
        elif spec["type"] == "string":
            if value not in spec["enum"]:
                raise HTTPException(422, f"{key} must be one of {spec['enum']}")
        elif spec["type"] == "array":
            if (not isinstance(value, list) or len(value) != spec["items"]
                    or not all(isinstance(v, (int, float)) for v in value)):
                raise HTTPException(422, f"{key} must be a list of {spec['items']} numbers")
            if not all(spec["min"] <= v <= spec["max"] for v in value):
                raise HTTPException(422, f"{key} entries outside [{spec['min']}, {spec['max']}]")
        config[key] = value
    return config


def create_app(data_dir: Path) -> FastAPI:
    app = FastAPI(title="rosteropt", docs_url=None, redoc_url=None)
    store = JobStore(Path(data_dir))
    worker = Worker(store)
    app.state.store = store
    app.state.worker = worker

    @app.get(API_PREFIX + "/schema")
    def get_schema():
        return {"config": CONFIG_SCHEMA, "job_kinds": list(JOB_KINDS),
                "job_states": list(JOB_STATES)}

    @app.post(API_PREFIX + "/jobs", status_code=201)
    async def create_job(request: Request):
        payload = await request.json()
        if not isinstance(payload, dict):
            raise HTTPException(422, "payload must be an object")
        config = _validated_config(payload.get("config") or {})
        instance_doc = payload.get("instance")
        if instance_doc is not None:
            try:
                instance = instance_from_dict(instance_doc)
            except ParseError as exc:
                raise HTTPException(422, f"bad instance: {exc}")
        elif payload.get("toy"):
            instance = toy_instance(config["seed"],
                                    employees=config["employees"],
                                    weeks=config["weeks"])
        else:
            instance = generate_instance(
                GeneratorConfig(employees=config["employees"],
                                weeks=config["weeks"]), config["seed"])
        report = validate_instance(instance)
        if not report.ok:
            raise HTTPException(422, f"invalid instance: {report.problems}")
        job = store.create("optimize", config)
        (job.directory / "instance.json").write_text(
            json.dumps(instance_to_dict(instance)) + "\n")
        worker.submit(job)
        return job.meta()

    @app.get(API_PREFIX + "/jobs")
    def list_jobs():
        jobs = sorted(store.jobs.values(), key=lambda j: j.created_at)
        return [j.meta() for j in jobs]

    @app.get(API_PREFIX + "/jobs/{job_id}")
    def get_job(job_id: str):
        return store.get(job_id).meta()

    @app.post(API_PREFIX + "/jobs/{job_id}/cancel")
    def cancel_job(job_id: str):
        job = store.get(job_id)
        if job.state in _TERMINAL:
            raise HTTPException(409, f"job already {job.state}")
        job.cancel_requested.set()
        if job.state == "queued":
            job.state = "cancelled"
            job.persist()
        return job.meta()

    @app.get(API_PREFIX + "/jobs/{job_id}/instance")
    def get_instance(job_id: str):
        job = store.get(job_id)
        path = job.directory / "instance.json"
        if not path.exists():
            raise HTTPException(404, "no instance stored")
        return json.loads(path.read_text())

    @app.get(API_PREFIX + "/jobs/{job_id}/progress")
    def stream_progress(job_id: str):
        job = store.get(job_id)

        def generate():
            sent = 0
            while True:
                with job.trace_lock:
                    chunk = job.trace_events[sent:]
                for line in chunk:
                    yield line + "\n"
                sent += len(chunk)
                if job.state in _TERMINAL and sent >= len(job.trace_events):
                    return
                time.sleep(0.05)

        return StreamingResponse(generate(), media_type="application/x-ndjson")

    @app.get(API_PREFIX + "/jobs/{job_id}/result")
    def get_result(job_id: str):
        job = store.get(job_id)
        if job.state == "failed":
            raise HTTPException(409, f"job failed: {job.error}")
        path = job.directory / "result.json"
        if job.state != "done" or not path.exists():
            raise HTTPException(409, f"job is {job.state}")
        return json.loads(path.read_text())

    @app.get(API_PREFIX + "/jobs/{job_id}/roster.csv")
    def get_roster(job_id: str):
        job = store.get(job_id)
        path = job.directory / "roster.csv"
        if job.state != "done" or not path.exists():
            raise HTTPException(409, f"job is {job.state}")
        return PlainTextResponse(path.read_text(), media_type="text/csv")

    @app.post(API_PREFIX + "/jobs/{job_id}/changes", status_code=201)
    async def post_changes(job_id: str, request: Request):
        parent = store.get(job_id)
        if parent.state != "done":
            raise HTTPException(409, f"parent job is {parent.state}, not done")
        payload = await request.json()
        changes = payload.get("changes")
        if not isinstance(changes, list) or not changes:
            raise HTTPException(422, "changes must be a non-empty list")
        for i, c in enumerate(changes):
            missing = {"employee", "kind", "blocks", "values",
                       "effective_from"} - set(c)
            if missing:
                raise HTTPException(422, f"change #{i} missing {sorted(missing)}")
            try:
                ChangeRequest(employee=c["employee"], kind=c["kind"],
                              blocks=np.array(c["blocks"]),
                              values=np.array(c["values"]),
                              effective_from=c["effective_from"])
            except ValueError as exc:
                raise HTTPException(422, f"change #{i}: {exc}")
        config = _validated_config(payload.get("config") or parent.config)
        job = store.create("event_reoptimize", config)
        instance_src = parent.directory / "instance.json"
        (job.directory / "instance.json").write_text(instance_src.read_text())
        (job.directory / "baseline.csv").write_text(
            (parent.directory / "roster.csv").read_text())
        (job.directory / "changes.json").write_text(json.dumps(changes) + "\n")
        worker.submit(job)
        return job.meta()

    return app
