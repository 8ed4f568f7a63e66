"""HTTP/JSON API over the engine.

All endpoints are stateless apart from the on-disk dataset/session store and
the in-memory job registry. Request-shape problems return 400 with a
machine-readable code; engine computation errors return 422 with the engine
message; unknown ids return 404. Grid searches run as background jobs polled
by id, with monotone progress and at most one active job per session.
"""

from __future__ import annotations

import os
import threading
import uuid
from dataclasses import dataclass, replace
from hashlib import sha256
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .codec import (canonical_json_bytes, dataset_from_wire, dataset_to_wire,
                    decimate_coords, encode_floats, grid_to_wire,
                    params_from_wire, params_to_wire, record_to_wire,
                    scores_to_wire, selection_from_wire)
from .dataset import Dataset, ingest_csv
from .errors import (ComputationError, NotFoundError, SearchError,
                     TsneLensError, ValidationError)
from .interpret import (Polyline, adaptive_axes, default_rho,
                        dimension_correlation, project_to_polyline)
from .quality import (DEFAULT_K, compute_quality_scores,
                      density_cost_histograms, neighborhood_preservation,
                      shepard_heatmap, shepard_pairs)
from .search import (DEFAULT_TOP, GridSpec, ProjectionRecord, default_grid,
                     rank_representatives, run_grid_search,
                     select_representatives)
from .sessions import (Annotation, MigrationError, SessionStore, load_session,
                       new_session_id, save_session)
from .tsne import pairwise_distances, run_tsne

DATA_DIR_ENV = "TSNELENS_DATA_DIR"
ADDR_ENV = "TSNELENS_ADDR"
NP_VARIANTS = ("bar", "diff-bar", "line", "diff-line")


# ----------------------------------------------------------------- registry

@dataclass
class Job:
    id: str
    session_id: str
    status: str = "running"  # running | done | failed
    completed: int = 0
    total: int = 1
    error: str | None = None
    result: dict | None = None

    def snapshot(self) -> dict:
        return {"id": self.id, "session_id": self.session_id, "status": self.status,
                "progress": self.completed / self.total if self.total else 1.0,
                "error": self.error, "result": self.result}


class EngineStore:
    """Datasets, sessions, distance caches and the job registry."""

    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        (self.data_dir / "datasets").mkdir(parents=True, exist_ok=True)
        (self.data_dir / "sessions").mkdir(parents=True, exist_ok=True)
        self._datasets: dict[str, Dataset] = {}
        self._sessions: dict[str, SessionStore] = {}
        self._hd_dists: dict[str, np.ndarray] = {}
        self._session_locks: dict[str, threading.Lock] = {}
        self._jobs: dict[str, Job] = {}
        self._active_jobs: dict[str, str] = {}
        self._lock = threading.Lock()

    # -- datasets

    def add_dataset(self, ds: Dataset) -> str:
        wire = dataset_to_wire(ds)
        did = "d" + sha256(canonical_json_bytes(wire)).hexdigest()[:16]
        path = self.data_dir / "datasets" / f"{did}.json"
        if not path.exists():
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(canonical_json_bytes(wire))
            tmp.replace(path)
        with self._lock:
            self._datasets[did] = ds
        return did

    def dataset(self, did: str) -> Dataset:
        with self._lock:
            if did in self._datasets:
                return self._datasets[did]
        path = self.data_dir / "datasets" / f"{did}.json"
        if not path.exists():
            raise NotFoundError(f"dataset {did!r} not found")
        import json
        ds = dataset_from_wire(json.loads(path.read_bytes()))
        with self._lock:
            self._datasets[did] = ds
        return ds

    def hd_dists(self, did: str) -> np.ndarray:
        with self._lock:
            cached = self._hd_dists.get(did)
        if cached is not None:
            return cached
        dists = pairwise_distances(self.dataset(did))
        with self._lock:
            self._hd_dists[did] = dists
        return dists

    # -- sessions

    def _session_lock(self, sid: str) -> threading.Lock:
        with self._lock:
            return self._session_locks.setdefault(sid, threading.Lock())

    def create_session(self, dataset_id: str) -> SessionStore:
        self.dataset(dataset_id)  # must resolve
        store = SessionStore(session_id=new_session_id(), dataset_id=dataset_id)
        with self._session_lock(store.session_id):
            save_session(store, self.data_dir)
            with self._lock:
                self._sessions[store.session_id] = store
        return store

    def session(self, sid: str) -> SessionStore:
        with self._lock:
            if sid in self._sessions:
                return self._sessions[sid]
        store = load_session(sid, self.data_dir)
        with self._lock:
            self._sessions[sid] = store
        return store

    def update_session(self, sid: str, mutate) -> SessionStore:
        """Apply mutate(store) -> store under the per-session write lock."""
        with self._session_lock(sid):
            store = mutate(self.session(sid))
            save_session(store, self.data_dir)
            with self._lock:
                self._sessions[sid] = store
        return store

    # -- projections

    def projection(self, pid: str) -> tuple[SessionStore, ProjectionRecord]:
        sid, _, rid = pid.partition(":")
        if not rid:
            raise NotFoundError(f"malformed projection id {pid!r}")
        store = self.session(sid)
        for rec in store.representatives:
            if str(rec.id) == rid and not rec.failed:
                return store, rec
        raise NotFoundError(f"projection {pid!r} not found")

    # -- jobs

    def start_job(self, sid: str, total: int) -> Job:
        with self._lock:
            active = self._active_jobs.get(sid)
            if active is not None and self._jobs[active].status == "running":
                raise JobConflict(f"session {sid} already has an active grid-search job")
            job = Job(id=uuid.uuid4().hex, session_id=sid, total=total)
            self._jobs[job.id] = job
            self._active_jobs[sid] = job.id
        return job

    def job(self, jid: str) -> Job:
        with self._lock:
            if jid not in self._jobs:
                raise NotFoundError(f"job {jid!r} not found")
            return self._jobs[jid]


class JobConflict(TsneLensError):
    pass


# ----------------------------------------------------------------- requests

class SessionRequest(BaseModel):
    dataset_id: str


class GridBody(BaseModel):
    perplexities: list[float] | None = None
    learning_rates: list[float] | None = None
    iteration_counts: list[int] | None = None
    seed_base: int = 0


class GridSearchRequest(BaseModel):
    grid: GridBody | None = None
    parallelism: int = 1
    representatives: int = 25
    k: int = DEFAULT_K


class ParamsBody(BaseModel):
    perplexity: float = 30.0
    learning_rate: float = 200.0
    max_iterations: int = 1000
    theta: float = 0.0
    seed: int = 0


class RunRequest(BaseModel):
    dataset_id: str | None = None
    session_id: str | None = None
    params: ParamsBody = ParamsBody()


class RankRequest(BaseModel):
    metric: str = "qma"
    selection: list[int] | None = None
    top: int = DEFAULT_TOP


class NPRequest(BaseModel):
    selection: list[int] | None = None
    k_max: int | None = None
    variant: str = "bar"


class DimCorrRequest(BaseModel):
    polyline: list[list[float]]
    rho: float | None = None
    threshold: float | None = None


class AxesRequest(BaseModel):
    selection: list[int]


class AnnotationRequest(BaseModel):
    author: str = "anonymous"
    text: str
    selection: list[int] | None = None


# ---------------------------------------------------------------- factories

def _record_summary(store: SessionStore, rec: ProjectionRecord) -> dict:
    return {
        "projection_id": f"{store.session_id}:{rec.id}",
        "record_id": rec.id,
        "params": params_to_wire(rec.params),
        "scores": scores_to_wire(rec.scores) if rec.scores else None,
        "preview": decimate_coords(rec.embedding.coords),
    }


def create_app(data_dir=None, static_dir=None) -> FastAPI:
    data_dir = Path(data_dir or os.environ.get(DATA_DIR_ENV, "tsnelens-data"))
    store = EngineStore(data_dir)
    app = FastAPI(title="tsnelens", version="0.1.0")
    app.state.store = store

    # -- error mapping

    def _payload(code, exc):
        return {"code": code, "message": str(exc)}

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc):
        return JSONResponse(status_code=400, content=_payload("validation_error", exc))

    @app.exception_handler(MigrationError)
    async def _migration(request: Request, exc):
        return JSONResponse(status_code=400, content=_payload("migration_required", exc))

    @app.exception_handler(ValidationError)
    async def _invalid(request: Request, exc):
        return JSONResponse(status_code=400, content=_payload("validation_error", exc))

    @app.exception_handler(NotFoundError)
    async def _missing(request: Request, exc):
        return JSONResponse(status_code=404, content=_payload("not_found", exc))

    @app.exception_handler(ComputationError)
    async def _uncomputable(request: Request, exc):
        return JSONResponse(status_code=422, content=_payload("computation_error", exc))

    @app.exception_handler(SearchError)
    async def _search_failed(request: Request, exc):
        return JSONResponse(status_code=422, content=_payload("search_failed", exc))

    @app.exception_handler(JobConflict)
    async def _conflict(request: Request, exc):
        return JSONResponse(status_code=409, content=_payload("job_conflict", exc))

    # -- meta

    @app.get("/health")
    def health():
        return {"service": "tsnelens", "version": app.version}

    # -- datasets

    @app.post("/datasets")
    async def post_dataset(request: Request, label_column: str | None = None):
        body = await request.body()
        ds = ingest_csv(body, label_column=label_column)
        did = store.add_dataset(ds)
        return {"dataset_id": did, "n": ds.n, "d": ds.d,
                "dim_names": list(ds.dim_names),
                "has_labels": ds.labels is not None}

    @app.get("/datasets/{did}")
    def get_dataset(did: str):
        ds = store.dataset(did)
        wire = dataset_to_wire(ds)
        wire["dataset_id"] = did
        return wire

    # -- sessions

    @app.post("/sessions")
    def post_session(req: SessionRequest):
        s = store.create_session(req.dataset_id)
        return {"session_id": s.session_id, "dataset_id": s.dataset_id}

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        s = store.session(sid)
        return {
            "session_id": s.session_id,
            "dataset_id": s.dataset_id,
            "grid": grid_to_wire(s.grid) if s.grid else None,
            "representative_ids": [f"{sid}:{r.id}" for r in s.representatives],
            "chosen_projection_id": s.chosen_projection_id,
            "annotations": [
                {"timestamp": a.timestamp, "author": a.author, "text": a.text,
                 "selection": list(a.selection.indices) if a.selection else None}
                for a in s.annotations
            ],
        }

    # -- grid search job

    @app.post("/sessions/{sid}/grid-search")
    def post_grid_search(sid: str, req: GridSearchRequest):
        session = store.session(sid)
        dataset = store.dataset(session.dataset_id)
        if req.grid is None:
            grid = default_grid(dataset.n)
        else:
            base = default_grid(dataset.n)
            grid = GridSpec(
                perplexities=tuple(req.grid.perplexities or base.perplexities),
                learning_rates=tuple(req.grid.learning_rates or base.learning_rates),
                iteration_counts=tuple(req.grid.iteration_counts or base.iteration_counts),
                seed_base=req.grid.seed_base,
            )
        job = store.start_job(sid, total=grid.size)

        def work():
            try:
                def progress(done, total):
                    job.completed = done  # single writer: monotone

                pool = run_grid_search(dataset, grid, parallelism=req.parallelism,
                                       k=req.k, progress=progress)
                reps = select_representatives(pool, k=req.representatives)
                by_id = {r.id: r for r in pool}
                ordered = tuple(by_id[rid] for rid in reps.medoid_ids)

                def attach(s: SessionStore) -> SessionStore:
                    return replace(s, grid=grid, representatives=ordered)

                store.update_session(sid, attach)
                job.result = {
                    "representative_ids": [f"{sid}:{rid}" for rid in reps.medoid_ids],
                    "pool_size": len(pool),
                    "failed_runs": sum(r.failed for r in pool),
                    "cluster_assignment": {str(k): v for k, v in
                                           reps.cluster_assignment.items()},
                }
                job.status = "done"
            except Exception as exc:  # noqa: BLE001 - job must record its failure
                job.error = str(exc)
                job.status = "failed"

        threading.Thread(target=work, daemon=True).start()
        return JSONResponse(status_code=202, content={"job_id": job.id})

    @app.get("/jobs/{jid}")
    def get_job(jid: str):
        return store.job(jid).snapshot()

    # -- representatives

    @app.get("/sessions/{sid}/representatives")
    def get_representatives(sid: str, metric: str = "qma", top: int | None = Query(None)):
        s = store.session(sid)
        records = [r for r in s.representatives if not r.failed]
        limit = top if top is not None else len(records)
        ids = rank_representatives(records, metric, top=limit)
        by_id = {r.id: r for r in records}
        return {"session_id": sid, "metric": metric.lower(),
                "representatives": [_record_summary(s, by_id[rid]) for rid in ids]}

    @app.post("/sessions/{sid}/representatives/rank")
    def post_rank(sid: str, req: RankRequest):
        s = store.session(sid)
        dataset = store.dataset(s.dataset_id)
        records = [r for r in s.representatives if not r.failed]
        selection = selection_from_wire(req.selection)
        ids = rank_representatives(records, req.metric, selection=selection,
                                   top=req.top, dataset=dataset)
        scores = None
        if selection is not None:
            from .quality import selection_quality
            by_id = {r.id: r for r in records}
            scores = [selection_quality(dataset, by_id[rid].embedding, selection,
                                        req.metric) for rid in ids]
        else:
            by_id = {r.id: r for r in records}
            scores = [by_id[rid].scores.get(req.metric) for rid in ids]
        return {"session_id": sid, "metric": req.metric.lower(),
                "ids": [f"{sid}:{rid}" for rid in ids], "scores": scores}

    # -- single runs

    @app.post("/runs")
    def post_run(req: RunRequest):
        if req.session_id is not None:
            session = store.session(req.session_id)
            dataset_id = session.dataset_id
        elif req.dataset_id is not None:
            dataset_id = req.dataset_id
            session = store.create_session(dataset_id)
        else:
            raise ValidationError("provide dataset_id or session_id")
        dataset = store.dataset(dataset_id)
        params = params_from_wire(req.params.model_dump())
        embedding, instr = run_tsne(dataset, params)
        scores = compute_quality_scores(dataset, embedding,
                                        hd_dists=store.hd_dists(dataset_id))
        sid = session.session_id

        def attach(s: SessionStore) -> SessionStore:
            rid = max((r.id for r in s.representatives), default=-1) + 1
            rec = ProjectionRecord(id=rid, params=params, embedding=embedding,
                                   instrumentation=instr, scores=scores)
            return replace(s, representatives=s.representatives + (rec,),
                           chosen_projection_id=f"{s.session_id}:{rid}")

        updated = store.update_session(sid, attach)
        pid = updated.chosen_projection_id
        return {"projection_id": pid, "session_id": sid,
                "scores": scores_to_wire(scores)}

    # -- projections

    @app.get("/projections/{pid}")
    def get_projection(pid: str):
        s, rec = store.projection(pid)
        wire = record_to_wire(rec)
        wire["projection_id"] = pid
        wire["session_id"] = s.session_id
        wire["instrumentation"]["density"] = encode_floats(rec.instrumentation.density)
        return wire

    @app.get("/projections/{pid}/shepard")
    def get_shepard(pid: str, bins: int = 10, mode: str = "heatmap",
                    cap: int = 5000, seed: int = 0):
        s, rec = store.projection(pid)
        hd = store.hd_dists(s.dataset_id)
        from .quality import embedding_distances
        ld = embedding_distances(rec.embedding)
        if mode == "heatmap":
            hm = shepard_heatmap(hd, ld, bins=bins)
            return {"projection_id": pid, "mode": mode, "bins": hm.bins,
                    "counts": hm.counts.tolist()}
        if mode == "pairs":
            pairs = shepard_pairs(hd, ld, cap=cap, seed=seed)
            return {"projection_id": pid, "mode": mode,
                    "pairs": [[float(x), float(y)] for x, y in pairs]}
        raise ValidationError(f"unknown shepard mode {mode!r}")

    @app.post("/projections/{pid}/np")
    def post_np(pid: str, req: NPRequest):
        if req.variant not in NP_VARIANTS:
            raise ValidationError(f"unknown NP variant {req.variant!r}")
        s, rec = store.projection(pid)
        hd = store.hd_dists(s.dataset_id)
        from .quality import embedding_distances
        ld = embedding_distances(rec.embedding)
        selection = selection_from_wire(req.selection)
        curve = neighborhood_preservation(hd, ld, selection=selection, k_max=req.k_max)
        out = {"projection_id": pid, "variant": req.variant,
               "k_values": curve.k_values.tolist(),
               "global": curve.global_np.tolist(),
               "selection": None, "diff": None}
        if curve.selection_np is not None:
            out["selection"] = curve.selection_np.tolist()
            out["diff"] = (curve.selection_np - curve.global_np).tolist()
        return out

    @app.post("/projections/{pid}/dimension-correlation")
    def post_dimension_correlation(pid: str, req: DimCorrRequest):
        s, rec = store.projection(pid)
        dataset = store.dataset(s.dataset_id)
        rho = req.rho if req.rho is not None else default_rho(rec.embedding)
        polyline = Polyline(vertices=np.asarray(req.polyline, dtype=float), rho=rho)
        projection = project_to_polyline(rec.embedding, polyline)
        corr = dimension_correlation(dataset, projection, threshold=req.threshold)
        return {"projection_id": pid, "rho": rho,
                "captured": [int(i) for i in projection.point_indices],
                "dimensions": [
                    {"index": i, "name": nm, "rho": c}
                    for i, nm, c in zip(corr.dim_indices, corr.dim_names, corr.coefficients)
                ]}

    @app.post("/projections/{pid}/adaptive-axes")
    def post_adaptive_axes(pid: str, req: AxesRequest):
        s, _rec = store.projection(pid)
        dataset = store.dataset(s.dataset_id)
        selection = selection_from_wire(req.selection)
        if selection is None:
            raise ValidationError("selection must not be empty")
        axes = adaptive_axes(dataset, selection)
        return {"projection_id": pid,
                "axes": [{"index": i, "name": nm, "weight": w}
                         for i, nm, w in zip(axes.dim_indices, axes.dim_names, axes.weights)]}

    @app.get("/projections/{pid}/histograms")
    def get_histograms(pid: str, bins: int = 20):
        _s, rec = store.projection(pid)
        dens, cost = density_cost_histograms(rec.instrumentation, bins=bins)
        return {"projection_id": pid,
                "density": {"edges": dens.edges.tolist(), "counts": dens.counts.tolist()},
                "cost": {"edges": cost.edges.tolist(), "counts": cost.counts.tolist()}}

    # -- annotations

    @app.post("/sessions/{sid}/annotations")
    def post_annotation(sid: str, req: AnnotationRequest):
        ann = Annotation.now(author=req.author, text=req.text,
                             selection=selection_from_wire(req.selection))
        updated = store.update_session(sid, lambda s: s.with_annotation(ann))
        return {"session_id": sid, "count": len(updated.annotations),
                "annotation": {"timestamp": ann.timestamp, "author": ann.author,
                               "text": ann.text,
                               "selection": list(ann.selection.indices) if ann.selection else None}}

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def main(host: str = "127.0.0.1", port: int = 8000, data_dir=None, static_dir=None):
    import uvicorn
    uvicorn.run(create_app(data_dir=data_dir, static_dir=static_dir),
                host=host, port=port, log_level="info")
