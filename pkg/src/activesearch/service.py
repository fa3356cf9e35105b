"""HTTP labeling service: live query-label sessions over registered datasets.

A session wraps one engine instance. The loop a client drives:

    POST /sessions                     -> create (engine + hyperparams + budget)
    GET  /sessions/{id}/candidate      -> proposed point + top-k context (pure read)
    POST /sessions/{id}/labels         -> submit {index, label}, engine updates once
    GET  /sessions/{id}/metrics        -> recall curve, score histogram, latencies
    GET  /sessions/{id}                -> session summary + history

Durability is an append-only JSON-lines log (one record per session
creation and per label). On startup the log is replayed against fresh
engines, which reproduces every session's state exactly: the engines are
deterministic, so replay equals the original computation bit for bit.

Mutations to one session are serialized by a per-session lock; exactly one
submit wins per candidate, later ones get a conflict. Reads don't block.
Errors are JSON objects {code, message, field?}.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .dataset import Dataset
from .errors import SessionExhaustedError
from .las import LasEngine, scale_impact
from .params import HyperParams
from .wnas import WnasEngine

__all__ = ["create_app", "ApiError"]

SERVICE_ENGINES = {"las": LasEngine, "wnas": WnasEngine}


class ApiError(Exception):
    """Error carrying the wire shape: HTTP status plus {code, message, field?}."""

    def __init__(self, status: int, code: str, message: str, field: str | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.field = field

    def body(self) -> dict:
        out = {"code": self.code, "message": str(self)}
        if self.field is not None:
            out["field"] = self.field
        return out


@dataclass
class _Session:
    id: str
    dataset_name: str
    engine: LasEngine | WnasEngine
    budget: int
    free_label: bool
    created: float
    updated: float
    seed: int | None = None
    history: list = dc_field(default_factory=list)
    latency: list = dc_field(default_factory=list)
    lock: threading.Lock = dc_field(default_factory=threading.Lock)

    @property
    def iteration(self) -> int:
        return len(self.history)

    @property
    def recall(self) -> int:
        return sum(rec["label"] for rec in self.history)

    @property
    def exhausted(self) -> bool:
        return self.iteration >= self.budget or self.engine.labels.num_unlabeled == 0


def _require(cond: bool, field: str, message: str) -> None:
    if not cond:
        raise ApiError(422, "validation", message, field)


def _parse_hyperparams(doc) -> HyperParams:
    doc = doc or {}
    _require(isinstance(doc, dict), "hyperparams", "hyperparams must be an object")
    known = {"lambda", "w0", "pi", "alpha"}
    for key in doc:
        _require(key in known, key, f"unknown hyperparameter {key!r}")
    for key in known & doc.keys():
        _require(isinstance(doc[key], (int, float)) and not isinstance(doc[key], bool),
                 key, f"{key} must be a number")
    if "lambda" in doc:
        _require(doc["lambda"] > 0, "lambda", "lambda must be positive")
    if "w0" in doc:
        _require(doc["w0"] > 0, "w0", "w0 must be positive")
    if "pi" in doc:
        _require(0.0 <= doc["pi"] <= 1.0, "pi", "pi must be in [0, 1]")
    if "alpha" in doc:
        _require(doc["alpha"] >= 0, "alpha", "alpha must be nonnegative")
    return HyperParams(
        lam=float(doc.get("lambda", 1.0)),
        w0=float(doc.get("w0", 1.0)),
        pi=float(doc.get("pi", 0.5)),
        alpha=float(doc.get("alpha", 1e-6)),
    )


def _session_scores(sess: _Session):
    """Selection scores for the current state: f plus the weighted rescaled
    impact where the engine has one (pure read, no state change)."""
    engine = sess.engine
    f = engine.f
    im = None
    scores = f
    if engine.name == "las" and engine.h.alpha != 0.0:
        try:
            im = scale_impact(engine.impact(), f, engine.labels)
        except SessionExhaustedError:
            raise ApiError(410, "exhausted", "no unlabeled points remain")
        scores = f + engine.h.alpha * im
    return scores, f, im


def _candidate_payload(sess: _Session, d: Dataset, k: int) -> dict:
    if sess.exhausted:
        raise ApiError(410, "exhausted",
                       "session budget exhausted or no unlabeled points remain")
    scores, f, im = _session_scores(sess)
    labeled = sess.engine.labels.labeled_mask
    idx = np.flatnonzero(~labeled)
    order = idx[np.argsort(-scores[idx], kind="stable")]
    top = order[:k]
    best = int(order[0])

    def row(i: int) -> dict:
        return {
            "index": int(i),
            "id": d.ids[i],
            "meta": d.meta[i] if d.meta is not None else None,
            "f": float(f[i]),
            "im": float(im[i]) if im is not None else None,
            "score": float(scores[i]),
        }

    return {
        "candidate": row(best),
        "top_k": [row(int(i)) for i in top],
        "iteration": sess.iteration,
        "budget": sess.budget,
    }


def create_app(datasets: dict[str, Dataset], wal_path: str | Path | None = None) -> FastAPI:
    """Build the service over pre-registered datasets.

    If ``wal_path`` is given, session history is appended there as JSON
    lines and replayed at construction time, so restarting the process with
    the same path resumes every session.
    """
    app = FastAPI(title="active search labeling service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )

    sessions: dict[str, _Session] = {}
    idempotency: dict[str, str] = {}
    registry_lock = threading.Lock()
    wal_lock = threading.Lock()
    wal_file = Path(wal_path) if wal_path is not None else None

    app.state.sessions = sessions
    app.state.datasets = datasets

    def wal_append(record: dict) -> None:
        if wal_file is None:
            return
        with wal_lock:
            with open(wal_file, "a") as fh:
                fh.write(json.dumps(record) + "\n")
                fh.flush()

    def build_session(sid: str, dataset_name: str, engine_name: str, h: HyperParams,
                      budget: int, initial: dict[int, int], free_label: bool,
                      seed: int | None, created: float) -> _Session:
        d = datasets[dataset_name]
        engine = SERVICE_ENGINES[engine_name](d, initial or None, h)
        return _Session(id=sid, dataset_name=dataset_name, engine=engine,
                        budget=budget, free_label=free_label, seed=seed,
                        created=created, updated=created)

    def apply_label(sess: _Session, index: int, label: int) -> None:
        d = datasets[sess.dataset_name]
        f_at_query = float(sess.engine.f[index])
        t0 = time.perf_counter()
        sess.engine.update(index, label)
        sess.latency.append(time.perf_counter() - t0)
        sess.history.append({
            "iteration": sess.iteration + 1,
            "index": index,
            "id": d.ids[index],
            "label": label,
            "f_at_query": f_at_query,
        })
        sess.updated = time.time()

    def replay() -> None:
        if wal_file is None or not wal_file.exists():
            return
        with open(wal_file) as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                if rec["type"] == "create":
                    sess = build_session(
                        sid=rec["session"], dataset_name=rec["dataset"],
                        engine_name=rec["engine"],
                        h=HyperParams.from_dict(rec["h"]),
                        budget=rec["budget"],
                        initial={int(i): int(y) for i, y in rec["initial"].items()},
                        free_label=rec["free_label"], seed=rec.get("seed"),
                        created=rec["created"],
                    )
                    sessions[sess.id] = sess
                    if rec.get("idempotency_key"):
                        idempotency[rec["idempotency_key"]] = sess.id
                elif rec["type"] == "label":
                    apply_label(sessions[rec["session"]], int(rec["index"]),
                                int(rec["label"]))
                else:
                    raise ValueError(f"unknown record type {rec['type']!r} "
                                     f"at line {line_no} of {wal_file}")

    replay()

    @app.exception_handler(ApiError)
    def handle_api_error(_req: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body())

    def get_session(sid: str) -> _Session:
        sess = sessions.get(sid)
        if sess is None:
            raise ApiError(404, "unknown_session", f"no session {sid!r}")
        return sess

    @app.get("/datasets")
    def list_datasets():
        out = []
        for name, d in datasets.items():
            out.append({
                "name": name, "n": d.n, "r": d.r,
                "prevalence": d.prevalence if d.labels is not None else None,
                "has_labels": d.labels is not None,
            })
        return {"datasets": out}

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        try:
            body = await request.json()
        except Exception:
            raise ApiError(422, "validation", "request body must be JSON")
        _require(isinstance(body, dict), "body", "request body must be a JSON object")

        name = body.get("dataset")
        _require(isinstance(name, str) and name != "", "dataset", "dataset is required")
        if name not in datasets:
            raise ApiError(404, "unknown_dataset", f"no dataset {name!r}", "dataset")
        d = datasets[name]

        engine_name = body.get("engine", "las")
        _require(engine_name in SERVICE_ENGINES, "engine",
                 f"engine must be one of {sorted(SERVICE_ENGINES)}")
        h = _parse_hyperparams(body.get("hyperparams"))

        budget = body.get("budget", 50)
        _require(isinstance(budget, int) and not isinstance(budget, bool) and budget >= 1,
                 "budget", "budget must be a positive integer")

        seed = body.get("seed")
        if seed is not None:
            _require(isinstance(seed, int) and not isinstance(seed, bool),
                     "seed", "seed must be an integer")

        free_label = body.get("free_label", False)
        _require(isinstance(free_label, bool), "free_label", "free_label must be a boolean")

        raw_initial = body.get("initial_labels") or {}
        _require(isinstance(raw_initial, dict), "initial_labels",
                 "initial_labels must map point index to 0/1")
        initial: dict[int, int] = {}
        for key, value in raw_initial.items():
            try:
                idx = int(key)
            except (TypeError, ValueError):
                raise ApiError(422, "validation", f"bad point index {key!r}",
                               "initial_labels")
            _require(0 <= idx < d.n, "initial_labels", f"point index {idx} out of range")
            _require(value in (0, 1), "initial_labels", f"label for {idx} must be 0 or 1")
            initial[idx] = int(value)

        key = body.get("idempotency_key")
        if key is not None:
            _require(isinstance(key, str), "idempotency_key",
                     "idempotency_key must be a string")

        with registry_lock:
            if key is not None and key in idempotency:
                sid = idempotency[key]
                return {"session": sid, "existing": True}
            sid = uuid.uuid4().hex
            sess = build_session(sid, name, engine_name, h, budget, initial,
                                 free_label, seed, created=time.time())
            sessions[sid] = sess
            if key is not None:
                idempotency[key] = sid
        wal_append({
            "type": "create", "session": sid, "dataset": name,
            "engine": engine_name, "h": h.to_dict(), "budget": budget,
            "initial": {str(i): y for i, y in initial.items()},
            "free_label": free_label, "seed": seed,
            "idempotency_key": key, "created": sess.created,
        })
        return {"session": sid, "existing": False}

    @app.get("/sessions/{sid}/candidate")
    def get_candidate(sid: str, k: int = 10):
        sess = get_session(sid)
        return _candidate_payload(sess, datasets[sess.dataset_name], max(1, min(k, 100)))

    @app.post("/sessions/{sid}/labels")
    async def submit_label(sid: str, request: Request):
        sess = get_session(sid)
        try:
            body = await request.json()
        except Exception:
            raise ApiError(422, "validation", "request body must be JSON")
        _require(isinstance(body, dict), "body", "request body must be a JSON object")

        d = datasets[sess.dataset_name]
        index = body.get("index")
        if index is None and "id" in body:
            try:
                index = d.ids.index(body["id"])
            except ValueError:
                raise ApiError(404, "unknown_point", f"no point with id {body['id']!r}",
                               "id")
        _require(isinstance(index, int) and not isinstance(index, bool),
                 "index", "index must be an integer")
        _require(0 <= index < d.n, "index", f"index {index} out of range")
        label = body.get("label")
        _require(label in (0, 1), "label", "label must be 0 or 1")

        with sess.lock:
            if sess.exhausted:
                raise ApiError(410, "exhausted",
                               "session budget exhausted or no unlabeled points remain")
            if sess.engine.labels.is_labeled(index):
                raise ApiError(409, "conflict", f"point {index} is already labeled")
            if not sess.free_label:
                scores, _, _ = _session_scores(sess)
                masked = np.where(sess.engine.labels.labeled_mask, -np.inf, scores)
                current = int(np.argmax(masked))
                if index != current:
                    raise ApiError(
                        409, "not_candidate",
                        f"point {index} is not the current candidate ({current}); "
                        "create the session with free_label to label arbitrary points",
                        "index")
            apply_label(sess, index, int(label))
            wal_append({"type": "label", "session": sid, "index": index,
                        "label": int(label), "ts": sess.updated})
            next_candidate = None
            if not sess.exhausted:
                scores, _, _ = _session_scores(sess)
                masked = np.where(sess.engine.labels.labeled_mask, -np.inf, scores)
                next_candidate = int(np.argmax(masked))
        return {
            "iteration": sess.iteration,
            "recall": sess.recall,
            "next_candidate": next_candidate,
            "exhausted": sess.exhausted,
        }

    @app.get("/sessions/{sid}/metrics")
    def get_metrics(sid: str):
        sess = get_session(sid)
        d = datasets[sess.dataset_name]
        t = sess.iteration
        recall = np.cumsum([rec["label"] for rec in sess.history]).tolist() if t else []
        t_axis = np.arange(1, t + 1)
        if d.labels is not None:
            total_pos = int(d.labels.sum())
            prevalence = d.prevalence
            ideal = np.minimum(t_axis, total_pos).tolist()
        else:
            prevalence = sess.engine.h.pi
            ideal = t_axis.tolist()
        f = sess.engine.f
        lo, hi = float(f.min()), float(f.max())
        if hi - lo <= 20 * np.spacing(max(abs(lo), abs(hi), 1.0)):
            # effectively constant scores: pad so the bins stay finite
            lo, hi = lo - 0.5, hi + 0.5
        counts, edges = np.histogram(f, bins=20, range=(lo, hi))
        return {
            "iteration": t,
            "budget": sess.budget,
            "recall": recall,
            "ideal": ideal,
            "random_expect": (t_axis * prevalence).tolist(),
            "latency_seconds": list(sess.latency),
            "f_summary": {
                "min": float(f.min()), "max": float(f.max()), "mean": float(f.mean()),
                "histogram": {"edges": edges.tolist(), "counts": counts.tolist()},
            },
            "exhausted": sess.exhausted,
        }

    @app.get("/sessions/{sid}")
    def get_session_summary(sid: str):
        sess = get_session(sid)
        return {
            "session": sess.id,
            "dataset": sess.dataset_name,
            "engine": sess.engine.name,
            "hyperparams": sess.engine.h.to_dict(),
            "budget": sess.budget,
            "iteration": sess.iteration,
            "recall": sess.recall,
            "free_label": sess.free_label,
            "seed": sess.seed,
            "created": sess.created,
            "updated": sess.updated,
            "exhausted": sess.exhausted,
            "n": datasets[sess.dataset_name].n,
            "history": list(sess.history),
        }

    return app
