"""HTTP session API for human-in-the-loop rule ranking.

Each session runs the learning loop on a background thread; the thread
blocks on a :class:`HumanBridge` whenever it needs an answer, and the HTTP
handlers feed answers in and read session state out. Sessions are persisted
event-sourced: config + answered-query log on disk, centers recomputed on
restart, half-finished sessions resumed where they stopped.
"""

from __future__ import annotations

import dataclasses
import json
import threading
import time
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from fastapi import Body, FastAPI, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .choquet import SubsetIndex, augment_matrix, preference_constraint
from .corpus import Rule, TransactionDatabase
from .learner import (
    STATUS_INDIFFERENT,
    IterationRecord,
    SessionConfig,
    SessionResult,
    read_session_log,
    run_gbs,
)
from .measures import MeasureKind, feature_matrix_from_raw, read_rules_csv
from .oracles import AnswerRejected, BridgeClosed, HumanBridge, HumanOracle, VALID_ANSWERS
from .versionspace import add_preference, chebyshev_center, init_version_space, minkowski_center

STATE_SELECTING = "selecting"
STATE_AWAITING = "awaiting_answer"
STATE_FINISHED = "finished"
STATE_FAILED = "failed"

_CREATE_TIMEOUT_S = 60.0
_ANSWER_TIMEOUT_S = 120.0


@dataclass
class RulesetBundle:
    """Rules plus their raw and normalized feature columns, deduplicated."""

    rules: list[Rule]
    kinds: tuple[MeasureKind, ...]
    raw: np.ndarray
    features: np.ndarray
    db: TransactionDatabase | None = None

    @property
    def n_rules(self) -> int:
        return len(self.rules)


def load_ruleset(rules_csv: str | Path, db: TransactionDatabase | None = None) -> RulesetBundle:
    """Read a rule-feature CSV and prepare deduplicated normalized features."""
    rules, raw, kinds = read_rules_csv(rules_csv)
    fm = feature_matrix_from_raw(raw, kinds)
    kept_rules = [rules[i] for i in fm.kept]
    return RulesetBundle(
        rules=kept_rules, kinds=tuple(kinds), raw=raw[fm.kept], features=fm.norm, db=db
    )


class _Session:
    def __init__(
        self,
        session_id: str,
        cfg: SessionConfig,
        bundle: RulesetBundle,
        log_path: Path | None,
        meta_path: Path | None,
    ):
        self.id = session_id
        self.cfg = cfg
        self.bundle = bundle
        self.log_path = log_path
        self.meta_path = meta_path
        self.cond = threading.Condition()
        self.bridge = HumanBridge()
        self.thread: threading.Thread | None = None
        self.records: list[IterationRecord] = []
        self.pending: dict | None = None  # {"iteration", "pair", "r_max"}
        self.center_point: np.ndarray | None = None
        self.state = STATE_SELECTING
        self.status: str | None = None
        self.error: str | None = None
        self.result: SessionResult | None = None
        index = SubsetIndex(bundle.features.shape[1], cfg.k)
        self.psi = augment_matrix(bundle.features, index)

    # -- callbacks running on the learner thread ---------------------------

    def _on_select(self, iteration: int, pair: tuple[int, int], center) -> None:
        with self.cond:
            self.center_point = np.asarray(center.point, dtype=float)
            self.pending = {
                "iteration": iteration,
                "pair": [int(pair[0]), int(pair[1])],
                "r_max": float(center.radius),
            }
            self.state = STATE_AWAITING
            self.cond.notify_all()

    def _on_record(self, record: IterationRecord) -> None:
        with self.cond:
            self.records.append(record)
            self.pending = None
            self.state = STATE_SELECTING
            self.cond.notify_all()
        if self.log_path is not None:
            with open(self.log_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record.to_json_dict()) + "\n")

    def _finish(self, result: SessionResult | None, error: str | None) -> None:
        with self.cond:
            if result is not None:
                self.result = result
                self.status = result.status
                self.center_point = result.capacity.coeffs
                self.state = STATE_FINISHED
            else:
                self.error = error
                self.state = STATE_FAILED
            self.pending = None
            # Flush the sidecar before any waiter can observe the terminal
            # state, so "finished over HTTP" implies "finished on disk".
            self._write_meta()
            self.cond.notify_all()
        self.bridge.close()

    def _write_meta(self) -> None:
        if self.meta_path is None:
            return
        meta = {
            "id": self.id,
            "config": dataclasses.asdict(self.cfg),
            "state": self.state,
            "status": self.status,
            "n_records": len(self.records),
        }
        self.meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")

    # -- learner thread ----------------------------------------------------

    def start(self, start_iteration: int = 1, initial_constraints=None, asked=None) -> None:
        oracle = HumanOracle(self.bridge, self.bundle.rules, start_iteration=start_iteration)
        remaining = self.cfg.max_iterations - (start_iteration - 1)
        cfg = dataclasses.replace(self.cfg, max_iterations=remaining)

        def target():
            try:
                result = run_gbs(
                    self.bundle.rules,
                    self.bundle.features,
                    oracle,
                    cfg,
                    initial_constraints=initial_constraints,
                    on_select=self._on_select,
                    on_record=self._on_record,
                    start_iteration=start_iteration,
                    asked=asked,
                )
                self._finish(result, None)
            except BridgeClosed:
                self._finish(None, "session cancelled")
            except Exception as exc:  # surfaced via the API, not lost in a thread
                self._finish(None, f"{type(exc).__name__}: {exc}")

        self._write_meta()
        self.thread = threading.Thread(target=target, name=f"session-{self.id}", daemon=True)
        self.thread.start()

    # -- request-side helpers ----------------------------------------------

    def wait_first_query(self, timeout: float) -> None:
        with self.cond:
            self.cond.wait_for(
                lambda: self.pending is not None or self.state in (STATE_FINISHED, STATE_FAILED),
                timeout=timeout,
            )

    def submit(self, iteration: int, value: int) -> None:
        """Hand one answer to the learner thread; exactly one wins per iteration."""
        with self.cond:
            if self.state in (STATE_FINISHED, STATE_FAILED):
                raise AnswerRejected("session is not accepting answers")
            if self.pending is None or self.pending["iteration"] != iteration:
                raise AnswerRejected("iteration does not match the pending query")
        deadline = time.monotonic() + 2.0
        while True:
            try:
                self.bridge.submit_answer(iteration, value)
                return
            except AnswerRejected:
                # The learner announces the query slightly before it starts
                # listening; retry briefly to close that gap, then give up.
                if self.bridge.pending is None and time.monotonic() < deadline:
                    with self.cond:
                        still_pending = (
                            self.pending is not None
                            and self.pending["iteration"] == iteration
                        )
                    if still_pending:
                        time.sleep(0.005)
                        continue
                raise

    def wait_progress(self, answered_iteration: int, timeout: float) -> None:
        def advanced():
            if self.state in (STATE_FINISHED, STATE_FAILED):
                return True
            return self.pending is not None and self.pending["iteration"] > answered_iteration

        with self.cond:
            self.cond.wait_for(advanced, timeout=timeout)

    def snapshot(self) -> dict:
        with self.cond:
            return {
                "state": self.state,
                "status": self.status,
                "error": self.error,
                "pending": dict(self.pending) if self.pending else None,
                "n_answers": len(self.records),
                "center": None if self.center_point is None else self.center_point.copy(),
            }


def _ranking_ids(psi: np.ndarray, center: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    scores = psi @ center
    order = np.argsort(-scores, kind="stable")  # stable: ties keep lower id first
    return order, scores


def create_app(
    bundle: RulesetBundle,
    ruleset_id: str = "default",
    log_dir: str | Path | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="rulerank service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    log_root = Path(log_dir) if log_dir is not None else None
    if log_root is not None:
        log_root.mkdir(parents=True, exist_ok=True)

    sessions: dict[str, _Session] = {}
    store_lock = threading.Lock()
    app.state.sessions = sessions
    app.state.bundle = bundle

    def _error(code: int, detail: str) -> JSONResponse:
        return JSONResponse(status_code=code, content={"detail": detail})

    def _rule_payload(rid: int, score: float | None = None) -> dict:
        rule = bundle.rules[rid]
        counts = rule.counts
        payload = {
            "rule_id": int(rid),
            "antecedent": list(rule.antecedent),
            "consequent": list(rule.consequent),
            "counts": {
                "n": counts.n, "n_x": counts.n_x, "n_y": counts.n_y, "n_xy": counts.n_xy,
            },
            "measures": {
                kind.value: float(bundle.raw[rid, i]) for i, kind in enumerate(bundle.kinds)
            },
            "measures_norm": {
                kind.value: float(bundle.features[rid, i]) for i, kind in enumerate(bundle.kinds)
            },
        }
        if score is not None:
            payload["score"] = float(score)
        return payload

    def _query_payload(pending: dict) -> dict:
        i, j = pending["pair"]
        return {
            "iteration": pending["iteration"],
            "r_max": pending["r_max"],
            "pair": [i, j],
            "rules": [_rule_payload(i), _rule_payload(j)],
        }

    def _session_view(session: _Session) -> dict:
        snap = session.snapshot()
        view = {
            "id": session.id,
            "ruleset": ruleset_id,
            "state": snap["state"],
            "status": snap["status"],
            "error": snap["error"],
            "n_answers": snap["n_answers"],
            "config": dataclasses.asdict(session.cfg),
            "query": _query_payload(snap["pending"]) if snap["pending"] else None,
        }
        if snap["pending"]:
            view["iteration"] = snap["pending"]["iteration"]
            view["r_max"] = snap["pending"]["r_max"]
        return view

    def _parse_config(payload: dict) -> SessionConfig:
        return SessionConfig(
            k=int(payload.get("k", 2)),
            center_kind=payload.get("center", "chebyshev"),
            selection=payload.get("selection", "bnb"),
            bound_mode=payload.get("bound_mode", "paper"),
            max_iterations=int(payload.get("iterations", 30)),
            stop_on_indifference=bool(payload.get("stop_on_indifference", True)),
            search_ratio=float(payload.get("search_ratio", 0.5)),
            margin=float(payload.get("margin", 0.0)),
            seed=None if payload.get("seed") is None else int(payload["seed"]),
        )

    @app.get("/health")
    def health():
        return {"status": "ok", "ruleset": ruleset_id, "n_rules": bundle.n_rules}

    @app.post("/sessions", status_code=201)
    def create_session(payload: dict | None = Body(default=None)):
        payload = payload or {}
        if payload.get("ruleset", ruleset_id) != ruleset_id:
            return _error(404, f"unknown ruleset {payload.get('ruleset')!r}")
        try:
            cfg = _parse_config(payload)
        except (ValueError, TypeError) as exc:
            return _error(400, f"invalid session config: {exc}")
        session_id = uuid.uuid4().hex[:12]
        log_path = log_root / f"{session_id}.jsonl" if log_root else None
        meta_path = log_root / f"{session_id}.meta.json" if log_root else None
        session = _Session(session_id, cfg, bundle, log_path, meta_path)
        with store_lock:
            sessions[session_id] = session
        session.start()
        session.wait_first_query(_CREATE_TIMEOUT_S)
        view = _session_view(session)
        if view["query"] is None:
            with store_lock:
                sessions.pop(session_id, None)
            session.bridge.close()
            for path in (log_path, meta_path):
                if path is not None:
                    path.unlink(missing_ok=True)
            detail = view["error"] or "no interesting query available at start"
            return _error(409, detail)
        return JSONResponse(status_code=201, content=view)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = sessions.get(session_id)
        if session is None:
            return _error(404, "unknown session")
        return _session_view(session)

    @app.post("/sessions/{session_id}/answer")
    def post_answer(session_id: str, payload: dict = Body(...)):
        session = sessions.get(session_id)
        if session is None:
            return _error(404, "unknown session")
        if "iteration" not in payload or "preference" not in payload:
            return _error(400, "body must carry iteration and preference")
        try:
            iteration = int(payload["iteration"])
            preference = int(payload["preference"])
        except (TypeError, ValueError):
            return _error(400, "iteration and preference must be integers")
        if preference not in VALID_ANSWERS:
            return _error(400, f"preference must be one of {list(VALID_ANSWERS)}")
        try:
            session.submit(iteration, preference)
        except (AnswerRejected, BridgeClosed) as exc:
            return _error(409, str(exc))
        session.wait_progress(iteration, _ANSWER_TIMEOUT_S)
        view = _session_view(session)
        view["answered"] = {"iteration": iteration, "preference": preference}
        return view

    @app.get("/sessions/{session_id}/ranking")
    def get_ranking(session_id: str, top: int = Query(default=10, ge=1)):
        session = sessions.get(session_id)
        if session is None:
            return _error(404, "unknown session")
        snap = session.snapshot()
        center = snap["center"]
        if center is None:
            return _error(409, "no center available yet")
        order, scores = _ranking_ids(session.psi, center)
        top = min(top, bundle.n_rules)
        return [_rule_payload(int(rid), float(scores[rid])) for rid in order[:top]]

    @app.get("/sessions/{session_id}/stats")
    def get_stats(session_id: str):
        session = sessions.get(session_id)
        if session is None:
            return _error(404, "unknown session")
        with session.cond:
            return [rec.to_json_dict() for rec in session.records]

    def _replay(records: Sequence[IterationRecord], cfg: SessionConfig, psi: np.ndarray):
        index = SubsetIndex(bundle.features.shape[1], cfg.k)
        vs = init_version_space(index)
        asked = set()
        for rec in records:
            asked.add((min(rec.pair), max(rec.pair)))
            if rec.answer != 0:
                ineq = preference_constraint(
                    psi[rec.pair[0]], psi[rec.pair[1]], rec.answer, margin=cfg.margin
                )
                vs = add_preference(vs, ineq, rec.iteration)
        return vs, asked

    def _restore(meta_path: Path) -> None:
        meta = json.loads(meta_path.read_text())
        cfg = SessionConfig(**meta["config"])
        session_id = meta["id"]
        log_path = log_root / f"{session_id}.jsonl"
        records = read_session_log(log_path) if log_path.exists() else []
        session = _Session(session_id, cfg, bundle, log_path, meta_path)
        session.records = list(records)
        vs, asked = _replay(records, cfg, session.psi)
        stopped = (
            meta.get("state") in (STATE_FINISHED, STATE_FAILED)
            or (records and records[-1].answer == 0 and cfg.stop_on_indifference)
            or len(records) >= cfg.max_iterations
        )
        if stopped:
            center_fn = chebyshev_center if cfg.center_kind == "chebyshev" else minkowski_center
            with session.cond:
                session.state = meta.get("state", STATE_FINISHED)
                session.status = meta.get("status") or (
                    STATUS_INDIFFERENT
                    if records and records[-1].answer == 0 and cfg.stop_on_indifference
                    else "completed"
                )
                session.error = None if session.state == STATE_FINISHED else "restored failed session"
                session.center_point = center_fn(vs).point
            session.bridge.close()
        else:
            session.start(
                start_iteration=len(records) + 1, initial_constraints=vs, asked=asked
            )
        with store_lock:
            sessions[session_id] = session

    if log_root is not None:
        for meta_path in sorted(log_root.glob("*.meta.json")):
            try:
                _restore(meta_path)
            except Exception as exc:
                # A corrupt session file should not block service startup.
                print(f"warning: could not restore {meta_path.name}: {exc}")

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
