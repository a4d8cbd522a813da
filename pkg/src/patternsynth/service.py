"""HTTP facade over sessions: create, poll, inspect candidates as heatmap
PNGs or raw CSV, and post review decisions.

The service keeps no state of its own: every response is derived from the
session directory, so a restart loses nothing. Learning/optimization run
on background threads; clients poll. Writes to one session are serialized
with a per-session lock.
"""

from __future__ import annotations

import io
import threading
import traceback
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from PIL import Image

from . import session as sess
from .datafiles import load_entry, read_manifest
from .errors import SessionStateError, UsageError

THUMB_SIDE = 256


def _error(status: int, error: str, detail: str = "") -> JSONResponse:
    return JSONResponse({"error": error, "detail": detail}, status_code=status)


def _render_png(values: np.ndarray) -> bytes:
    """Grayscale heatmap: pixel = round(255 * value), nearest-neighbor
    upscaled to 256x256."""
    pix = np.round(np.clip(values, 0.0, 1.0) * 255).astype(np.uint8)
    img = Image.fromarray(pix, mode="L").resize((THUMB_SIDE, THUMB_SIDE), Image.NEAREST)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def create_app(data_root: str | Path, ui_dist: str | Path | None = None) -> FastAPI:
    data_root = Path(data_root)
    data_root.mkdir(parents=True, exist_ok=True)
    app = FastAPI(title="patternsynth review service")
    locks: dict[str, threading.Lock] = {}
    locks_guard = threading.Lock()

    def lock_for(sid: str) -> threading.Lock:
        with locks_guard:
            return locks.setdefault(sid, threading.Lock())

    def run_in_background(sid: str) -> None:
        def work():
            with lock_for(sid):
                session = sess.load_session(data_root, sid)
                try:
                    sess.run_until_review(session)
                except Exception as exc:  # noqa: BLE001 - fail the session, keep serving
                    session.state = sess.FAILED
                    session.error = f"{type(exc).__name__}: {exc}"
                    session.save()
                    traceback.print_exc()

        threading.Thread(target=work, daemon=True).start()

    def candidate_records(session: sess.Session, iteration: int) -> list[dict]:
        info = sess.candidates_of(session, iteration)
        out = []
        for idx, cand in enumerate(info["candidates"]):
            if not cand.get("path"):
                continue
            cid = f"{session.id}.{iteration:04d}.{idx:02d}"
            out.append({
                "id": cid,
                "png": f"/candidates/{cid}.png",
                "csv": f"/candidates/{cid}.csv",
                "seed": cand.get("seed"),
                "satisfied": cand.get("satisfied"),
                "value": cand.get("value"),
            })
        return out

    def view(session: sess.Session) -> dict:
        gamma = p_star = None
        gamma_iteration = None
        for it in range(session.iteration, 0, -1):
            result = sess.result_of(session, it)
            if result is not None:
                gamma, p_star, gamma_iteration = result["gamma"], result["p_star"], it
                break
        history = sess.history_of(session)
        return {
            "id": session.id,
            "state": session.state,
            "iteration": session.iteration,
            "capped": session.capped,
            "error": session.error,
            "gamma": gamma,
            "p": p_star,
            "gamma_iteration": gamma_iteration,
            "negatives": sess.negative_count(session),
            "candidates": candidate_records(session, session.iteration)
            if session.state in (sess.AWAITING_REVIEW, sess.DONE) else [],
            "history": [{k: h.get(k) for k in ("iteration", "gamma", "p_star", "decision")}
                        for h in history],
        }

    def get_session(sid: str) -> sess.Session:
        return sess.load_session(data_root, sid)

    @app.post("/sessions")
    async def create_session(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "bad_request", "body must be JSON")
        if not isinstance(body, dict):
            return _error(400, "bad_request", "body must be a JSON object")
        missing = [k for k in ("positive_manifest", "negative_manifest", "config")
                   if k not in body]
        if missing:
            return _error(400, "bad_request", f"missing fields: {', '.join(missing)}")
        try:
            config = sess.SessionConfig.from_dict(body["config"])
            session = sess.start_session(
                body["positive_manifest"], body["negative_manifest"],
                config, data_root, session_id=body.get("id"))
        except (UsageError, KeyError, TypeError, OSError) as exc:
            return _error(400, "bad_request", str(exc))
        run_in_background(session.id)
        return JSONResponse(view(session), status_code=201)

    @app.get("/sessions/{sid}")
    def session_status(sid: str):
        try:
            return view(get_session(sid))
        except UsageError as exc:
            return _error(404, "not_found", str(exc))

    @app.get("/sessions/{sid}/candidates")
    def session_candidates(sid: str):
        try:
            session = get_session(sid)
        except UsageError as exc:
            return _error(404, "not_found", str(exc))
        return {"candidates": candidate_records(session, session.iteration)}

    @app.get("/sessions/{sid}/exemplars")
    def session_exemplars(sid: str, limit: int = 8):
        try:
            session = get_session(sid)
        except UsageError as exc:
            return _error(404, "not_found", str(exc))
        entries = read_manifest(session.positive_manifest)
        out = []
        for idx in range(min(limit, len(entries))):
            cid = f"{sid}.pos.{idx:04d}"
            out.append({"id": cid, "png": f"/candidates/{cid}.png",
                        "csv": f"/candidates/{cid}.csv"})
        return {"exemplars": out}

    @app.get("/sessions/{sid}/history")
    def session_history(sid: str):
        try:
            return {"history": sess.history_of(get_session(sid))}
        except UsageError as exc:
            return _error(404, "not_found", str(exc))

    def resolve_candidate(cid: str):
        parts = cid.split(".")
        if len(parts) != 3:
            return None
        sid, mid, idx = parts
        try:
            session = get_session(sid)
        except UsageError:
            return None
        if mid == "pos":
            entries = read_manifest(session.positive_manifest)
            i = int(idx)
            if i >= len(entries):
                return None
            values = load_entry(entries[i], root=session.positive_manifest.parent)
            return values[:, :, 0], None
        try:
            iteration, i = int(mid), int(idx)
        except ValueError:
            return None
        info = sess.candidates_of(session, iteration)
        if i >= len(info["candidates"]) or not info["candidates"][i].get("path"):
            return None
        path = session.iter_dir(iteration) / "candidates" / info["candidates"][i]["path"]
        if not path.exists():
            return None
        return None, path

    @app.get("/candidates/{cid}.png")
    def candidate_png(cid: str):
        resolved = resolve_candidate(cid)
        if resolved is None:
            return _error(404, "not_found", f"unknown candidate {cid}")
        values, path = resolved
        if values is None:
            values = np.loadtxt(path, delimiter=",", ndmin=2)
        return Response(_render_png(values), media_type="image/png")

    @app.get("/candidates/{cid}.csv")
    def candidate_csv(cid: str):
        resolved = resolve_candidate(cid)
        if resolved is None:
            return _error(404, "not_found", f"unknown candidate {cid}")
        values, path = resolved
        if path is not None:
            return FileResponse(path, media_type="text/csv")
        body = "\n".join(",".join(f"{v:.17g}" for v in row) for row in values) + "\n"
        return Response(body, media_type="text/csv")

    @app.post("/sessions/{sid}/decision")
    async def session_decision(sid: str, request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "bad_request", "body must be JSON")
        decision = body.get("decision") if isinstance(body, dict) else None
        if decision not in ("approve", "reject"):
            return _error(400, "bad_request", 'body must be {"decision": "approve"|"reject"}')
        with lock_for(sid):
            try:
                session = get_session(sid)
            except UsageError as exc:
                return _error(404, "not_found", str(exc))
            try:
                sess.decide(session, decision)
            except SessionStateError as exc:
                return _error(409, "conflict", str(exc))
        if session.state == sess.LEARNING:
            run_in_background(sid)
        return view(session)

    if ui_dist is not None and Path(ui_dist).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dist), html=True), name="ui")

    return app
