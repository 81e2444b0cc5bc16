"""HTTP+JSON study runner.

Endpoints (all bodies JSON):
  GET  /config                      -> StudyConfig
  GET  /charts/{id}.png             -> chart image bytes
  POST /sessions                    {"participant_id": str, "screen_w": int,
                                     "screen_h": int, "scale": float}
                                    -> {"token": str, "item_order": [str]}
  POST /sessions/{token}/clicks     {"item": str,
                                     "clicks": [{"x": int, "y": int, "t": int}]}
                                    -> {"seq": [int]}
  POST /sessions/{token}/answer     {"item": str, "choice": int | "SKIPPED"}
                                    -> {"next_item": str | null}
  POST /sessions/{token}/sgl        {"responses": [int x10, 1..6]} -> {"ok": true}
  POST /sessions/{token}/finalize   -> {"ok": true}

Errors come back as {"error": CODE, "detail": str} with status 400/404/409.
"""

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse

from .config import StudyConfig
from .store import (BacktrackError, BatchRejectedError, SessionError,
                    SessionStore, TimeExpiredError, UnknownTokenError)

_STATUS = {
    "UNKNOWN_TOKEN": 404,
    "BACKTRACK_REJECTED": 409,
    "TIME_EXPIRED": 409,
    "FINALIZED": 409,
}


def create_app(store: SessionStore, charts_dir=None) -> FastAPI:
    app = FastAPI(title="vislit capture service")
    charts_dir = Path(charts_dir) if charts_dir else None

    @app.exception_handler(SessionError)
    async def _session_error(request: Request, exc: SessionError):
        return JSONResponse(status_code=_STATUS.get(exc.code, 400),
                            content={"error": exc.code, "detail": str(exc)})

    @app.get("/config")
    def get_config():
        return store.config.to_dict()

    @app.get("/charts/{chart_id}.png")
    def get_chart(chart_id: str):
        if charts_dir is None:
            return JSONResponse(status_code=404,
                                content={"error": "NO_CHARTS",
                                         "detail": "no charts directory configured"})
        path = charts_dir / f"{chart_id}.png"
        if not path.exists():
            return JSONResponse(status_code=404,
                                content={"error": "NOT_FOUND",
                                         "detail": f"unknown chart {chart_id}"})
        return FileResponse(path, media_type="image/png")

    @app.post("/sessions")
    async def open_session(request: Request):
        body = await request.json()
        token = store.open_session(
            body["participant_id"],
            screen_w=body.get("screen_w"), screen_h=body.get("screen_h"),
            scale=body.get("scale", 1.0), seed=body.get("seed"))
        return {"token": token, "item_order": store.get(token).item_order}

    @app.post("/sessions/{token}/clicks")
    async def post_clicks(token: str, request: Request):
        body = await request.json()
        session = store.get(token)
        seqs = session.record_clicks(body["item"], body["clicks"])
        return {"seq": seqs}

    @app.post("/sessions/{token}/answer")
    async def post_answer(token: str, request: Request):
        body = await request.json()
        session = store.get(token)
        session.record_answer(body["item"], body["choice"])
        return {"next_item": session.current_item}

    @app.post("/sessions/{token}/sgl")
    async def post_sgl(token: str, request: Request):
        body = await request.json()
        store.get(token).record_sgl(body["responses"])
        return {"ok": True}

    @app.post("/sessions/{token}/finalize")
    async def post_finalize(token: str):
        store.get(token).finalize()
        return {"ok": True}

    return app


def run_server(config_path, store_dir, charts_dir=None, host="127.0.0.1",
               port=8000):
    import uvicorn

    config = StudyConfig.load(config_path)
    store = SessionStore(store_dir, config)
    app = create_app(store, charts_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
