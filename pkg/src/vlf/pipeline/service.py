"""HTTP review service for the human-evaluation workflow.

Endpoints:
  GET  /api/health         liveness and queue size
  GET  /api/samples/next   next sample the annotator has not finished
  POST /api/judgments      append one validated judgment
  GET  /api/summary        agreement table over the judgment store

A built review UI bundle (``ui`` directory inside the state dir, or the
packaged ``frontend/dist``) is served statically when present.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..errors import SchemaError
from ..metrics import CRITERIA, Judgment, agreement_table, validate_label
from .review import DuplicateJudgment, JudgmentStore, load_review_set


class JudgmentIn(BaseModel):
    sample_id: str
    annotator_id: str
    criterion: str
    label: str


def find_ui_bundle(state_dir: Path) -> Path | None:
    local = state_dir / "ui"
    if (local / "index.html").exists():
        return local
    packaged = Path(__file__).resolve().parents[3] / "frontend" / "dist"
    if (packaged / "index.html").exists():
        return packaged
    return None


def create_app(state_dir: str | Path) -> FastAPI:
    state_dir = Path(state_dir)
    cards = load_review_set(state_dir / "review_set.json")
    by_id = {card["sample_id"]: card for card in cards}
    store = JudgmentStore(state_dir / "judgments.jsonl")
    app = FastAPI(title="review service")

    @app.get("/api/health")
    def health():
        return {"status": "ok", "samples": len(cards), "judgments": len(store)}

    @app.get("/api/samples/next")
    def next_sample(annotator: str):
        for card in cards:
            done = store.judged_criteria(card["sample_id"], annotator)
            if len(done) < len(CRITERIA):
                remaining = [c for c in CRITERIA if c not in done]
                return {
                    **card,
                    "criteria": {c: list(CRITERIA[c]) for c in CRITERIA},
                    "remaining_criteria": remaining,
                }
        return Response(status_code=204)

    @app.post("/api/judgments", status_code=201)
    def post_judgment(body: JudgmentIn):
        if body.sample_id not in by_id:
            raise HTTPException(404, detail=f"unknown sample {body.sample_id!r}")
        try:
            validate_label(body.criterion, body.label)
        except SchemaError as exc:
            allowed = CRITERIA.get(body.criterion)
            raise HTTPException(
                422,
                detail={
                    "error": str(exc),
                    "criterion": body.criterion,
                    "allowed": list(allowed) if allowed else sorted(CRITERIA),
                },
            ) from exc
        try:
            stored = store.append(
                Judgment(body.sample_id, body.annotator_id, body.criterion, body.label)
            )
        except DuplicateJudgment as exc:
            raise HTTPException(409, detail=str(exc)) from exc
        return {"status": "stored", "timestamp": stored.timestamp}

    @app.get("/api/summary")
    def summary():
        report = agreement_table(store.all(), expected_samples=len(cards))
        judged = {
            card["sample_id"]
            for card in cards
            if any(j.sample_id == card["sample_id"] for j in store.all())
        }
        out = report.to_dict()
        out["progress"] = {"judged": len(judged), "total": len(cards)}
        return out

    ui = find_ui_bundle(state_dir)
    if ui is not None:
        app.mount("/", StaticFiles(directory=ui, html=True), name="ui")
    return app
