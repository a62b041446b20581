"""HTTP prediction service.

Serves one immutable loaded model plus the ingested panel snapshot:
prediction, feature schema with slider ranges, state roster, historical
trend series, importance, and the stored evaluation report. No request
mutates service state.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, ConfigDict

from .artifacts import ModelArtifact
from .learners import predict_class, predict_proba
from .panel import RiskClass, WeeklyPanelRow


class PredictRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    state: str
    features: dict


class PredictResponse(BaseModel):
    state: str
    risk_class: str
    probabilities: dict
    model_id: str


def _slider_ranges(panel: Sequence[WeeklyPanelRow], names) -> dict:
    ranges = {}
    for name in names:
        values = [row.features[name] for row in panel]
        if values:
            ranges[name] = {"min": min(values), "max": max(values)}
        else:
            ranges[name] = {"min": 0.0, "max": 1.0}
    return ranges


def create_app(artifact: ModelArtifact, panel: Sequence[WeeklyPanelRow],
               roster: Optional[Sequence[str]] = None,
               cors_origins: Sequence[str] = ("*",)) -> FastAPI:
    app = FastAPI(title="rsv-sentinel", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    schema = artifact.schema
    states = sorted(roster) if roster is not None \
        else sorted({row.state for row in panel})
    ranges = _slider_ranges(panel, schema.names)
    # warm the compiled prediction path so the first request is fast
    predict_proba(artifact.model,
                  [(ranges[n]["min"] + ranges[n]["max"]) / 2.0
                   for n in schema.names])
    trends: dict = {}
    for row in sorted(panel, key=lambda r: (r.state, r.week)):
        trends.setdefault(row.state, []).append({
            "week_ending": row.week.end_date.isoformat(),
            "rate": row.rate,
            "label": row.label.label,
        })

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/schema")
    def get_schema():
        return {
            "names": list(schema.names),
            "units": dict(schema.units),
            "categorical_mask": dict(schema.categorical_mask),
            "ranges": ranges,
        }

    @app.get("/states")
    def get_states():
        return {"states": states}

    @app.post("/predict", response_model=PredictResponse)
    def predict(request: PredictRequest):
        if request.state not in states:
            raise HTTPException(
                status_code=422,
                detail=f"unknown state {request.state!r}; see /states")
        missing = [n for n in schema.names if n not in request.features]
        unknown = [n for n in request.features if n not in schema.names]
        if missing or unknown:
            parts = []
            if missing:
                parts.append(f"missing features: {', '.join(missing)}")
            if unknown:
                parts.append(f"unknown features: {', '.join(unknown)}")
            raise HTTPException(status_code=422, detail="; ".join(parts))
        try:
            vector = [float(request.features[n]) for n in schema.names]
        except (TypeError, ValueError):
            raise HTTPException(status_code=422,
                                detail="features must be numeric")
        if not all(math.isfinite(v) for v in vector):
            bad = [n for n, v in zip(schema.names, vector)
                   if not math.isfinite(v)]
            raise HTTPException(
                status_code=422,
                detail=f"non-finite features: {', '.join(bad)}")

        probs = predict_proba(artifact.model, vector)
        risk = predict_class(artifact.model, vector)
        return PredictResponse(
            state=request.state,
            risk_class=risk.label,
            probabilities={RiskClass(k).label: float(probs[k])
                           for k in range(len(probs))},
            model_id=artifact.artifact_id or "",
        )

    @app.get("/trend")
    def trend(state: str = Query(...)):
        if state not in states:
            raise HTTPException(status_code=404,
                                detail=f"unknown state {state!r}")
        return {"state": state, "series": trends.get(state, [])}

    @app.get("/importance")
    def importance():
        from .learners import variable_importance
        ranking = variable_importance(artifact.model)
        return {"entries": [[name, value] for name, value in ranking.entries]}

    @app.get("/report")
    def report():
        stored = artifact.training_metadata.get("evaluation_report")
        if stored is None:
            raise HTTPException(
                status_code=404,
                detail="artifact has no evaluation report; run evaluate")
        return stored

    return app


def serve(artifact: ModelArtifact, panel: Sequence[WeeklyPanelRow],
          bind_address: str = "127.0.0.1:8000",
          roster: Optional[Sequence[str]] = None,
          cors_origins: Sequence[str] = ("*",)) -> None:
    """Run the service until interrupted."""
    import uvicorn

    host, _, port = bind_address.partition(":")
    app = create_app(artifact, panel, roster, cors_origins)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000),
                log_level="info")
