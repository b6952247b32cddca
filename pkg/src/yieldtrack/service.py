"""Read-only JSON API over a loaded snapshot, plus static UI hosting.

Endpoints (all JSON):

    GET  /api/health
    GET  /api/villages
    GET  /api/trajectory                        national means + SDG line
    GET  /api/trends?band=mean|lower|upper      per-village trend table
    GET  /api/equality?cohort_year=2019         decile means + ratio series
    POST /api/scenario                          ScenarioSpec body -> outcome
    GET  /api/map/{scenario}?band=&cap=&g=&target=   GeoJSON choropleth

The snapshot is immutable after startup: models are fitted once, per-band
anchors and ceilings are cached, and identical requests produce byte-identical
responses. Malformed scenario specs return 400 with field-level messages;
evaluation failures return 422 with the reason.
"""

from __future__ import annotations

import json
import math
import threading
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ValidationError, field_validator

from . import __version__
from .equality import assign_cohorts, cohort_mean_series, inequality_series
from .errors import EvaluationError, YieldTrackError
from .export import DEFAULT_BREAKS, export_map, scenario_map_rows
from .feasibility import CeilingTable, compute_ceilings
from .pipeline import AnalysisRun, build_run, evaluate_scenario
from .scenario import EngineConfig, ScenarioSpec, resolve_kind
from .snapshot import Snapshot, load_snapshot
from .trend import Band, national_trajectory, project, track_statuses


class ScenarioRequest(BaseModel):
    """Wire form of a scenario request."""

    kind: str
    band: Literal["mean", "lower", "upper"] = "mean"
    aez_cap: bool = False
    g: float | None = None
    target: float | None = None

    @field_validator("kind")
    @classmethod
    def _known_kind(cls, v: str) -> str:
        try:
            resolve_kind(v)
        except EvaluationError:
            raise ValueError(
                f"unknown scenario kind {v!r}; expected sc1..sc7, a canonical "
                "name, custom_uniform, or custom_target"
            ) from None
        return v

    @field_validator("g", "target")
    @classmethod
    def _finite(cls, v: float | None) -> float | None:
        if v is not None and not math.isfinite(v):
            raise ValueError("must be finite")
        return v


class ServiceState:
    """Snapshot-derived analysis state shared by all requests."""

    def __init__(self, snapshot: Snapshot, config: EngineConfig,
                 breaks=DEFAULT_BREAKS, boundaries_path=None):
        self.snapshot = snapshot
        self.base_config = config
        self.breaks = tuple(breaks)
        self._runs: dict[Band, AnalysisRun] = {}
        self._ceilings: CeilingTable | None = None
        self._lock = threading.Lock()
        path = Path(boundaries_path) if boundaries_path else snapshot.boundaries_path()
        self.boundaries = None
        if path is not None and Path(path).exists():
            with open(path, encoding="utf-8") as fh:
                self.boundaries = json.load(fh)

    def config_for(self, band: Band) -> EngineConfig:
        cfg = self.base_config
        if cfg.band is band:
            return cfg
        return EngineConfig(
            baseline_year=cfg.baseline_year,
            end_year=cfg.end_year,
            pivot_year=cfg.pivot_year,
            confidence=cfg.confidence,
            band=band,
            include_preliminary=cfg.include_preliminary,
            fao_baseline=cfg.fao_baseline,
            window=cfg.window,
            cohort_year=cfg.cohort_year,
            area_weighted_national_mean=cfg.area_weighted_national_mean,
        )

    def run_for(self, band: Band) -> AnalysisRun:
        with self._lock:
            if band not in self._runs:
                self._runs[band] = build_run(self.snapshot.table, self.config_for(band))
            return self._runs[band]

    def ceilings(self) -> CeilingTable:
        with self._lock:
            if self._ceilings is None:
                self._ceilings = compute_ceilings(
                    self.snapshot.table, self.snapshot.registry,
                    self.base_config.window,
                )
            return self._ceilings

    def spec_from_request(self, req: ScenarioRequest) -> ScenarioSpec:
        kind = resolve_kind(req.kind)
        config = self.config_for(Band(req.band))
        return ScenarioSpec(
            kind=kind,
            config=config,
            aez_cap=req.aez_cap,
            uniform_growth=req.g,
            target=req.target,
        )


def create_app(state: ServiceState, ui_dir=None) -> FastAPI:
    app = FastAPI(title="yieldtrack", version=__version__)

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        errors = [
            {
                "field": ".".join(str(p) for p in err["loc"] if p != "body"),
                "message": err["msg"],
            }
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"errors": errors})

    @app.exception_handler(EvaluationError)
    async def _evaluation_handler(request: Request, exc: EvaluationError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(YieldTrackError)
    async def _data_handler(request: Request, exc: YieldTrackError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/api/health")
    def health():
        return {
            "status": "ok",
            "version": __version__,
            "villages": len(state.snapshot.registry),
        }

    @app.get("/api/villages")
    def villages():
        rows = []
        for rec in state.snapshot.registry:
            rows.append(
                {
                    "village_id": rec.village_id,
                    "name": rec.name,
                    "district": rec.district,
                    "province": rec.province,
                    "aez_id": rec.aez_id,
                    "lon": rec.centroid[0] if rec.centroid else None,
                    "lat": rec.centroid[1] if rec.centroid else None,
                }
            )
        return {"count": len(rows), "villages": rows}

    @app.get("/api/trajectory")
    def trajectory():
        cfg = state.base_config
        traj = national_trajectory(
            state.snapshot.table, cfg.fao_baseline,
            cfg.baseline_year, cfg.end_year,
            area_weighted=cfg.area_weighted_national_mean,
        )
        return {
            "fao_baseline": traj.fao_baseline,
            "years": list(traj.years),
            "observed_mean": list(traj.observed_mean),
            "preliminary": list(traj.preliminary),
            "sdg_line": {"years": list(traj.sdg_years), "values": list(traj.sdg_line)},
        }

    @app.get("/api/trends")
    def trends(band: Literal["mean", "lower", "upper"] = "mean"):
        b = Band(band)
        run = state.run_for(b)
        cfg = run.config
        statuses = track_statuses(
            run.models, cfg.baseline_year, cfg.end_year, b, cfg.confidence
        )
        rows = []
        for vid, status in statuses.items():
            model = run.models[vid]
            y_base = project(model, cfg.baseline_year, b, cfg.confidence)
            if status.flagged_degenerate:
                y_base = 1.0
            rows.append(
                {
                    "village_id": vid,
                    "slope": model.slope,
                    "y2015": y_base,
                    "y2030": project(model, cfg.end_year, b, cfg.confidence),
                    "ratio": status.ratio,
                    "on_track": status.on_track,
                    "flagged": status.flagged_degenerate,
                }
            )
        return {"band": band, "count": len(rows), "villages": rows}

    @app.get("/api/equality")
    def equality(cohort_year: int | None = None):
        run = state.run_for(state.base_config.band)
        year = cohort_year if cohort_year is not None else run.config.cohort_year
        if year != run.config.cohort_year:
            assignment = assign_cohorts(state.snapshot.table.values_at(year), year)
        else:
            assignment = run.assignment
        years = state.snapshot.table.years()
        series = cohort_mean_series(assignment, state.snapshot.table, years)
        ratios = inequality_series(assignment, state.snapshot.table, years)
        return {
            "cohort_year": year,
            "decile_means": [
                {
                    "year": c.year,
                    "decile": c.decile,
                    "mean_yield": c.mean_yield,
                    "preliminary": c.preliminary,
                }
                for c in series.cells
            ],
            "ratios": [
                {
                    "year": r.year,
                    "ratio": r.ratio,
                    "lo": r.bounds[0],
                    "hi": r.bounds[1],
                    "preliminary": r.preliminary,
                }
                for r in ratios
            ],
        }

    @app.post("/api/scenario")
    def scenario(req: ScenarioRequest):
        spec = state.spec_from_request(req)
        run = state.run_for(spec.config.band)
        ceilings = state.ceilings() if spec.aez_cap else None
        outcome = evaluate_scenario(
            run, spec, state.snapshot.table, state.snapshot.registry, ceilings
        )
        return outcome.to_json_dict()

    @app.get("/api/map/{scenario_name}")
    def scenario_map(scenario_name: str,
                     band: Literal["mean", "lower", "upper"] = "mean",
                     cap: bool = False,
                     g: float | None = None,
                     target: float | None = None):
        if state.boundaries is None:
            return JSONResponse(
                status_code=404, content={"detail": "no boundaries loaded"}
            )
        try:
            req = ScenarioRequest(kind=scenario_name, band=band, aez_cap=cap,
                                  g=g, target=target)
        except ValidationError as exc:
            errors = [
                {"field": ".".join(str(p) for p in err["loc"]), "message": err["msg"]}
                for err in exc.errors()
            ]
            return JSONResponse(status_code=400, content={"errors": errors})
        spec = state.spec_from_request(req)
        run = state.run_for(spec.config.band)
        ceilings = state.ceilings() if spec.aez_cap else None
        outcome = evaluate_scenario(
            run, spec, state.snapshot.table, state.snapshot.registry, ceilings
        )
        return export_map(scenario_map_rows(outcome), state.boundaries, state.breaks)

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    else:

        @app.get("/")
        def index():
            return {
                "service": "yieldtrack",
                "hint": "no UI bundle configured; API under /api/",
            }

    return app


def build_service(data_dir, *, band: str = "mean", fao_baseline: float = 1531.5,
                  window: tuple[int, int] = (2019, 2023),
                  include_preliminary: bool = False,
                  cohort_year: int = 2019,
                  breaks=DEFAULT_BREAKS,
                  boundaries_path=None, ui_dir=None) -> FastAPI:
    """Load a snapshot directory and assemble the FastAPI app."""
    snapshot = load_snapshot(data_dir)
    config = EngineConfig(
        band=Band(band),
        fao_baseline=fao_baseline,
        window=window,
        include_preliminary=include_preliminary,
        cohort_year=cohort_year,
    )
    state = ServiceState(snapshot, config, breaks=breaks,
                         boundaries_path=boundaries_path)
    return create_app(state, ui_dir=ui_dir)
