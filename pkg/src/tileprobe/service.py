"""HTTP/JSON boundary over one dataset session.

The service adds no computation: answers are the engine results, serialized.
Mutating query evaluation is serialized through a writer lock (queued FIFO
by default, or rejected with 409 when queue_mutations is off); the
inspection endpoints are read-only and never touch the file.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, HTTPException, Query
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .approx_engine import evaluate_approx
from .errors import IoFailure, MissingStats, UntrackedAttribute
from .exact_engine import AggregateRequest, evaluate_exact
from .ingest import RowReader, scan_init
from .tile_index import IndexConfig, Rect, TileIndex, initialize


@dataclass
class SessionState:
    descriptor: object
    index: TileIndex
    reader: RowReader
    config: IndexConfig
    queue_mutations: bool = True
    queries_served: int = 0
    started_at: float = field(default_factory=time.time)
    write_lock: threading.Lock = field(default_factory=threading.Lock)


def build_session(
    file_path,
    axis_x: int,
    axis_y: int,
    tracked: list[int],
    *,
    delimiter: str = ",",
    has_header: bool = True,
    on_bad_row: str = "fail",
    config: Optional[IndexConfig] = None,
    queue_mutations: bool = True,
) -> SessionState:
    config = config or IndexConfig()
    descriptor, scan = scan_init(
        file_path, axis_x, axis_y, tracked,
        delimiter=delimiter, has_header=has_header, on_bad_row=on_bad_row,
    )
    index = initialize(descriptor, scan, config)
    return SessionState(
        descriptor=descriptor,
        index=index,
        reader=RowReader(descriptor),
        config=config,
        queue_mutations=queue_mutations,
    )


class RectModel(BaseModel):
    xMin: float
    xMax: float
    yMin: float
    yMax: float

    def to_rect(self) -> Rect:
        try:
            return Rect(self.xMin, self.xMax, self.yMin, self.yMax)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc


class AggItem(BaseModel):
    function: str
    attribute: Optional[Union[int, str]] = None


class QueryBody(BaseModel):
    rect: RectModel
    requests: list[AggItem] = Field(min_length=1)
    phi: Optional[float] = None


def _resolve_attribute(session: SessionState, attribute: Optional[Union[int, str]]) -> Optional[int]:
    if attribute is None:
        return None
    names = session.descriptor.column_names
    if isinstance(attribute, str):
        if attribute not in names:
            raise HTTPException(status_code=400, detail=f"unknown column {attribute!r}")
        return names.index(attribute)
    if not 0 <= attribute < len(names):
        raise HTTPException(status_code=400, detail=f"column index {attribute} out of range")
    return int(attribute)


def create_app(session: SessionState, static_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="tileprobe", version="0.1.0")

    @app.get("/api/dataset")
    def dataset():
        d = session.descriptor
        return {
            "file": str(d.file_path),
            "columns": d.column_names,
            "axisX": d.axis_x,
            "axisY": d.axis_y,
            "tracked": [d.column_names[a] for a in d.tracked_attributes],
            "rowCount": d.row_count,
            "domain": session.index.domain.to_dict(),
        }

    @app.post("/api/query")
    def query(body: QueryBody):
        rect = body.rect.to_rect()
        requests = []
        for item in body.requests:
            attr = _resolve_attribute(session, item.attribute)
            requests.append(AggregateRequest(item.function, attr))
        if body.phi is not None and body.phi < 0:
            raise HTTPException(status_code=400, detail="phi must be >= 0 or null")

        acquired = session.write_lock.acquire(blocking=session.queue_mutations)
        if not acquired:
            raise HTTPException(status_code=409, detail="another query is adapting the index")
        try:
            if body.phi is None:
                ans = evaluate_exact(session.index, rect, requests, session.reader)
                results = [
                    {
                        "agg": _label(session, r),
                        "value": v,
                        "ci": None if v is None else {"lo": v, "hi": v},
                        "reportedBound": 0.0,
                    }
                    for r, v in zip(requests, ans.values)
                ]
                telemetry = ans.telemetry
            else:
                phi = body.phi if body.phi <= 1.0 else None  # > 1 means estimate-only
                ap = evaluate_approx(session.index, rect, requests, phi, session.reader)
                results = [
                    {
                        "agg": _label(session, r),
                        "value": res.value,
                        "ci": None if res.ci is None else {"lo": res.ci.lo, "hi": res.ci.hi},
                        "reportedBound": res.reported_bound,
                    }
                    for r, res in zip(requests, ap.results)
                ]
                telemetry = ap.telemetry
            session.queries_served += 1
        except (UntrackedAttribute, MissingStats, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except (IoFailure, OSError) as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        finally:
            session.write_lock.release()
        return {
            "results": results,
            "telemetry": {
                "rowsRead": telemetry.rows_read,
                "tilesSplit": telemetry.tiles_split,
                "elapsedUs": telemetry.elapsed_us,
            },
        }

    @app.get("/api/tiles")
    def tiles(max_depth: Optional[int] = Query(default=None, ge=0)):
        return session.index.snapshot(max_depth=max_depth)

    @app.get("/api/points")
    def points(rect: str, limit: int = Query(default=5000, ge=0)):
        parts = rect.split(",")
        if len(parts) != 4:
            raise HTTPException(status_code=400, detail="rect must be 'xMin,xMax,yMin,yMax'")
        try:
            r = Rect(float(parts[0]), float(parts[1]), float(parts[2]), float(parts[3]))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {"points": session.index.collect_points(r, limit)}

    @app.get("/api/stats")
    def stats():
        return {
            "rowsRead": session.reader.rows_read,
            "tilesSplit": session.index.tiles_split,
            "queriesServed": session.queries_served,
            "uptimeSeconds": time.time() - session.started_at,
        }

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app


def _label(session: SessionState, r: AggregateRequest) -> str:
    if r.attribute is None:
        return r.function
    return f"{r.function}({session.descriptor.column_names[r.attribute]})"


def run_server(session: SessionState, port: int, static_dir: Optional[Path] = None, host: str = "127.0.0.1"):
    import uvicorn

    app = create_app(session, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
