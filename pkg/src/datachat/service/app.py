"""FastAPI service wrapping the workflow engine.

Endpoints: session creation, the message turn, state view, connection
registration, chart export, trace export. One turn per session at a time;
session documents are persisted atomically after every turn.
"""

from __future__ import annotations

import csv
import io
import re
from typing import Optional

from fastapi import Depends, FastAPI, Header, HTTPException, Query
from fastapi.responses import PlainTextResponse, Response

from ..config import Settings
from ..errors import (
    ConnectionFailed,
    DataChatError,
    StorageFailure,
    TurnInProgress,
    UnknownChart,
    UnknownSession,
    UnsupportedFormat,
    WriteAccessRequested,
)
from ..providers.core import Providers, SystemClock
from ..providers.http import HttpModelAdapter, HttpSearchAdapter
from ..sqlkit.connection import ConnectionConfig
from ..sqlkit.metadata import retrieve_metadata
from ..state import ConversationState, UserMessage, export_trace
from ..tabular import utc_now_iso
from ..workflow import WorkflowGraph, default_graph, run_turn
from .schemas import (
    BundleResponse,
    ConnectionRequest,
    ConnectionSummary,
    MessageRequest,
    SessionCreated,
    StateView,
    TableSummary,
)
from .store import SessionStore

_STATUS_BY_CODE = {
    "UnknownSession": 404,
    "UnknownChart": 404,
    "TurnInProgress": 409,
    "UnsupportedFormat": 400,
    "WriteAccessRequested": 400,
    "ConnectionFailed": 400,
    "StorageFailure": 500,
}

_DSN_PASSWORD = re.compile(r"(://[^:/@]+:)[^@]+(@)")


def providers_from_settings(settings: Settings) -> Providers:
    model = None
    search = None
    if settings.model_endpoint:
        model = HttpModelAdapter(settings.model_endpoint, settings.model_key,
                                 timeout_s=settings.provider_deadline_ms / 1000.0)
    if settings.search_endpoint:
        search = HttpSearchAdapter(settings.search_endpoint, settings.search_key,
                                   timeout_s=settings.provider_deadline_ms / 1000.0)
    return Providers(model=model, search=search, clock=SystemClock())


def redact_location(location: str) -> str:
    return _DSN_PASSWORD.sub(r"\1***\2", location)


def create_app(settings: Optional[Settings] = None,
               providers: Optional[Providers] = None,
               graph: Optional[WorkflowGraph] = None) -> FastAPI:
    settings = settings or Settings().with_env_overrides()
    providers = providers or providers_from_settings(settings)
    graph = graph or default_graph()
    store = SessionStore(settings.storage_dir)

    app = FastAPI(title="datachat", version="0.1.0")
    app.state.store = store
    app.state.settings = settings
    app.state.providers = providers

    def require_token(authorization: str = Header(default="")) -> None:
        if not settings.api_token:
            return
        if authorization != f"Bearer {settings.api_token}":
            raise HTTPException(status_code=401, detail={"code": "Unauthorized",
                                                         "message": "bad or missing token"})

    auth = Depends(require_token)

    def fail(exc: DataChatError) -> HTTPException:
        status = _STATUS_BY_CODE.get(exc.code, 400)
        return HTTPException(status_code=status,
                             detail={"code": exc.code, "message": str(exc)})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/sessions", response_model=SessionCreated, dependencies=[auth])
    def create_session() -> SessionCreated:
        try:
            return SessionCreated(session_id=store.create())
        except StorageFailure as exc:
            raise fail(exc)

    @app.post("/sessions/{session_id}/messages", response_model=BundleResponse,
              dependencies=[auth])
    def post_message(session_id: str, request: MessageRequest) -> BundleResponse:
        try:
            lock = store.acquire_turn(session_id)
        except TurnInProgress as exc:
            raise fail(exc)
        try:
            state, revision = store.load(session_id)
            message = UserMessage(
                session_id=session_id,
                text=request.text,
                received_at=utc_now_iso(providers.clock.utcnow()),
                payload=request.payload,
            )
            new_state, bundle = run_turn(state, message, graph, providers, settings)
            store.save(new_state, expected_revision=revision)
            return BundleResponse(**bundle.to_dict())
        except DataChatError as exc:
            raise fail(exc)
        finally:
            lock.release()

    @app.get("/sessions/{session_id}/state", response_model=StateView,
             dependencies=[auth])
    def get_state(session_id: str) -> StateView:
        try:
            state, _ = store.load(session_id)
        except DataChatError as exc:
            raise fail(exc)
        return StateView(
            session_id=state.session_id,
            history=[{"message": {"text": m.text, "received_at": m.received_at},
                      "response": BundleResponse(**b.to_dict())}
                     for m, b in state.history],
            charts=[c.to_dict() for c in state.charts],
            insights=[i.to_dict() for i in state.insights],
            connection=_connection_view(state),
        )

    @app.post("/sessions/{session_id}/connections", response_model=ConnectionSummary,
              dependencies=[auth])
    def register_connection(session_id: str, request: ConnectionRequest) -> ConnectionSummary:
        try:
            lock = store.acquire_turn(session_id)
        except TurnInProgress as exc:
            raise fail(exc)
        try:
            state, revision = store.load(session_id)
            if not request.read_only:
                raise WriteAccessRequested("connections must be read-only")
            try:
                config = ConnectionConfig(dialect=request.dialect,
                                          location=request.location)
            except ValueError as exc:
                raise ConnectionFailed(str(exc))
            snapshot = retrieve_metadata(config, now=providers.clock.utcnow())
            state.active_connection = config
            state.schema_cache = snapshot
            store.save(state, expected_revision=revision)
            return ConnectionSummary(
                dialect=config.dialect,
                tables=[TableSummary(name=t.name, columns=len(t.columns),
                                     rows=t.row_count) for t in snapshot.tables],
                fetched_at=snapshot.fetched_at,
            )
        except DataChatError as exc:
            raise fail(exc)
        finally:
            lock.release()

    @app.get("/sessions/{session_id}/charts/{chart_id}/export", dependencies=[auth])
    def export_chart(session_id: str, chart_id: str,
                     format: str = Query(default="json")) -> Response:
        try:
            state, _ = store.load(session_id)
            payload, media = render_chart_export(state, chart_id, format)
        except DataChatError as exc:
            raise fail(exc)
        return Response(content=payload, media_type=media)

    @app.get("/sessions/{session_id}/trace", response_class=PlainTextResponse,
             dependencies=[auth])
    def get_trace(session_id: str) -> str:
        try:
            state, _ = store.load(session_id)
        except DataChatError as exc:
            raise fail(exc)
        return export_trace(state.trace)

    return app


def _connection_view(state: ConversationState) -> Optional[dict]:
    if state.active_connection is None:
        return None
    return {
        "dialect": state.active_connection.dialect,
        "location": redact_location(state.active_connection.location),
        "read_only": state.active_connection.read_only,
    }


def render_chart_export(state: ConversationState, chart_id: str,
                        format: str) -> tuple[bytes, str]:
    chart = state.chart_by_id(chart_id)
    if chart is None:
        raise UnknownChart(f"chart {chart_id!r} not found")
    if format == "json":
        from ..canonical import canonical_json

        return canonical_json(chart.to_dict()).encode("utf-8"), "application/json"
    if format == "csv":
        fields = chart.data.get("fields", [])
        values = chart.data.get("values", {})
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\r\n")
        writer.writerow(fields)
        for row in zip(*(values[f] for f in fields)):
            writer.writerow(row)
        return buffer.getvalue().encode("utf-8"), "text/csv"
    raise UnsupportedFormat(f"format must be json or csv, not {format!r}")
