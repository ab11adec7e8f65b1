"""Pydantic request/response models for the HTTP surface."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class SessionCreated(BaseModel):
    session_id: str


class MessageRequest(BaseModel):
    text: str
    payload: Optional[dict[str, Any]] = None


class BundleResponse(BaseModel):
    message: str
    charts: list[dict[str, Any]] = Field(default_factory=list)
    insight: Optional[dict[str, Any]] = None
    explanation: Optional[dict[str, Any]] = None
    errors: list[tuple[str, str]] = Field(default_factory=list)


class ConnectionRequest(BaseModel):
    dialect: str = "embedded"
    location: str
    read_only: bool = True


class TableSummary(BaseModel):
    name: str
    columns: int
    rows: int


class ConnectionSummary(BaseModel):
    dialect: str
    tables: list[TableSummary]
    fetched_at: str


class HistoryEntry(BaseModel):
    message: dict[str, Any]
    response: BundleResponse


class StateView(BaseModel):
    session_id: str
    history: list[HistoryEntry]
    charts: list[dict[str, Any]]
    insights: list[dict[str, Any]]
    connection: Optional[dict[str, Any]] = None


class ErrorBody(BaseModel):
    code: str
    message: str
