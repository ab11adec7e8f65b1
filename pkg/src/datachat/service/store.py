"""Filesystem session store: one canonical JSON document per session,
written atomically (temp file + rename), with per-session turn locks."""

from __future__ import annotations

import json
import os
import threading
import uuid
from pathlib import Path
from typing import Optional

from ..errors import StorageFailure, TurnInProgress, UnknownSession
from ..state import ConversationState


class SessionStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageFailure(f"cannot create session directory: {exc}") from exc
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _path(self, session_id: str) -> Path:
        if not session_id.replace("-", "").isalnum():
            raise UnknownSession(f"malformed session id {session_id!r}")
        return self.root / f"{session_id}.json"

    def create(self) -> str:
        session_id = uuid.uuid4().hex
        state = ConversationState(session_id=session_id)
        self.save(state, expected_revision=None)
        return session_id

    def exists(self, session_id: str) -> bool:
        return self._path(session_id).exists()

    def load(self, session_id: str) -> tuple[ConversationState, int]:
        path = self._path(session_id)
        if not path.exists():
            raise UnknownSession(f"session {session_id!r} does not exist")
        try:
            document = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise StorageFailure(f"cannot read session {session_id!r}: {exc}") from exc
        return ConversationState.from_dict(document["state"]), int(document["revision"])

    def save(self, state: ConversationState, expected_revision: Optional[int]) -> int:
        """Atomic write; revision strictly increases per save."""
        path = self._path(state.session_id)
        revision = 0 if expected_revision is None else expected_revision + 1
        document = {"session_id": state.session_id, "revision": revision,
                    "state": state.to_dict()}
        tmp = path.with_suffix(".json.tmp")
        try:
            tmp.write_text(json.dumps(document, sort_keys=True), encoding="utf-8")
            os.replace(tmp, path)
        except OSError as exc:
            raise StorageFailure(f"cannot persist session: {exc}") from exc
        return revision

    def turn_lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            if session_id not in self._locks:
                self._locks[session_id] = threading.Lock()
            return self._locks[session_id]

    def acquire_turn(self, session_id: str) -> threading.Lock:
        lock = self.turn_lock(session_id)
        if not lock.acquire(blocking=False):
            raise TurnInProgress(f"a turn is already running for session {session_id}")
        return lock
