"""Command-line client: serve the API, ask headless questions, replay turns."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import Settings
from .errors import DataChatError
from .service.app import create_app, providers_from_settings
from .sqlkit.connection import ConnectionConfig
from .sqlkit.metadata import retrieve_metadata
from .state import ConversationState, UserMessage, export_trace, parse_trace
from .tabular import utc_now_iso
from .workflow import default_graph, replay_trace, run_turn


def _load_settings(config: str | None) -> Settings:
    settings = Settings.from_file(config) if config else Settings()
    return settings.with_env_overrides()


@click.group()
def main() -> None:
    """Conversational data exploration service and client."""


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--config", default=None, type=click.Path(exists=True, dir_okay=False))
def serve(host: str, port: int, config: str | None) -> None:
    """Run the HTTP service."""
    import uvicorn

    app = create_app(_load_settings(config))
    uvicorn.run(app, host=host, port=port, log_level="info")


@main.command()
@click.option("--db", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Path to an embedded database file.")
@click.option("--question", required=True, help="Natural-language question.")
@click.option("--config", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--record", default=None, type=click.Path(file_okay=False),
              help="Directory to record the turn into (state, message, trace, bundle).")
def ask(db: str, question: str, config: str | None, record: str | None) -> None:
    """Run one headless turn against an embedded database."""
    settings = _load_settings(config)
    providers = providers_from_settings(settings)
    state = ConversationState(session_id="cli")
    connection = ConnectionConfig(dialect="embedded", location=db)
    state.active_connection = connection
    state.schema_cache = retrieve_metadata(connection, now=providers.clock.utcnow())
    message = UserMessage(session_id="cli", text=question,
                          received_at=utc_now_iso(providers.clock.utcnow()))
    state_before = state.copy()

    try:
        new_state, bundle = run_turn(state, message, default_graph(), providers, settings)
    except DataChatError as exc:
        click.echo(f"error ({exc.code}): {exc}", err=True)
        sys.exit(1)

    if record:
        out = Path(record)
        out.mkdir(parents=True, exist_ok=True)
        (out / "state_before.json").write_text(state_before.to_text(), encoding="utf-8")
        (out / "message.json").write_text(json.dumps(message.to_dict()), encoding="utf-8")
        new_events = new_state.trace[len(state_before.trace):]
        (out / "trace.ndjson").write_text(export_trace(new_events), encoding="utf-8")
        (out / "bundle.json").write_text(json.dumps(bundle.to_dict(), sort_keys=True),
                                         encoding="utf-8")
    click.echo(json.dumps(bundle.to_dict(), indent=2, sort_keys=True))


@main.command()
@click.option("--trace", "trace_path", required=True, type=click.Path(exists=True),
              help="Trace file (NDJSON) or a directory recorded by `ask --record`.")
@click.option("--state", "state_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--message", "message_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--config", default=None, type=click.Path(exists=True, dir_okay=False))
def replay(trace_path: str, state_path: str | None, message_path: str | None,
           config: str | None) -> None:
    """Re-execute a recorded turn and verify it reproduces bit-identically."""
    settings = _load_settings(config)
    providers = providers_from_settings(settings)
    root = Path(trace_path)
    if root.is_dir():
        trace_file = root / "trace.ndjson"
        state_file = root / "state_before.json"
        message_file = root / "message.json"
        expected_file = root / "bundle.json"
    else:
        if not state_path or not message_path:
            click.echo("--state and --message are required with a bare trace file", err=True)
            sys.exit(2)
        trace_file, state_file = root, Path(state_path)
        message_file, expected_file = Path(message_path), None

    trace = parse_trace(trace_file.read_text(encoding="utf-8"))
    state = ConversationState.from_text(state_file.read_text(encoding="utf-8"))
    message = UserMessage.from_dict(json.loads(message_file.read_text(encoding="utf-8")))

    try:
        bundle = replay_trace(state, message, trace, default_graph(), providers, settings)
    except DataChatError as exc:
        click.echo(f"replay failed ({exc.code}): {exc}", err=True)
        sys.exit(1)

    rendered = json.dumps(bundle.to_dict(), sort_keys=True)
    if expected_file is not None and expected_file.exists():
        expected = json.dumps(json.loads(expected_file.read_text(encoding="utf-8")),
                              sort_keys=True)
        if rendered != expected:
            click.echo("replay bundle differs from the recorded bundle", err=True)
            sys.exit(1)
        click.echo("replay matches the recorded bundle", err=True)
    click.echo(json.dumps(bundle.to_dict(), indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
