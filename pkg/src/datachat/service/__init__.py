from .app import create_app, providers_from_settings, redact_location, render_chart_export
from .store import SessionStore

__all__ = ["create_app", "providers_from_settings", "redact_location",
           "render_chart_export", "SessionStore"]
