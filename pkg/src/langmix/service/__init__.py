"""FastAPI service exposing the scoring, forging, and diagnostics core."""

from .app import app, create_app  # noqa: F401
