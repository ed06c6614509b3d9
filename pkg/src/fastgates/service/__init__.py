"""HTTP service wrapping the gate-design package."""

from .app import app, create_app

__all__ = ["app", "create_app"]
