"""FastAPI service layer: engine app, mock backend app, shared handlers."""

from .app import create_app
from .backend_app import create_backend_app

__all__ = ["create_app", "create_backend_app"]
