"""Session, registry and workspace service with HTTP + SSE API."""

from .app import EngineState, create_app
from .registry import DatasetEntry, ServiceRegistry
from .state import PlacedView, Session, Workspace, WorkspaceStore

__all__ = [
    "DatasetEntry",
    "EngineState",
    "PlacedView",
    "ServiceRegistry",
    "Session",
    "Workspace",
    "WorkspaceStore",
    "create_app",
]
