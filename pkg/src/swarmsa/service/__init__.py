from .app import create_app
from .session import Session

__all__ = ["create_app", "Session"]
