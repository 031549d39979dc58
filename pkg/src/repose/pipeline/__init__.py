from .reposition import RepositionResult, reposition
from .session import Session, commit, create_session, preview, select, undo

__all__ = [
    "RepositionResult",
    "Session",
    "commit",
    "create_session",
    "preview",
    "reposition",
    "select",
    "undo",
]
