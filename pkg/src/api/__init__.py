from .health import router as health_router
from .classify import router as classify_router
from .spaces import router as spaces_router
from .probe import router as probe_router
from .demos import router as demos_router

__all__ = [
    "health_router",
    "classify_router",
    "spaces_router",
    "probe_router",
    "demos_router",
]
