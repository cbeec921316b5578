import time
import uuid
from contextlib import asynccontextmanager
from typing import Any, AsyncGenerator, Dict

from fastapi import FastAPI, Request, status
from fastapi.responses import JSONResponse
from pydantic import ValidationError

from src import __version__
from src.api import classify_router, demos_router, health_router, probe_router, spaces_router
from src.core import get_logger, settings, setup_logging
from src.core.errors import MetriforgeError
from src.core.logging import bind_request_id, clear_contextvars

setup_logging()
logger = get_logger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI) -> AsyncGenerator:
    logger.info(
        "Starting metriforge API",
        environment=settings.app_env,
        seed=settings.seed,
        budget=settings.budget,
        workers=settings.workers,
    )
    yield
    logger.info("Shutting down metriforge API")


app = FastAPI(
    title=settings.app_name,
    description="Classify, test and probe aggregation functions for quasi-pseudometrics",
    version=__version__,
    lifespan=lifespan,
    debug=settings.debug,
)


def _request_id(request: Request) -> Any:
    return getattr(request.state, "request_id", None)


def _error(request: Request, status_code: int, content: Dict[str, Any]) -> JSONResponse:
    return JSONResponse(status_code=status_code, content={**content, "request_id": _request_id(request)})


@app.middleware("http")
async def add_request_id(request: Request, call_next):
    """Tag every request with an id (client supplied or fresh) and its timing."""
    request_id = request.headers.get("X-Request-ID") or str(uuid.uuid4())
    request.state.request_id = request_id
    bind_request_id(request_id)

    started = time.perf_counter()
    try:
        response = await call_next(request)
    finally:
        clear_contextvars()
    elapsed = time.perf_counter() - started

    response.headers["X-Request-ID"] = request_id
    response.headers["X-Process-Time"] = f"{elapsed:.6f}"
    logger.info(
        "Request completed",
        method=request.method,
        path=request.url.path,
        status_code=response.status_code,
        request_id=request_id,
        process_time=elapsed,
    )
    return response


@app.exception_handler(MetriforgeError)
async def metriforge_error_handler(request: Request, exc: MetriforgeError):
    """Bad specs, exceeded caps and failed preconditions are client errors."""
    logger.info("Request rejected", error=exc.code, detail=str(exc), request_id=_request_id(request))
    return _error(request, status.HTTP_422_UNPROCESSABLE_ENTITY, exc.to_dict())


@app.exception_handler(ValidationError)
async def model_validation_handler(request: Request, exc: ValidationError):
    # model invariants broken by a payload that passed request validation
    return _error(
        request,
        status.HTTP_422_UNPROCESSABLE_ENTITY,
        {"detail": exc.errors()[0]["msg"], "error": "validation_error"},
    )


@app.exception_handler(404)
async def not_found_handler(request: Request, exc):
    detail = getattr(exc, "detail", None) or "Resource not found"
    return _error(request, status.HTTP_404_NOT_FOUND, {"detail": detail, "path": request.url.path})


@app.exception_handler(500)
async def internal_error_handler(request: Request, exc):
    logger.error("Internal server error", request_id=_request_id(request), path=request.url.path, exc_info=exc)
    return _error(request, status.HTTP_500_INTERNAL_SERVER_ERROR, {"detail": "Internal server error"})


app.include_router(health_router, tags=["health"])
for router, tag in (
    (classify_router, "classify"),
    (spaces_router, "spaces"),
    (probe_router, "probe"),
    (demos_router, "demos"),
):
    app.include_router(router, prefix=f"/api/{settings.api_version}", tags=[tag])


@app.get("/")
async def root():
    return {
        "app": settings.app_name,
        "version": __version__,
        "environment": settings.app_env,
        "api_version": settings.api_version,
        "demos": f"/api/{settings.api_version}/demos",
    }
