import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from app.config import setup_logging
from app.errors import CarveError
from app.routers import carve, health, signatures

setup_logging()
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    logger.info("Carving API starting")
    yield
    logger.info("Shutting down")


app = FastAPI(
    title="parcarve API",
    description="Run signature-based file carving jobs over raw disk images",
    version="0.1.0",
    lifespan=lifespan,
)


@app.exception_handler(CarveError)
async def carve_error_handler(request: Request, exc: CarveError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"detail": str(exc)})


app.include_router(health.router, prefix="/api")
app.include_router(signatures.router, prefix="/api")
app.include_router(carve.router, prefix="/api")
