import os

from fastapi import APIRouter
from pydantic import BaseModel

from app.config import default_workers, settings
from app.routers.carve import current_progress

router = APIRouter(tags=["health"])


class HealthResponse(BaseModel):
    status: str
    cpu_count: int
    default_workers: int
    algorithm: str
    job_running: bool


@router.get("/health", response_model=HealthResponse)
async def healthcheck() -> HealthResponse:
    """Check that the API is up and report scan defaults."""
    progress = current_progress()
    return HealthResponse(
        status="ok",
        cpu_count=os.cpu_count() or 1,
        default_workers=default_workers(),
        algorithm=settings.algorithm,
        job_running=bool(progress and progress.in_progress),
    )
