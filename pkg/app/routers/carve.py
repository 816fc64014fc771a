import asyncio
import logging
from pathlib import Path

from fastapi import APIRouter, BackgroundTasks, HTTPException
from pydantic import BaseModel, Field

from app.errors import CarveError
from app.pipeline import carve_image
from app.search import Backend

logger = logging.getLogger(__name__)
router = APIRouter(prefix="/carve", tags=["carve"])


class CarveRequest(BaseModel):
    image: str = Field(description="Path of the raw image on the server")
    signatures: str | None = Field(
        default=None, description="paper, canonical, or a config file path; defaults to PARCARVE_SIGNATURES"
    )
    algorithm: Backend = Backend.AC
    workers: int | None = Field(default=None, ge=1, description="Defaults to hardware parallelism")
    chunk_size: int | None = Field(default=None, ge=1)
    output_dir: str | None = Field(default=None, description="Defaults to PARCARVE_OUTPUT_DIR")
    extract_failed: bool = False
    force: bool = False


class CarveJobResult(BaseModel):
    started: bool
    message: str


class CarveProgress(BaseModel):
    image: str
    in_progress: bool
    regions: int = 0
    extracted: int = 0
    manifest: str | None = None
    error: str | None = None


# One carve job at a time; the latest job's state
_carve_progress: CarveProgress | None = None


def current_progress() -> CarveProgress | None:
    return _carve_progress


async def _run_carve_job(request: CarveRequest) -> None:
    """Background task running the whole carve pipeline off the event loop."""
    global _carve_progress

    _carve_progress = CarveProgress(image=request.image, in_progress=True)
    logger.info("Starting carve job for %s", request.image)

    try:
        outcome = await asyncio.to_thread(
            carve_image,
            request.image,
            signatures=request.signatures,
            algorithm=request.algorithm.value,
            workers=request.workers,
            chunk_size=request.chunk_size,
            output_dir=request.output_dir,
            extract_failed=request.extract_failed,
            force=request.force,
        )
    except (CarveError, OSError, ValueError) as e:
        logger.warning("Carve job for %s failed: %s", request.image, e)
        _carve_progress = CarveProgress(image=request.image, in_progress=False, error=str(e))
        return
    except Exception as e:
        logger.exception("Carve job for %s crashed", request.image)
        _carve_progress = CarveProgress(image=request.image, in_progress=False, error=str(e))
        return

    _carve_progress = CarveProgress(
        image=request.image,
        in_progress=False,
        regions=len(outcome.manifest.records),
        extracted=len(outcome.manifest.extracted),
        manifest=str(outcome.manifest_path),
    )
    logger.info("Carve job complete: %d region(s)", _carve_progress.regions)


@router.post("", response_model=CarveJobResult)
async def start_carve(request: CarveRequest, background_tasks: BackgroundTasks) -> CarveJobResult:
    """Start carving an image in the background."""
    global _carve_progress

    if _carve_progress and _carve_progress.in_progress:
        return CarveJobResult(
            started=False,
            message=f"Carve of {_carve_progress.image} already in progress",
        )

    if not Path(request.image).is_file():
        raise HTTPException(status_code=404, detail=f"Image not found: {request.image}")

    # Claim the slot before the task starts so a second POST is refused
    _carve_progress = CarveProgress(image=request.image, in_progress=True)
    background_tasks.add_task(_run_carve_job, request)
    return CarveJobResult(started=True, message=f"Started carving {request.image} in background")


@router.get("/progress", response_model=CarveProgress | None)
async def get_carve_progress() -> CarveProgress | None:
    """Get the state of the current or most recent carve job."""
    return _carve_progress
