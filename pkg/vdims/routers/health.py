from fastapi import APIRouter

from vdims import __version__
from vdims.config import get_settings
from vdims.schemas.models import HealthResponse

router = APIRouter()


@router.get("/health", response_model=HealthResponse)
async def health_check() -> HealthResponse:
    """
    Health check endpoint for monitoring.
    """
    settings = get_settings()

    return HealthResponse(
        status="ok",
        version=__version__,
        environment=settings.environment,
    )
