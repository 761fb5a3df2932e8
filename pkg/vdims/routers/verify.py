import asyncio
import logging

from fastapi import APIRouter, Query

from vdims.schemas.models import VerifyResponse
from vdims.services.runner import RunnerError, run_all, verify_against_golden

router = APIRouter()
logger = logging.getLogger(__name__)


@router.get("/verify", response_model=VerifyResponse)
async def verify(
    max_degree: int = Query(2, ge=1, description="Verify n = 1..max_degree"),
) -> VerifyResponse:
    """
    Run the 18-case grid and compare it with the published tables.
    """
    try:
        reports = await asyncio.to_thread(run_all, max_degree)
        verdict = verify_against_golden(reports, max_degree)
        return VerifyResponse(success=verdict.ok, data=verdict)

    except RunnerError as e:
        return VerifyResponse(success=False, error=str(e))

    except Exception as e:
        logger.exception("Unexpected verify error")
        return VerifyResponse(success=False, error=f"Verification failed: {e}")
