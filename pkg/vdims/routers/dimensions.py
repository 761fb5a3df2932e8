import asyncio
import logging

from fastapi import APIRouter, Query

from vdims.config import get_settings
from vdims.schemas.models import CaseInfo, CasesResponse, DimensionsResponse
from vdims.services.diagrams import SkeletonKind
from vdims.services.golden import GOLDEN
from vdims.services.linalg import InconclusiveRankError, LinalgError
from vdims.services.polyak import PolyakError, move_templates
from vdims.services.runner import DegreeLimitError, RunnerError, parse_spaces, run_case
from vdims.services.weight_relations import CaseSpec, R1Mode, R23Mode, all_cases

router = APIRouter()
logger = logging.getLogger(__name__)


@router.get("/cases", response_model=CasesResponse)
async def list_cases() -> CasesResponse:
    """
    List the 18 variants with their relations, moves and expected dimensions.
    """
    data = []
    for case in all_cases():
        moves = list(dict.fromkeys(t.move.value for t in move_templates(case)))
        data.append(
            CaseInfo(
                case=case.label,
                skeleton=case.kind.value,
                r23=case.r23.value,
                r1=case.r1.value,
                relation_families=[f.value for f in case.families()],
                moves=moves,
                expected=list(GOLDEN.row(case)),
            )
        )
    return CasesResponse(success=True, data=data)


@router.get("/dimensions", response_model=DimensionsResponse)
async def get_dimensions(
    skeleton: SkeletonKind = Query(..., description="round, long or descending"),
    r23: R23Mode = Query(R23Mode.STANDARD, description="standard, braid or r2only"),
    r1: R1Mode = Query(R1Mode.MOD_R1, description="mod or no"),
    max_degree: int | None = Query(None, ge=0, description="Compute n = 0..max_degree (default DEFAULT_MAX_DEGREE)"),
    space: str = Query("both", pattern="^(w|v|both)$"),
) -> DimensionsResponse:
    """
    Compute (or read from the cache) the dimensions of one case.

    Heavy degrees follow the same opt-in gate as the command line.
    """
    case = CaseSpec(skeleton, r23, r1)
    if max_degree is None:
        max_degree = get_settings().default_max_degree

    try:
        report = await asyncio.to_thread(run_case, case, max_degree, parse_spaces(space))
        return DimensionsResponse(success=True, data=report)

    except DegreeLimitError as e:
        return DimensionsResponse(success=False, error=str(e), code="DEGREE_LIMIT")

    except InconclusiveRankError as e:
        return DimensionsResponse(success=False, error=str(e), code="INCONCLUSIVE_RANK")

    except (RunnerError, LinalgError, PolyakError) as e:
        return DimensionsResponse(success=False, error=str(e))

    except Exception as e:
        logger.exception("Unexpected error computing %s", case.label)
        return DimensionsResponse(success=False, error=f"Failed to compute dimensions: {e}")
