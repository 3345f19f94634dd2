from fastapi import APIRouter, HTTPException
from typing import Callable
import logging
import time

from ...core.config import settings
from ...core.errors import OperadError
from ...models.schemas import (
    ConvolveRequest,
    DecomposeRequest,
    ExpressionResponse,
    FourierRequest,
    LieDimensionResponse,
    OutputFormat,
    ResidueRequest,
    VerifyRequest,
    VerifyResponse,
)
from ...services.commands import (
    CommandResult,
    convolve_command,
    decompose_command,
    fourier_command,
    residue_command,
)
from ...services.lie_check import classical_dimension, connected_forests, line_to_bracket
from ...services.suites import run_suite

logger = logging.getLogger(__name__)

# Create router
router = APIRouter()

MAX_LIE_ARITY = 6


def _respond(compute: Callable[[], CommandResult]) -> ExpressionResponse:
    """Run a command, turning domain errors into 400 responses"""
    start_time = time.time()
    try:
        outcome = compute()
    except OperadError as e:
        logger.info(f"Rejected request: {type(e).__name__}: {e}")
        raise HTTPException(status_code=400, detail=str(e))
    return ExpressionResponse(result=outcome.result, n=outcome.n, processing_time=time.time() - start_time)


@router.post("/decompose", response_model=ExpressionResponse)
async def decompose(request: DecomposeRequest):
    """Coordinates of a graph in the line basis"""
    return _respond(lambda: decompose_command(request.graph))


@router.post("/residue", response_model=ExpressionResponse)
async def residue(request: ResidueRequest):
    """Iterated residue along one line"""
    return _respond(lambda: residue_command(request.expr, request.line, request.n))


@router.post("/fourier", response_model=ExpressionResponse)
async def fourier(request: FourierRequest):
    """Forest Fourier transform of a function"""
    return _respond(lambda: fourier_command(request.expr, request.forest))


@router.post("/convolve", response_model=ExpressionResponse)
async def convolve(request: ConvolveRequest):
    """Convolution product of a w-function and a Lambda-polynomial"""
    return _respond(lambda: convolve_command(request.f, request.q, request.p))


@router.get("/lie-dim/{n}", response_model=LieDimensionResponse)
async def lie_dimension(n: int):
    """Dimension of the classical operations on the trivial module, with the bracket basis"""
    if not 1 <= n <= MAX_LIE_ARITY:
        raise HTTPException(status_code=400, detail=f"n must be between 1 and {MAX_LIE_ARITY}")
    return LieDimensionResponse(
        n=n,
        dimension=classical_dimension(n),
        bracket_words=[str(line_to_bracket(forest)) for forest in connected_forests(n)],
    )


@router.post("/verify", response_model=VerifyResponse)
async def verify(request: VerifyRequest):
    """Run a verification suite and return its reports"""
    seed = settings.DEFAULT_SEED if request.seed is None else request.seed
    try:
        run = run_suite(request.suite, request.n, seed, OutputFormat.JSON)
    except OperadError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return VerifyResponse(
        seed=seed,
        passed=run.exit_code == 0,
        reports=[report.to_json_dict() for report in run.reports],
    )
