from fastapi import APIRouter
from .endpoints import operad

api_router = APIRouter()
api_router.include_router(operad.router, prefix="/operad", tags=["operad"])
