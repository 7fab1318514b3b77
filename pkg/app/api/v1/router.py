"""
API v1 router.

Agrupa todos los endpoints de la versión 1 de la API.
"""

from fastapi import APIRouter

from app.api.v1.endpoints import diagrams, graphs, training

api_router = APIRouter()

# Incluir routers de endpoints
api_router.include_router(diagrams.router, prefix="/diagrams", tags=["Diagrams"])
api_router.include_router(graphs.router, prefix="/graphs", tags=["Graphs"])
api_router.include_router(training.router)
