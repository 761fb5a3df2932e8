from contextlib import asynccontextmanager

from fastapi import FastAPI

from vdims import __version__
from vdims.config import configure_logging, get_settings
from vdims.routers import dimensions, health, verify


@asynccontextmanager
async def lifespan(app: FastAPI):
    """
    Lifespan context manager for startup/shutdown events.
    """
    # Startup: apply log level
    configure_logging(get_settings())
    yield


def create_app() -> FastAPI:
    """
    Create and configure the FastAPI application.
    """
    app = FastAPI(
        title="Virtual Knot Dimensions API",
        description="Dimension tables of finite type invariants and weight systems of virtual knots",
        version=__version__,
        lifespan=lifespan,
    )

    # Include routers
    app.include_router(health.router, tags=["Health"])
    app.include_router(dimensions.router, tags=["Dimensions"])
    app.include_router(verify.router, tags=["Verify"])

    return app


# Create the app instance
app = create_app()
