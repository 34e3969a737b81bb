"""MCP tool server for running HA-NEAT experiments remotely."""

import logging
from contextlib import asynccontextmanager
from typing import List

from mcp.server.fastmcp import FastMCP
from starlette.applications import Starlette
from starlette.middleware import Middleware
from starlette.middleware.cors import CORSMiddleware
from starlette.responses import JSONResponse
from starlette.routing import Mount, Route

from . import __version__
from .activation import hidden_catalog
from .config import Settings, settings
from .middleware import ToolAccessMiddleware
from .tools import register_tools

logger = logging.getLogger(__name__)


def build_mcp(cfg: Settings = settings) -> FastMCP:
    mcp = FastMCP("HA-NEAT experiments")
    register_tools(mcp, cfg)
    return mcp


def _middleware(cfg: Settings) -> List[Middleware]:
    # first entry is outermost
    stack = []
    if cfg.allowed_origins:
        stack.append(
            Middleware(
                CORSMiddleware,
                allow_origins=["*"] if "*" in cfg.allowed_origins else cfg.allowed_origins,
                allow_methods=["GET", "POST", "DELETE"],
                allow_headers=["*"],
            )
        )
    stack.append(Middleware(ToolAccessMiddleware, cfg=cfg))
    return stack


def build_app(cfg: Settings = settings) -> Starlette:
    """Starlette app serving the experiment tools over streamable HTTP at /mcp."""
    mcp = build_mcp(cfg)

    async def health(_request):
        return JSONResponse(
            {
                "status": "ok",
                "version": __version__,
                "activations": [kind.label for kind in hidden_catalog()],
            }
        )

    @asynccontextmanager
    async def lifespan(_app: Starlette):
        logger.info("Tool server up; artifacts go to %s", cfg.out_dir)
        async with mcp.session_manager.run():
            yield

    routes = [
        Route("/health", health),
        # the MCP sub-app routes /mcp itself
        Mount("/", app=mcp.streamable_http_app()),
    ]
    return Starlette(routes=routes, middleware=_middleware(cfg), lifespan=lifespan)
