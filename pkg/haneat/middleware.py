from typing import Sequence

from starlette.middleware.base import BaseHTTPMiddleware
from starlette.requests import Request
from starlette.responses import JSONResponse, PlainTextResponse

from .config import Settings


def origin_allowed(origin: str | None, allowed: Sequence[str]) -> bool:
    """Return True when origin matches the allowlist or a wildcard."""
    if not origin:
        return True  # curl and MCP clients send no Origin
    if not allowed:
        return False
    return "*" in allowed or origin in allowed


def bearer_token(header: str) -> str | None:
    scheme, _, token = header.partition(" ")
    if scheme.lower() != "bearer":
        return None
    return token.strip() or None


class ToolAccessMiddleware(BaseHTTPMiddleware):
    """Guard /mcp with the origin allowlist and, when configured, bearer API keys."""

    def __init__(self, app, cfg: Settings):
        super().__init__(app)
        self.cfg = cfg

    async def dispatch(self, request: Request, call_next):
        if not request.url.path.startswith("/mcp"):
            return await call_next(request)
        if not origin_allowed(request.headers.get("origin"), self.cfg.allowed_origins):
            return PlainTextResponse("Origin not allowed.", status_code=403)
        if self.cfg.mcp_api_keys:
            token = bearer_token(request.headers.get("authorization", ""))
            if token not in self.cfg.mcp_api_keys:
                return JSONResponse({"error": "Unauthorized"}, status_code=401)
        return await call_next(request)
