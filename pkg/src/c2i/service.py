"""Stateless HTTP facade over render and validate.

POST /v1/render    {spec, assets: {key: base64 png}} -> {png, prompt, spec_digest}
POST /v1/validate  same body -> validation report
GET  /v1/health    liveness + version

Handlers are pure given the request body; responses for a fixture are
byte-identical to library renders of the same inputs.
"""

from __future__ import annotations

import base64
import binascii
import json
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import __version__
from .canvas_spec import parse_spec_doc, validate_spec
from .compositor import render_canvas
from .errors import AssetError, RenderError, SpecError
from .imagebuf import ImageBuffer

MAX_ASSET_BYTES = 64 * 2**20  # decoded total per request


@dataclass(frozen=True)
class RenderRequest:
    spec_doc: dict
    assets: dict  # key -> decoded png bytes


@dataclass(frozen=True)
class RenderResponse:
    png: str  # base64
    prompt: str
    spec_digest: str


class _BadBody(Exception):
    pass


async def _read_request(request: Request) -> RenderRequest:
    try:
        body = json.loads(await request.body())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise _BadBody(f"body is not valid JSON: {exc}") from None
    if not isinstance(body, dict) or "spec" not in body:
        raise _BadBody('body must be an object with a "spec" key')
    raw_assets = body.get("assets", {})
    if not isinstance(raw_assets, dict):
        raise _BadBody('"assets" must map keys to base64 PNG strings')
    assets = {}
    for key, value in raw_assets.items():
        if not isinstance(value, str):
            raise _BadBody(f"asset {key!r} must be a base64 string")
        try:
            assets[key] = base64.b64decode(value, validate=True)
        except (binascii.Error, ValueError) as exc:
            raise _BadBody(f"asset {key!r} is not valid base64: {exc}") from None
    return RenderRequest(spec_doc=body["spec"], assets=assets)


def _decode_assets(request: RenderRequest):
    total = sum(len(v) for v in request.assets.values())
    if total > MAX_ASSET_BYTES:
        return None, JSONResponse(
            status_code=413,
            content={"error": f"decoded assets exceed {MAX_ASSET_BYTES} bytes"},
        )
    decoded = {}
    for key, blob in request.assets.items():
        try:
            decoded[key] = ImageBuffer.from_png_bytes(blob)
        except AssetError as exc:
            return None, JSONResponse(
                status_code=422,
                content={"error": f"asset {key!r}: {exc}"},
            )
    return decoded, None


def _spec_error_response(exc: SpecError) -> JSONResponse:
    return JSONResponse(
        status_code=422,
        content={"error": str(exc), "path": exc.path},
    )


def create_app(static_dir=None) -> FastAPI:
    app = FastAPI(title="c2i canvas service", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(_BadBody)
    async def bad_body_handler(request, exc):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/v1/health")
    async def health():
        return {"status": "ok", "version": __version__}

    @app.post("/v1/render")
    async def render(request: Request):
        req = await _read_request(request)
        assets, error = _decode_assets(req)
        if error is not None:
            return error
        try:
            spec = parse_spec_doc(req.spec_doc)
        except SpecError as exc:
            return _spec_error_response(exc)
        try:
            rendered = render_canvas(spec, assets)
        except RenderError as exc:
            return JSONResponse(status_code=422, content=exc.report.to_doc())
        return {
            "png": base64.b64encode(rendered.image.to_png_bytes()).decode("ascii"),
            "prompt": rendered.prompt,
            "spec_digest": rendered.provenance,
        }

    @app.post("/v1/validate")
    async def validate(request: Request):
        req = await _read_request(request)
        assets, error = _decode_assets(req)
        if error is not None:
            return error
        try:
            spec = parse_spec_doc(req.spec_doc)
        except SpecError as exc:
            return _spec_error_response(exc)
        return validate_spec(spec, assets).to_doc()

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
