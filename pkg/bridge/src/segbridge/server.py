"""HTTP host for the v1 segmentation wire protocol."""

from __future__ import annotations

import argparse
import base64
import io
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from PIL import Image

from .adapters import ADAPTERS, make_adapter
from .confidence import confidence_synthesize
from .protocol import ProtocolViolation, decode_image, validate_request, validate_response
from . import demo  # noqa: F401  (registers the demo adapter)


@dataclass(frozen=True)
class BridgeConfig:
    adapter: str = "demo"
    device: str = "cpu"
    host: str = "127.0.0.1"
    port: int = 8490

    def __post_init__(self):
        if self.adapter not in ADAPTERS:
            raise ValueError(
                f"unknown adapter {self.adapter!r}; registered: {sorted(ADAPTERS)}"
            )


def encode_mask(mask: np.ndarray) -> str:
    img = Image.fromarray(mask.astype(np.uint8) * 255, mode="L")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def tight_bbox(mask: np.ndarray):
    ys, xs = np.nonzero(mask)
    if len(xs) == 0:
        return [0, 0, 0, 0]
    return [int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1]


def create_bridge_app(adapter) -> FastAPI:
    app = FastAPI(title="segbridge")

    @app.post("/v1/segment")
    async def segment(request: Request):
        try:
            body = await request.json()
        except Exception:
            return JSONResponse({"error": "body is not JSON"}, status_code=400)
        try:
            validate_request(body)
        except ProtocolViolation as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        image = decode_image(body["image_png_base64"])
        width, height = image.size
        max_candidates = int(body.get("max_candidates", 1))
        try:
            proposals = adapter.segment(np.asarray(image), body["query"], max_candidates)
            candidates = []
            for item in proposals:
                confidence = confidence_synthesize(
                    score=item.get("score"),
                    logits=item.get("logits"),
                    mask=item.get("mask"),
                )
                if confidence <= 0.0:
                    continue
                candidates.append(
                    {
                        "mask_png_base64": encode_mask(item["mask"]),
                        "confidence": confidence,
                        "text": str(item.get("text", "")),
                        "bbox": tight_bbox(item["mask"]),
                    }
                )
            candidates.sort(key=lambda c: -c["confidence"])
            payload = {"candidates": candidates[:max_candidates]}
            validate_response(payload, width, height)
        except ProtocolViolation as exc:
            return JSONResponse({"error": f"adapter broke the protocol: {exc}"}, status_code=500)
        except Exception as exc:
            return JSONResponse({"error": f"adapter failed: {exc}"}, status_code=500)
        return JSONResponse(payload)

    return app


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="segbridge", description="Demo segmentation backend server"
    )
    parser.add_argument("--adapter", default="demo", choices=sorted(ADAPTERS))
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8490)
    args = parser.parse_args(argv)
    config = BridgeConfig(adapter=args.adapter, host=args.host, port=args.port)
    adapter = make_adapter(config.adapter)

    import uvicorn

    uvicorn.run(create_bridge_app(adapter), host=config.host, port=config.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
