"""Wire-protocol schema checks (v1).

The server validates every response against these checks before sending,
so a misbehaving adapter can never leak a malformed payload.
"""

from __future__ import annotations

import base64
import io

from PIL import Image


class ProtocolViolation(Exception):
    pass


def validate_request(body) -> None:
    if not isinstance(body, dict):
        raise ProtocolViolation("request body must be a JSON object")
    for key, kind in (("image_png_base64", str), ("query", str)):
        if key not in body:
            raise ProtocolViolation(f"request missing field '{key}'")
        if not isinstance(body[key], kind):
            raise ProtocolViolation(f"request field '{key}' must be a {kind.__name__}")
    if not body["query"].strip():
        raise ProtocolViolation("request field 'query' must be non-empty")
    max_candidates = body.get("max_candidates", 1)
    if not isinstance(max_candidates, int) or max_candidates < 1:
        raise ProtocolViolation("request field 'max_candidates' must be an integer >= 1")
    try:
        decode_image(body["image_png_base64"])
    except Exception as exc:
        raise ProtocolViolation(f"request image is not decodable PNG: {exc}") from exc


def decode_image(b64: str):
    raw = base64.b64decode(b64)
    return Image.open(io.BytesIO(raw)).convert("RGB")


def validate_response(body, width: int, height: int) -> None:
    """Check a response payload against the v1 schema for a WxH request."""
    if not isinstance(body, dict) or "candidates" not in body:
        raise ProtocolViolation("response must carry a 'candidates' array")
    candidates = body["candidates"]
    if not isinstance(candidates, list):
        raise ProtocolViolation("'candidates' must be an array")
    previous = None
    for i, item in enumerate(candidates):
        for key in ("mask_png_base64", "confidence", "text"):
            if key not in item:
                raise ProtocolViolation(f"candidate {i} missing field '{key}'")
        try:
            mask = Image.open(io.BytesIO(base64.b64decode(item["mask_png_base64"])))
        except Exception as exc:
            raise ProtocolViolation(f"candidate {i} mask not decodable: {exc}") from exc
        if mask.size != (width, height):
            raise ProtocolViolation(
                f"candidate {i} mask is {mask.size}, image is {(width, height)}"
            )
        if mask.mode != "L":
            raise ProtocolViolation(f"candidate {i} mask must be 8-bit grayscale")
        conf = item["confidence"]
        if not isinstance(conf, (int, float)) or not 0.0 <= conf <= 1.0:
            raise ProtocolViolation(f"candidate {i} confidence out of range: {conf}")
        if previous is not None and conf > previous:
            raise ProtocolViolation("candidates must be sorted by confidence descending")
        previous = conf
        if not isinstance(item["text"], str):
            raise ProtocolViolation(f"candidate {i} text must be a string")
        if "bbox" in item and item["bbox"] is not None:
            bbox = item["bbox"]
            if (
                not isinstance(bbox, (list, tuple))
                or len(bbox) != 4
                or not all(isinstance(v, int) for v in bbox)
            ):
                raise ProtocolViolation(f"candidate {i} bbox must be 4 integers")
            x0, y0, x1, y1 = bbox
            if not (0 <= x0 <= x1 <= width and 0 <= y0 <= y1 <= height):
                raise ProtocolViolation(f"candidate {i} bbox out of bounds: {bbox}")
