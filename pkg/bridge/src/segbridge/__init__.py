"""Reference server for the mask-segmentation wire protocol.

Hosts pluggable adapters behind ``POST /v1/segment``; ships a GPU-free
demo adapter so the full pipeline runs without any model weights.
"""

from .adapters import ADAPTERS, SegmentationAdapter, register_adapter
from .confidence import confidence_synthesize
from .demo import DemoAdapter
from .protocol import ProtocolViolation, validate_response
from .server import BridgeConfig, create_bridge_app, main

__all__ = [
    "ADAPTERS",
    "BridgeConfig",
    "DemoAdapter",
    "ProtocolViolation",
    "SegmentationAdapter",
    "confidence_synthesize",
    "create_bridge_app",
    "main",
    "register_adapter",
    "validate_response",
]
