"""Adapter interface and registry.

An adapter wraps one segmentation model. Real models are heavyweight
external dependencies, so the repository ships only the demo adapter;
plug a real one in by implementing :class:`SegmentationAdapter` and
registering it before server start.

Adapter outputs are plain dicts per mask:

    {"mask": HxW bool array,          # required
     "score": float | None,           # model confidence if it has one
     "logits": HxW float array | None,# else a logit map to synthesize from
     "text": str}                     # the answer/explanation

The server sorts candidates by confidence, truncates to the request's
``max_candidates``, and validates the response against the protocol
before sending.
"""

from __future__ import annotations


class SegmentationAdapter:
    """Interface: turn (image, query) into raw mask proposals."""

    name = "base"

    def segment(self, image, query: str, max_candidates: int):
        """Return a list of mask dicts (see module docstring)."""
        raise NotImplementedError


ADAPTERS: dict = {}


def register_adapter(name: str, factory) -> None:
    ADAPTERS[name] = factory


def make_adapter(name: str) -> SegmentationAdapter:
    if name not in ADAPTERS:
        raise ValueError(f"unknown adapter {name!r}; registered: {sorted(ADAPTERS)}")
    return ADAPTERS[name]()
