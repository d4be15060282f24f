"""GPU-free demo adapter: bright connected regions of the image.

Deliberately simple so its behavior can be recomputed by hand: grayscale
luminance, fixed threshold at 128, 8-connected components, largest
regions first. Confidence is the region's share of the image area —
large salient regions score higher. The query text is echoed into the
answer so callers can see what was asked.
"""

from __future__ import annotations

import numpy as np
from PIL import Image
from scipy import ndimage

from .adapters import SegmentationAdapter, register_adapter

LUMINANCE_THRESHOLD = 128
MIN_REGION_PIXELS = 4


class DemoAdapter(SegmentationAdapter):
    name = "demo"

    def segment(self, image, query: str, max_candidates: int):
        arr = np.asarray(image)
        gray = np.asarray(Image.fromarray(arr).convert("L"))
        bright = gray >= LUMINANCE_THRESHOLD
        labeled, count = ndimage.label(bright, structure=np.ones((3, 3), dtype=int))
        if count == 0:
            return []
        sizes = ndimage.sum_labels(np.ones_like(labeled), labeled, range(1, count + 1))
        order = np.argsort(-sizes, kind="stable")
        total = float(gray.size)
        out = []
        for rank, idx in enumerate(order[:max_candidates]):
            size = float(sizes[idx])
            if size < MIN_REGION_PIXELS:
                continue
            mask = labeled == (idx + 1)
            out.append(
                {
                    "mask": mask,
                    "score": size / total,
                    "logits": None,
                    "text": f"bright region {rank + 1} ({size / total:.1%} of the image) for: {query}",
                }
            )
        return out


register_adapter("demo", DemoAdapter)
