"""Demo adapter behavior against an independent flood-fill oracle."""

import numpy as np
import pytest
from PIL import Image

from segbridge.demo import LUMINANCE_THRESHOLD, DemoAdapter


def flood_fill_regions(bright):
    """8-connected components by plain BFS; independent of scipy."""
    h, w = bright.shape
    seen = np.zeros_like(bright, dtype=bool)
    regions = []
    for sy in range(h):
        for sx in range(w):
            if not bright[sy, sx] or seen[sy, sx]:
                continue
            queue = [(sy, sx)]
            seen[sy, sx] = True
            pixels = []
            while queue:
                y, x = queue.pop()
                pixels.append((y, x))
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = y + dy, x + dx
                        if 0 <= ny < h and 0 <= nx < w and bright[ny, nx] and not seen[ny, nx]:
                            seen[ny, nx] = True
                            queue.append((ny, nx))
            regions.append(set(pixels))
    return regions


def sample_image():
    img = np.zeros((24, 24, 3), dtype=np.uint8)
    img[2:8, 2:10] = 200  # 48 px region
    img[14:20, 14:18] = 255  # 24 px region
    img[10, 0] = 240  # below MIN_REGION_PIXELS, dropped
    return img


class TestDemoAdapter:
    def test_regions_match_flood_fill_oracle(self):
        img = sample_image()
        got = DemoAdapter().segment(img, "bright region", 5)
        gray = np.asarray(Image.fromarray(img).convert("L"))
        oracle = flood_fill_regions(gray >= LUMINANCE_THRESHOLD)
        oracle = sorted((r for r in oracle if len(r) >= 4), key=len, reverse=True)
        assert len(got) == len(oracle)
        for cand, region in zip(got, oracle):
            assert {(y, x) for y, x in zip(*np.nonzero(cand["mask"]))} == region

    def test_confidence_is_region_share_sorted_descending(self):
        img = sample_image()
        got = DemoAdapter().segment(img, "q", 5)
        total = 24 * 24
        assert got[0]["score"] == pytest.approx(48 / total)
        assert got[1]["score"] == pytest.approx(24 / total)
        scores = [c["score"] for c in got]
        assert scores == sorted(scores, reverse=True)

    def test_max_candidates_respected(self):
        img = sample_image()
        assert len(DemoAdapter().segment(img, "q", 1)) == 1

    def test_dark_image_empty(self):
        img = np.full((16, 16, 3), 30, dtype=np.uint8)
        assert DemoAdapter().segment(img, "q", 3) == []

    def test_deterministic(self):
        img = sample_image()
        a = DemoAdapter().segment(img, "q", 5)
        b = DemoAdapter().segment(img, "q", 5)
        assert len(a) == len(b)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x["mask"], y["mask"])
            assert x["score"] == y["score"]
            assert x["text"] == y["text"]
