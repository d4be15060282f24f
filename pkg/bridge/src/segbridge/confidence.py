"""Per-mask confidence synthesis for models that lack a native score."""

from __future__ import annotations

import numpy as np


def confidence_synthesize(score=None, logits=None, mask=None) -> float:
    """Deterministic confidence in [0, 1] for one mask.

    A native model score passes through clamped. Without one, the mean
    foreground probability under the model's logit map is used (sigmoid of
    the logits over the mask's pixels; the whole map when no mask is
    given). A uniformly-zero logit map therefore yields 0.5.
    """
    if score is not None:
        return float(min(max(score, 0.0), 1.0))
    if logits is None:
        raise ValueError("need a score or a logit map")
    logits = np.asarray(logits, dtype=np.float64)
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.any():
            logits = logits[mask]
    prob = 1.0 / (1.0 + np.exp(-logits))
    return float(min(max(prob.mean(), 0.0), 1.0))
