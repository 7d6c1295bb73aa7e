"""Axis-aligned box arithmetic and the IoU metric."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle in continuous pixel coordinates.

    (x1, y1) is the top-left corner, (x2, y2) the bottom-right corner.
    Coordinates must be finite and ordered (x1 <= x2, y1 <= y2).
    """

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        for v in (self.x1, self.y1, self.x2, self.y2):
            if not math.isfinite(v):
                raise ValueError(f"box coordinates must be finite: {self!r}")
        if self.x2 < self.x1 or self.y2 < self.y1:
            raise ValueError(f"box corners out of order: {self!r}")

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)


def area(b: Box) -> float:
    """Box area in pixels squared; zero for degenerate boxes."""
    return (b.x2 - b.x1) * (b.y2 - b.y1)


def iou(a: Box, b: Box) -> float:
    """Intersection over union of two boxes.

    Boxes sharing only an edge intersect with area 0. When both boxes are
    degenerate (union area 0) the result is defined as 0 so downstream
    sorting stays total.
    """
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    inter = iw * ih if (iw > 0 and ih > 0) else 0.0
    union = area(a) + area(b) - inter
    if union <= 0:
        return 0.0
    return inter / union
