"""Axis-aligned box math: IoU / GIoU with hand gradients, L1 distance, greedy NMS.

Boxes come in two parameterizations: corner form (x1, y1, x2, y2) and center
form (cx, cy, w, h).  Gradients are returned as length-4 arrays ordered like
the box fields.  Degenerate (zero-area) pairs define IoU = 0 instead of NaN,
so collapsed predictions cannot poison a loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, ValidationError


@dataclass(frozen=True)
class BoxXYXY:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        for name in ("x1", "y1", "x2", "y2"):
            if not np.isfinite(getattr(self, name)):
                raise ValidationError(f"BoxXYXY.{name} is not finite")
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise ValidationError(
                f"BoxXYXY must satisfy x1 <= x2 and y1 <= y2, got {self}"
            )

    def to_cxcywh(self) -> "BoxCXCYWH":
        return BoxCXCYWH(
            cx=(self.x1 + self.x2) / 2.0,
            cy=(self.y1 + self.y2) / 2.0,
            w=self.x2 - self.x1,
            h=self.y2 - self.y1,
        )

    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)


@dataclass(frozen=True)
class BoxCXCYWH:
    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("cx", "cy", "w", "h"):
            if not np.isfinite(getattr(self, name)):
                raise ValidationError(f"BoxCXCYWH.{name} is not finite")
        if self.w < 0 or self.h < 0:
            raise ValidationError(f"BoxCXCYWH must have w >= 0 and h >= 0, got {self}")

    def to_xyxy(self) -> BoxXYXY:
        return BoxXYXY(
            x1=self.cx - self.w / 2.0,
            y1=self.cy - self.h / 2.0,
            x2=self.cx + self.w / 2.0,
            y2=self.cy + self.h / 2.0,
        )


class _Overlap:
    """Intersection/union/hull values and their coordinate partials.

    Partials are w.r.t. (x1, y1, x2, y2) of each box.  Active min/max
    branches at exact coordinate ties resolve toward box a; callers doing
    finite-difference checks must stay away from ties.
    """

    def __init__(self, a: BoxXYXY, b: BoxXYXY):
        iw = min(a.x2, b.x2) - max(a.x1, b.x1)
        ih = min(a.y2, b.y2) - max(a.y1, b.y1)
        self.inter = max(0.0, iw) * max(0.0, ih)
        self.union = a.area() + b.area() - self.inter
        hw = max(a.x2, b.x2) - min(a.x1, b.x1)
        hh = max(a.y2, b.y2) - min(a.y1, b.y1)
        self.hull = hw * hh

        self.d_inter_a = np.zeros(4)
        self.d_inter_b = np.zeros(4)
        if iw > 0.0 and ih > 0.0:
            if a.x1 >= b.x1:
                self.d_inter_a[0] = -ih
            else:
                self.d_inter_b[0] = -ih
            if a.x2 <= b.x2:
                self.d_inter_a[2] = ih
            else:
                self.d_inter_b[2] = ih
            if a.y1 >= b.y1:
                self.d_inter_a[1] = -iw
            else:
                self.d_inter_b[1] = -iw
            if a.y2 <= b.y2:
                self.d_inter_a[3] = iw
            else:
                self.d_inter_b[3] = iw

        d_area_a = np.array(
            [-(a.y2 - a.y1), -(a.x2 - a.x1), (a.y2 - a.y1), (a.x2 - a.x1)]
        )
        d_area_b = np.array(
            [-(b.y2 - b.y1), -(b.x2 - b.x1), (b.y2 - b.y1), (b.x2 - b.x1)]
        )
        self.d_union_a = d_area_a - self.d_inter_a
        self.d_union_b = d_area_b - self.d_inter_b

        self.d_hull_a = np.zeros(4)
        self.d_hull_b = np.zeros(4)
        if a.x1 <= b.x1:
            self.d_hull_a[0] = -hh
        else:
            self.d_hull_b[0] = -hh
        if a.x2 >= b.x2:
            self.d_hull_a[2] = hh
        else:
            self.d_hull_b[2] = hh
        if a.y1 <= b.y1:
            self.d_hull_a[1] = -hw
        else:
            self.d_hull_b[1] = -hw
        if a.y2 >= b.y2:
            self.d_hull_a[3] = hw
        else:
            self.d_hull_b[3] = hw


def iou(a: BoxXYXY, b: BoxXYXY) -> float:
    ov = _Overlap(a, b)
    if ov.union <= 0.0:
        return 0.0
    return ov.inter / ov.union


def iou_with_grad(a: BoxXYXY, b: BoxXYXY) -> tuple[float, np.ndarray, np.ndarray]:
    """IoU plus gradients w.r.t. (x1, y1, x2, y2) of each box."""
    ov = _Overlap(a, b)
    if ov.union <= 0.0:
        return 0.0, np.zeros(4), np.zeros(4)
    u2 = ov.union * ov.union
    da = (ov.d_inter_a * ov.union - ov.inter * ov.d_union_a) / u2
    db = (ov.d_inter_b * ov.union - ov.inter * ov.d_union_b) / u2
    return ov.inter / ov.union, da, db


def giou(a: BoxXYXY, b: BoxXYXY) -> float:
    v, _, _ = giou_with_grad(a, b)
    return v


def giou_with_grad(a: BoxXYXY, b: BoxXYXY) -> tuple[float, np.ndarray, np.ndarray]:
    """GIoU = IoU - (hull - union) / hull, with gradients for both boxes."""
    iou_v, d_iou_a, d_iou_b = iou_with_grad(a, b)
    ov = _Overlap(a, b)
    if ov.hull <= 0.0:
        # Both boxes degenerate at the same point; fall back to plain IoU.
        return iou_v, d_iou_a, d_iou_b
    h2 = ov.hull * ov.hull
    g = iou_v - (ov.hull - ov.union) / ov.hull
    da = d_iou_a + (ov.d_union_a * ov.hull - ov.union * ov.d_hull_a) / h2
    db = d_iou_b + (ov.d_union_b * ov.hull - ov.union * ov.d_hull_b) / h2
    return g, da, db


def l1_box(a: BoxCXCYWH, b: BoxCXCYWH) -> float:
    return abs(a.cx - b.cx) + abs(a.cy - b.cy) + abs(a.w - b.w) + abs(a.h - b.h)


def l1_box_with_grad(a: BoxCXCYWH, b: BoxCXCYWH) -> tuple[float, np.ndarray, np.ndarray]:
    """L1 distance in center form; subgradient convention sign(0) = 0."""
    diff = np.array([a.cx - b.cx, a.cy - b.cy, a.w - b.w, a.h - b.h])
    da = np.sign(diff)
    return float(np.abs(diff).sum()), da, -da


def nms(boxes: list[tuple[BoxXYXY, float]], iou_threshold: float) -> list[int]:
    """Greedy non-maximum suppression.

    Keeps the highest-scoring box, suppresses boxes with IoU strictly above
    the threshold against it, repeats.  Score ties break toward the lower
    original index; returned indices are score-descending.
    """
    for _, score in boxes:
        if not np.isfinite(score):
            raise ValidationError("nms: non-finite score")
    order = sorted(range(len(boxes)), key=lambda i: (-boxes[i][1], i))
    kept: list[int] = []
    suppressed = [False] * len(boxes)
    for i in order:
        if suppressed[i]:
            continue
        kept.append(i)
        for j in order:
            if j == i or suppressed[j]:
                continue
            if iou(boxes[i][0], boxes[j][0]) > iou_threshold:
                suppressed[j] = True
    return kept


# Vectorized helpers used by assignment and evaluation (array-in, array-out).

def cxcywh_to_xyxy_array(boxes: np.ndarray) -> np.ndarray:
    """(n, 4) center-form rows -> (n, 4) corner-form rows."""
    if boxes.ndim != 2 or boxes.shape[1] != 4:
        raise ShapeError(f"expected (n, 4) box array, got {boxes.shape}")
    half_w = boxes[:, 2] / 2.0
    half_h = boxes[:, 3] / 2.0
    return np.stack(
        [boxes[:, 0] - half_w, boxes[:, 1] - half_h, boxes[:, 0] + half_w, boxes[:, 1] + half_h],
        axis=1,
    )


def iou_matrix(a_xyxy: np.ndarray, b_xyxy: np.ndarray) -> np.ndarray:
    """Pairwise IoU between (n, 4) and (m, 4) corner-form boxes."""
    if a_xyxy.shape[0] == 0 or b_xyxy.shape[0] == 0:
        return np.zeros((a_xyxy.shape[0], b_xyxy.shape[0]))
    ix1 = np.maximum(a_xyxy[:, None, 0], b_xyxy[None, :, 0])
    iy1 = np.maximum(a_xyxy[:, None, 1], b_xyxy[None, :, 1])
    ix2 = np.minimum(a_xyxy[:, None, 2], b_xyxy[None, :, 2])
    iy2 = np.minimum(a_xyxy[:, None, 3], b_xyxy[None, :, 3])
    inter = np.clip(ix2 - ix1, 0.0, None) * np.clip(iy2 - iy1, 0.0, None)
    area_a = (a_xyxy[:, 2] - a_xyxy[:, 0]) * (a_xyxy[:, 3] - a_xyxy[:, 1])
    area_b = (b_xyxy[:, 2] - b_xyxy[:, 0]) * (b_xyxy[:, 3] - b_xyxy[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    out = np.zeros_like(inter)
    np.divide(inter, union, out=out, where=union > 0)
    return out
