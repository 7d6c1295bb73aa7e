"""Detection-to-ground-truth matching, precision/recall, AP and mAP.

Matching is greedy by descending confidence with the strict IoU rule
(IoU > threshold counts as a localization hit). AP uses block
interpolation: recall is split into n equal closed blocks and each block
contributes the maximum of the right-max interpolated precision over it.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError
from .fusion import Detection
from .geometry import Box, iou


@dataclass(frozen=True)
class GroundTruthRecord:
    """One labeled object instance in one image."""

    image_id: str
    class_id: int
    box: Box


@dataclass
class MatchOutcome:
    """Verdict for one detection: true positive or false positive."""

    detection: object
    verdict: str  # "TP" or "FP"
    matched_gt: GroundTruthRecord | None = None


@dataclass
class PRCurve:
    """Ordered (recall, precision) points, one per ranked detection."""

    points: list[tuple[float, float]] = field(default_factory=list)

    def __post_init__(self) -> None:
        recalls = [r for r, _ in self.points]
        if any(b < a for a, b in zip(recalls, recalls[1:])):
            raise ContractError("recall must be non-decreasing along the curve")


@dataclass(frozen=True)
class APResult:
    class_id: int
    ap: float
    n_blocks: int
    tp: int
    fp: int
    fn: int


@dataclass
class EvaluationReport:
    """Per-class AP, overall mAP and the class-agnostic localization rate."""

    per_class: list[APResult]
    mean_ap: float
    detection_rate: float
    iou_threshold: float
    n_blocks: int
    classes_without_gt: list[int] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def _greedy_match(preds, gts, iou_threshold, same_class=True):
    """Match predictions to ground truths, one verdict per prediction.

    Predictions are taken in descending confidence (ties: input order); each
    grabs the unmatched ground truth (same class when ``same_class``) with
    the highest IoU, provided that IoU strictly exceeds the threshold.
    Returns (outcomes in input order, gt-matched flags).
    """
    order = sorted(range(len(preds)), key=lambda i: (-preds[i].prob, i))
    matched = [False] * len(gts)
    outcomes: list[MatchOutcome | None] = [None] * len(preds)
    for i in order:
        p = preds[i]
        best_j = -1
        best_iou = 0.0
        for j, g in enumerate(gts):
            if matched[j]:
                continue
            if same_class and g.class_id != p.class_id:
                continue
            v = iou(p.box, g.box)
            if v > best_iou:
                best_iou = v
                best_j = j
        if best_j >= 0 and best_iou > iou_threshold:
            matched[best_j] = True
            outcomes[i] = MatchOutcome(p, "TP", gts[best_j])
        else:
            outcomes[i] = MatchOutcome(p, "FP")
    return outcomes, matched


def match_detections(
    preds: list,
    gts: list[GroundTruthRecord],
    iou_threshold: float = 0.5,
) -> tuple[list[MatchOutcome], int]:
    """Match one image's predictions against its ground truths.

    Accepts Detection or ClusterSummary objects (anything with box, class_id
    and prob). Returns one MatchOutcome per prediction, in input order, plus
    the false-negative count (ground truths left unmatched).
    """
    image_ids = {p.image_id for p in preds if hasattr(p, "image_id")}
    image_ids |= {g.image_id for g in gts}
    if len(image_ids) > 1:
        raise ContractError(f"records span multiple images: {sorted(image_ids)}")
    outcomes, matched = _greedy_match(preds, gts, iou_threshold, same_class=True)
    fn = sum(1 for m in matched if not m)
    return outcomes, fn


def precision_recall(tp: int, fp: int, fn: int) -> tuple[float, float]:
    """Precision and recall from counts; 0 when the denominator is 0."""
    if tp < 0 or fp < 0 or fn < 0:
        raise ValueError("counts must be non-negative")
    pre = tp / (tp + fp) if tp + fp > 0 else 0.0
    rec = tp / (tp + fn) if tp + fn > 0 else 0.0
    return pre, rec


def interpolated_precision(curve: PRCurve, r: float) -> float:
    """Right-max interpolation: max precision over points with recall >= r."""
    best = 0.0
    for rec, pre in curve.points:
        if rec >= r and pre > best:
            best = pre
    return best


def average_precision(
    curve: PRCurve,
    n_blocks: int = 10,
    *,
    class_id: int = -1,
    tp: int = 0,
    fp: int = 0,
    fn: int = 0,
) -> APResult:
    """Block-interpolated average precision.

    Recall is divided into ``n_blocks`` equal closed blocks
    [(i-1)/n, i/n]; each contributes the max of the interpolated precision
    over the block. Since the interpolated precision is a non-increasing
    step function, that max is its value at the block's left endpoint. An
    empty curve yields AP = 0.
    """
    if n_blocks < 1:
        raise ValueError(f"n_blocks must be >= 1, got {n_blocks}")
    pts = curve.points
    if not pts:
        return APResult(class_id, 0.0, n_blocks, tp, fp, fn)
    recalls = np.array([r for r, _ in pts])
    precisions = np.array([p for _, p in pts])
    order = np.argsort(recalls, kind="stable")
    r_sorted = recalls[order]
    # suffix max: best precision at recall >= r_sorted[k]
    p_suffix = np.maximum.accumulate(precisions[order][::-1])[::-1]

    total = 0.0
    for i in range(1, n_blocks + 1):
        lo = (i - 1) / n_blocks
        k = int(np.searchsorted(r_sorted, lo, side="left"))
        total += float(p_suffix[k]) if k < len(r_sorted) else 0.0
    return APResult(class_id, total / n_blocks, n_blocks, tp, fp, fn)


def mean_ap(per_class: list[APResult]) -> float:
    """Arithmetic mean of per-class APs. Raises on an empty list."""
    if not per_class:
        raise ContractError("mean over zero classes is undefined")
    return sum(r.ap for r in per_class) / len(per_class)


def evaluate_dataset(
    preds: list[Detection],
    gts: list[GroundTruthRecord],
    iou_threshold: float = 0.5,
    n_blocks: int = 10,
) -> EvaluationReport:
    """Evaluate a multi-image prediction set against ground truth.

    Matches per image, pools outcomes per class across images, ranks each
    class's detections globally by confidence (ties: input order), and
    computes block-interpolated AP per class and their mean. Classes with no
    ground-truth instances get no AP entry but are listed in the report.
    Also reports the class-agnostic localization rate: the fraction of
    ground-truth instances matched by any prediction at the IoU threshold.
    """
    warnings: list[str] = []
    preds_by_image: dict[str, list[tuple[int, Detection]]] = defaultdict(list)
    for idx, d in enumerate(preds):
        preds_by_image[d.image_id].append((idx, d))
    gts_by_image: dict[str, list[GroundTruthRecord]] = defaultdict(list)
    for g in gts:
        gts_by_image[g.image_id].append(g)

    outcome_of: dict[int, MatchOutcome] = {}
    agnostic_hits = 0
    for image_id in sorted(set(preds_by_image) | set(gts_by_image)):
        items = preds_by_image.get(image_id, [])
        img_gts = gts_by_image.get(image_id, [])
        if items and image_id not in gts_by_image:
            warnings.append(
                f"image {image_id!r} has predictions but no ground truth; all counted as FP"
            )
        img_preds = [d for _, d in items]
        outcomes, _ = match_detections(img_preds, img_gts, iou_threshold)
        for (idx, _), o in zip(items, outcomes):
            outcome_of[idx] = o
        _, matched = _greedy_match(img_preds, img_gts, iou_threshold, same_class=False)
        agnostic_hits += sum(matched)

    gt_counts: dict[int, int] = defaultdict(int)
    for g in gts:
        gt_counts[g.class_id] += 1

    by_class: dict[int, list[int]] = defaultdict(list)
    for idx in range(len(preds)):
        by_class[preds[idx].class_id].append(idx)

    per_class: list[APResult] = []
    for class_id in sorted(gt_counts):
        npos = gt_counts[class_id]
        indices = sorted(
            by_class.get(class_id, []), key=lambda i: (-preds[i].prob, i)
        )
        points: list[tuple[float, float]] = []
        cum_tp = 0
        cum_fp = 0
        for i in indices:
            if outcome_of[i].verdict == "TP":
                cum_tp += 1
            else:
                cum_fp += 1
            points.append((cum_tp / npos, cum_tp / (cum_tp + cum_fp)))
        curve = PRCurve(points)
        per_class.append(
            average_precision(
                curve,
                n_blocks,
                class_id=class_id,
                tp=cum_tp,
                fp=cum_fp,
                fn=npos - cum_tp,
            )
        )

    classes_without_gt = sorted(set(by_class) - set(gt_counts))
    if per_class:
        overall = mean_ap(per_class)
    else:
        overall = 0.0
        warnings.append("no class has ground-truth instances; mAP reported as 0")
    total_gt = len(gts)
    detection_rate = agnostic_hits / total_gt if total_gt > 0 else 0.0
    return EvaluationReport(
        per_class=per_class,
        mean_ap=overall,
        detection_rate=detection_rate,
        iou_threshold=iou_threshold,
        n_blocks=n_blocks,
        classes_without_gt=classes_without_gt,
        warnings=warnings,
    )
