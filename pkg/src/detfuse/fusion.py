"""Greedy clustering of multi-model detections and cluster summaries.

Detections are assigned one by one to the existing same-class cluster whose
aggregate box overlaps them best (by aggregate probability among clusters
above the IoU threshold); a detection with no match seeds a new cluster.
A cluster is summarized by the probability-weighted average of its member
boxes, the max member probability divided by the cluster size, and the
shared class.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ContractError, DegenerateWeightsError
from .geometry import Box, iou

# Aggregate probability of a cluster: max member probability divided by the
# cluster size (the default), or the plain max (for experimentation; the
# scaled form penalizes corroborated boxes).
PROB_SCALED_MAX = "scaled-max"
PROB_MAX = "max"
PROB_MODES = (PROB_SCALED_MAX, PROB_MAX)


@dataclass(frozen=True)
class Detection:
    """One model's prediction: a box, a class, a probability and a source tag."""

    box: Box
    class_id: int
    prob: float
    model_id: int = 0
    image_id: str = ""

    def __post_init__(self) -> None:
        if not 0.0 <= self.prob <= 1.0:
            raise ValueError(f"prob must be in [0, 1], got {self.prob}")
        if self.class_id < 0:
            raise ValueError(f"class_id must be non-negative, got {self.class_id}")


@dataclass
class Cluster:
    """Non-empty group of same-class detections, in insertion order."""

    members: list[Detection] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.members:
            raise ContractError("cluster must be non-empty")
        c = self.members[0].class_id
        if any(m.class_id != c for m in self.members):
            raise ContractError("cluster members must share one class_id")

    @property
    def class_id(self) -> int:
        return self.members[0].class_id


@dataclass(frozen=True)
class ClusterSummary:
    """Aggregate box, probability and class of a cluster, plus member count."""

    box: Box
    prob: float
    class_id: int
    support: int


def summarize(cluster: Cluster, prob_mode: str = PROB_SCALED_MAX) -> ClusterSummary:
    """Compute the aggregate (box, probability, class) of a cluster.

    The aggregate box is the per-coordinate average of member boxes weighted
    by member probability; the aggregate probability is the max member
    probability divided by the cluster size (or the plain max, see
    ``prob_mode``). Raises DegenerateWeightsError when all member
    probabilities are zero.
    """
    if prob_mode not in PROB_MODES:
        raise ValueError(f"unknown prob_mode {prob_mode!r}")
    members = cluster.members
    total = sum(m.prob for m in members)
    if total <= 0.0:
        raise DegenerateWeightsError("all member probabilities are zero")
    x1 = sum(m.prob * m.box.x1 for m in members) / total
    y1 = sum(m.prob * m.box.y1 for m in members) / total
    x2 = sum(m.prob * m.box.x2 for m in members) / total
    y2 = sum(m.prob * m.box.y2 for m in members) / total
    peak = max(m.prob for m in members)
    prob = peak / len(members) if prob_mode == PROB_SCALED_MAX else peak
    return ClusterSummary(Box(x1, y1, x2, y2), prob, cluster.class_id, len(members))


def merge_boxes_with_members(
    detections: list[Detection],
    iou_threshold: float = 0.5,
    prob_mode: str = PROB_SCALED_MAX,
) -> list[tuple[Cluster, ClusterSummary]]:
    """Like merge_boxes, but also returns each cluster's member list."""
    if not 0.0 < iou_threshold < 1.0:
        raise ValueError(f"iou_threshold must be in (0, 1), got {iou_threshold}")
    if not detections:
        return []
    if len({d.image_id for d in detections}) > 1:
        raise ContractError("merge_boxes requires detections from a single image")

    order = sorted(
        range(len(detections)),
        key=lambda i: (-detections[i].prob, detections[i].model_id, i),
    )
    clusters: list[list[Detection]] = []
    summaries: list[ClusterSummary] = []
    for i in order:
        det = detections[i]
        best: int | None = None
        for ci, s in enumerate(summaries):
            if s.class_id != det.class_id:
                continue
            if iou(s.box, det.box) < iou_threshold:
                continue
            if best is None or s.prob > summaries[best].prob:
                best = ci
        if best is None:
            clusters.append([det])
            summaries.append(summarize(Cluster([det]), prob_mode))
        else:
            clusters[best].append(det)
            summaries[best] = summarize(Cluster(clusters[best]), prob_mode)

    ranked = sorted(
        range(len(summaries)),
        key=lambda c: (-summaries[c].prob, -summaries[c].support, c),
    )
    return [(Cluster(clusters[c]), summaries[c]) for c in ranked]


def merge_boxes(
    detections: list[Detection],
    iou_threshold: float = 0.5,
    prob_mode: str = PROB_SCALED_MAX,
) -> list[ClusterSummary]:
    """Cluster one image's detections and return the cluster summaries.

    Detections are processed in descending probability (ties: ascending
    model_id, then input order). Each joins the same-class cluster with the
    highest current aggregate probability among clusters whose aggregate box
    has IoU >= iou_threshold with it, else it seeds a new cluster. Summaries
    are recomputed after every insertion and returned sorted by descending
    aggregate probability, ties broken by descending support then cluster
    creation order.
    """
    return [s for _, s in merge_boxes_with_members(detections, iou_threshold, prob_mode)]
