"""Synthetic multi-model detection generation from ground truth.

Stands in for an ensemble of trained detectors: each synthetic model
perturbs the ground truth with corner jitter, dropped instances, spurious
boxes and confidence noise. Confidence is tied to localization quality
through a calibration slope so probability-weighted fusion has signal to
work with. Everything is deterministic given the seed; per-image
sub-streams are derived by XOR-ing the seed with a stable hash of the
image id, so per-image generation order never affects results.
"""

from __future__ import annotations

import hashlib
from collections import defaultdict
from dataclasses import dataclass, replace

import numpy as np

from .evaluation import GroundTruthRecord
from .fusion import Detection
from .geometry import Box, iou

# spurious boxes stay low-confidence so ranking can suppress them
FP_CONF_RANGE = (0.05, 0.5)


@dataclass(frozen=True)
class NoiseModel:
    """Error model of one synthetic detector.

    conf_calibration is (slope, noise sigma): reported confidence is
    clamp(slope * IoU(jittered, gt) + gaussian noise, 0, 1).
    """

    jitter_sigma: float = 0.0
    drop_rate: float = 0.0
    fp_rate: float = 0.0
    conf_calibration: tuple[float, float] = (1.0, 0.0)
    misclass_rate: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.drop_rate <= 1.0:
            raise ValueError("drop_rate must be in [0, 1]")
        if not 0.0 <= self.misclass_rate <= 1.0:
            raise ValueError("misclass_rate must be in [0, 1]")
        if self.jitter_sigma < 0 or self.fp_rate < 0:
            raise ValueError("jitter_sigma and fp_rate must be non-negative")
        if self.conf_calibration[1] < 0:
            raise ValueError("confidence noise sigma must be non-negative")


def _image_stream(seed: int, image_id: str) -> np.random.Generator:
    digest = hashlib.sha256(image_id.encode("utf-8")).digest()
    sub = int.from_bytes(digest[:8], "big")
    return np.random.default_rng(seed ^ sub)


def generate_model_detections(
    gts: list[GroundTruthRecord],
    noise: NoiseModel,
    model_id: int = 0,
    image_size: tuple[float, float] = (640.0, 480.0),
) -> list[Detection]:
    """Generate one synthetic model's detections for a ground-truth set.

    Per instance: drop with drop_rate, jitter every box corner with
    N(0, jitter_sigma), report confidence via the calibration model, and
    flip the class label to a random wrong one with misclass_rate (no-op
    when only one class exists). Per image, Poisson(fp_rate) spurious
    uniform boxes are added with confidence uniform in [0.05, 0.5]. The
    output is fully deterministic given the noise seed.
    """
    width, height = image_size
    classes = sorted({g.class_id for g in gts})
    by_image: dict[str, list[GroundTruthRecord]] = defaultdict(list)
    for g in gts:
        by_image[g.image_id].append(g)

    slope, conf_sigma = noise.conf_calibration
    out: list[Detection] = []
    for image_id in sorted(by_image):
        rng = _image_stream(noise.seed, image_id)
        for g in by_image[image_id]:
            if rng.random() < noise.drop_rate:
                continue
            jit = rng.standard_normal(4) * noise.jitter_sigma
            xa = min(max(g.box.x1 + jit[0], 0.0), width)
            xb = min(max(g.box.x2 + jit[1], 0.0), width)
            ya = min(max(g.box.y1 + jit[2], 0.0), height)
            yb = min(max(g.box.y2 + jit[3], 0.0), height)
            box = Box(min(xa, xb), min(ya, yb), max(xa, xb), max(ya, yb))
            quality = iou(box, g.box)
            conf = slope * quality + rng.standard_normal() * conf_sigma
            conf = min(max(conf, 0.0), 1.0)
            class_id = g.class_id
            if rng.random() < noise.misclass_rate and len(classes) > 1:
                k = int(rng.integers(len(classes) - 1))
                others = [c for c in classes if c != g.class_id]
                class_id = others[k]
            out.append(Detection(box, class_id, conf, model_id, image_id))
        for _ in range(int(rng.poisson(noise.fp_rate))):
            xs = np.sort(rng.uniform(0.0, width, 2))
            ys = np.sort(rng.uniform(0.0, height, 2))
            conf = float(rng.uniform(*FP_CONF_RANGE))
            class_id = classes[int(rng.integers(len(classes)))] if classes else 0
            out.append(
                Detection(Box(xs[0], ys[0], xs[1], ys[1]), class_id, conf, model_id, image_id)
            )
    return out


def generate_ensemble(
    gts: list[GroundTruthRecord],
    base_noise: NoiseModel,
    k_models: int,
    image_size: tuple[float, float] = (640.0, 480.0),
) -> list[list[Detection]]:
    """k independent detection sets; model i uses seed base_seed + i."""
    if k_models < 1:
        raise ValueError(f"k_models must be >= 1, got {k_models}")
    return [
        generate_model_detections(
            gts, replace(base_noise, seed=base_noise.seed + i), model_id=i,
            image_size=image_size,
        )
        for i in range(k_models)
    ]


def random_ground_truth(
    n_images: int,
    n_classes: int,
    boxes_per_image: int,
    seed: int = 0,
    image_size: tuple[float, float] = (640.0, 480.0),
    size_range: tuple[float, float] = (60.0, 150.0),
) -> list[GroundTruthRecord]:
    """Random ground-truth fixture: fixed-count boxes per image, random classes."""
    width, height = image_size
    rng = np.random.default_rng(seed)
    out: list[GroundTruthRecord] = []
    for i in range(n_images):
        image_id = f"img{i:04d}"
        for _ in range(boxes_per_image):
            bw = rng.uniform(*size_range)
            bh = rng.uniform(*size_range)
            x1 = rng.uniform(0.0, width - bw)
            y1 = rng.uniform(0.0, height - bh)
            class_id = int(rng.integers(n_classes))
            out.append(
                GroundTruthRecord(image_id, class_id, Box(x1, y1, x1 + bw, y1 + bh))
            )
    return out
