"""Expand a tiny dataset with geometric and color variants.

Builds one synthetic image with two annotated boxes, then runs the
expansion grid of four rotations times four saturation levels and shows
how the boxes are remapped into each derived image.
"""

import tempfile
from pathlib import Path

import numpy as np

from detfuse import AnnotatedImage, AugmentSpec, Box, GroundTruthRecord, expand_dataset, rotate_with_boxes
from detfuse.io import load_annotations, save_annotations, write_manifest, write_ppm

rng = np.random.default_rng(0)
image = rng.integers(0, 256, size=(60, 90, 3), dtype=np.uint8)
annotations = [
    GroundTruthRecord("sample", 0, Box(10, 10, 40, 30)),
    GroundTruthRecord("sample", 1, Box(50, 20, 85, 55)),
]

print("a 90-degree turn maps (x, y) to (H - y, x); the first box goes")
rotated = rotate_with_boxes(AnnotatedImage(image, annotations), 90)
print(f"  {annotations[0].box.as_tuple()} -> {rotated.annotations[0].box.as_tuple()}")

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    write_ppm(tmp / "sample.ppm", image)
    save_annotations(tmp / "sample.txt", annotations)
    write_manifest(tmp / "manifest.txt", [(str(tmp / "sample.ppm"), str(tmp / "sample.txt"))])

    spec = AugmentSpec(
        rotations=(0.0, 45.0, 90.0, 180.0),
        saturation_factors=(1.0, 1.2, 1.5, 1.8),
    )
    result = expand_dataset(tmp / "manifest.txt", spec, tmp / "out")

    print(f"\nexpanded 1 source image into {len(result.entries)} variants")
    print(f"boxes: {result.boxes_in} in, {result.boxes_emitted} emitted, "
          f"{result.boxes_dropped} dropped")
    print("\nfirst few variants and their remapped first box:")
    for img_path, ann_path in result.entries[:5]:
        box = load_annotations(ann_path, "x")[0].box
        coords = tuple(round(v, 1) for v in box.as_tuple())
        print(f"  {Path(img_path).name}: box 0 -> {coords}")
