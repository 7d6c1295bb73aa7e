"""File formats: detection record files, annotation files, manifests, PPM.

Detection record files are line-oriented JSON: one object per line with keys
image_id (string), model_id (int), class_id (int), bbox ([x1, y1, x2, y2] in
absolute pixels) and score (real in [0, 1]). Annotation files carry one
``class_id x1 y1 x2 y2`` record per line. A manifest lists
``image_path annotation_path`` pairs, resolved relative to the manifest's
directory. Images are binary PPM (P6, maxval 255).
"""

from __future__ import annotations

import json
import os
from typing import Iterable

import numpy as np

from .errors import ParseError
from .evaluation import GroundTruthRecord
from .fusion import Detection
from .geometry import Box

DETECTION_KEYS = ("image_id", "model_id", "class_id", "bbox", "score")


def detection_to_record(d: Detection) -> dict:
    return {
        "image_id": d.image_id,
        "model_id": d.model_id,
        "class_id": d.class_id,
        "bbox": [d.box.x1, d.box.y1, d.box.x2, d.box.y2],
        "score": d.prob,
    }


def record_to_detection(rec: dict) -> Detection:
    bbox = rec["bbox"]
    if not isinstance(bbox, (list, tuple)) or len(bbox) != 4:
        raise ValueError(f"bbox must have 4 entries, got {bbox!r}")
    return Detection(
        box=Box(*(float(v) for v in bbox)),
        class_id=int(rec["class_id"]),
        prob=float(rec["score"]),
        model_id=int(rec["model_id"]),
        image_id=str(rec["image_id"]),
    )


def save_detections(path: str | os.PathLike, detections: Iterable[Detection]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for d in detections:
            f.write(json.dumps(detection_to_record(d), sort_keys=True))
            f.write("\n")


def load_detections(path: str | os.PathLike) -> list[Detection]:
    out: list[Detection] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                missing = [k for k in DETECTION_KEYS if k not in rec]
                if missing:
                    raise ValueError(f"missing keys {missing}")
                out.append(record_to_detection(rec))
            except (ValueError, TypeError, KeyError) as e:
                raise ParseError(f"{path}:{lineno}: bad detection record: {e}") from e
    return out


def save_annotations(path: str | os.PathLike, anns: Iterable[GroundTruthRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for a in anns:
            f.write(f"{a.class_id} {a.box.x1!r} {a.box.y1!r} {a.box.x2!r} {a.box.y2!r}\n")


def load_annotations(path: str | os.PathLike, image_id: str) -> list[GroundTruthRecord]:
    out: list[GroundTruthRecord] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 5:
                raise ParseError(f"{path}:{lineno}: expected 5 fields, got {len(parts)}")
            try:
                class_id = int(parts[0])
                box = Box(*(float(v) for v in parts[1:]))
            except ValueError as e:
                raise ParseError(f"{path}:{lineno}: bad annotation record: {e}") from e
            out.append(GroundTruthRecord(image_id, class_id, box))
    return out


def image_id_from_path(image_path: str) -> str:
    """Image key used throughout: the file name without its extension."""
    return os.path.splitext(os.path.basename(image_path))[0]


def read_manifest(path: str | os.PathLike) -> list[tuple[str, str]]:
    """Read ``image_path annotation_path`` pairs, resolved against the manifest dir."""
    base = os.path.dirname(os.path.abspath(path))
    out: list[tuple[str, str]] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"{path}:{lineno}: expected 2 paths, got {len(parts)}")
            out.append(
                tuple(p if os.path.isabs(p) else os.path.join(base, p) for p in parts)
            )
    return out


def write_manifest(path: str | os.PathLike, entries: Iterable[tuple[str, str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for image_path, ann_path in entries:
            f.write(f"{image_path} {ann_path}\n")


def load_ground_truth(manifest_path: str | os.PathLike) -> list[GroundTruthRecord]:
    """Load every annotation file named by a manifest."""
    out: list[GroundTruthRecord] = []
    for image_path, ann_path in read_manifest(manifest_path):
        out.extend(load_annotations(ann_path, image_id_from_path(image_path)))
    return out


# ---------------------------------------------------------------------------
# PPM (P6, 8-bit)


def read_ppm(path: str | os.PathLike) -> np.ndarray:
    """Read a binary PPM into an (h, w, 3) uint8 array."""
    with open(path, "rb") as f:
        data = f.read()
    if not data.startswith(b"P6"):
        raise ParseError(f"{path}: not a P6 PPM file")
    # header: magic, width, height, maxval as whitespace-separated tokens,
    # '#' comments running to end of line
    pos = 2
    tokens: list[int] = []
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ParseError(f"{path}: truncated PPM header")
        try:
            tokens.append(int(data[start:pos]))
        except ValueError as e:
            raise ParseError(f"{path}: bad PPM header token: {e}") from e
    pos += 1  # single whitespace after maxval
    width, height, maxval = tokens
    if maxval != 255:
        raise ParseError(f"{path}: only maxval 255 is supported, got {maxval}")
    n = width * height * 3
    raster = data[pos : pos + n]
    if len(raster) != n:
        raise ParseError(f"{path}: raster has {len(raster)} bytes, expected {n}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3).copy()


def write_ppm(path: str | os.PathLike, img: np.ndarray) -> None:
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise ValueError(f"expected (h, w, 3) uint8 image, got {img.shape} {img.dtype}")
    h, w = img.shape[:2]
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(img.tobytes())
