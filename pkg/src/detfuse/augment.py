"""Box-aware image augmentation: rotation, mirroring, color, blur, contrast.

All transforms operate on (h, w, 3) uint8 arrays and remap annotation boxes
exactly. Rotations about the image center expand the canvas to the rotated
extent and fill uncovered pixels with black; a box is replaced by the
axis-aligned bounding box of its rotated corners, clipped to the new canvas.
Rotations by multiples of 90 degrees are exact pixel permutations; other
angles use bilinear resampling.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import DetfuseError
from .evaluation import GroundTruthRecord
from .geometry import Box
from .io import (
    image_id_from_path,
    load_annotations,
    read_manifest,
    read_ppm,
    save_annotations,
    write_manifest,
    write_ppm,
)

# exact (sin, cos) for the right-angle rotations
_EXACT_TRIG = {0: (0.0, 1.0), 90: (1.0, 0.0), 180: (0.0, -1.0), 270: (-1.0, 0.0)}


@dataclass
class AnnotatedImage:
    """An image together with its box annotations."""

    image: np.ndarray  # (h, w, 3) uint8
    annotations: list[GroundTruthRecord] = field(default_factory=list)

    @property
    def width(self) -> int:
        return self.image.shape[1]

    @property
    def height(self) -> int:
        return self.image.shape[0]


@dataclass(frozen=True)
class AugmentSpec:
    """Configuration grid for dataset expansion.

    The emitted variants are the Cartesian product of rotations, saturation
    factors and exposure factors; the mirror flag, blur radii and contrast
    factors each add an extra product axis on top of their identity setting.
    """

    rotations: tuple[float, ...] = (0.0,)
    saturation_factors: tuple[float, ...] = (1.0,)
    exposure_factors: tuple[float, ...] = (1.0,)
    mirror: bool = False
    blur_radii: tuple[int, ...] = ()
    contrast_factors: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if any(not 0 <= a < 360 for a in self.rotations):
            raise ValueError("rotation angles must lie in [0, 360)")
        for f in (*self.saturation_factors, *self.exposure_factors, *self.contrast_factors):
            if f <= 0:
                raise ValueError("factors must be positive")
        if any(r < 0 for r in self.blur_radii):
            raise ValueError("blur radii must be non-negative")


def _rotation_trig(angle: float) -> tuple[float, float]:
    key = int(angle) if float(angle).is_integer() else None
    if key is not None and key in _EXACT_TRIG:
        return _EXACT_TRIG[key]
    rad = math.radians(angle)
    return math.sin(rad), math.cos(rad)


def _rotate_pixels_arbitrary(img: np.ndarray, sin: float, cos: float,
                             nw: int, nh: int) -> np.ndarray:
    """Inverse-map bilinear resampling with black outside the source."""
    h, w = img.shape[:2]
    cx, cy = w / 2.0, h / 2.0
    ncx, ncy = nw / 2.0, nh / 2.0
    ys, xs = np.meshgrid(
        np.arange(nh, dtype=np.float64) + 0.5,
        np.arange(nw, dtype=np.float64) + 0.5,
        indexing="ij",
    )
    u = xs - ncx
    v = ys - ncy
    # inverse rotation back into source coordinates
    sx = cx + u * cos + v * sin
    sy = cy - u * sin + v * cos
    fx = sx - 0.5
    fy = sy - 0.5
    x0 = np.floor(fx).astype(np.int64)
    y0 = np.floor(fy).astype(np.int64)
    tx = fx - x0
    ty = fy - y0
    out = np.zeros((nh, nw, 3), dtype=np.float64)
    for dy in (0, 1):
        for dx in (0, 1):
            xi = x0 + dx
            yi = y0 + dy
            valid = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
            wgt = (tx if dx else 1.0 - tx) * (ty if dy else 1.0 - ty)
            sample = np.zeros((nh, nw, 3), dtype=np.float64)
            sample[valid] = img[yi[valid], xi[valid]]
            out += sample * (wgt * valid)[..., None]
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def rotate_with_boxes(src: AnnotatedImage, angle: float) -> AnnotatedImage:
    """Rotate image and boxes about the image center, expanding the canvas.

    Boxes collapsing to zero area after clipping are dropped. The continuous
    corner mapping uses exact trigonometric values for multiples of 90
    degrees, so four 90-degree rotations compose to the exact identity.
    """
    if not 0 <= angle < 360:
        raise ValueError(f"angle must be in [0, 360), got {angle}")
    img = src.image
    h, w = img.shape[:2]
    sin, cos = _rotation_trig(angle)
    if float(angle).is_integer() and int(angle) % 90 == 0:
        k = int(angle) // 90
        out_img = np.ascontiguousarray(np.rot90(img, -k))
        nh, nw = out_img.shape[:2]
    else:
        nw = math.ceil(w * abs(cos) + h * abs(sin))
        nh = math.ceil(w * abs(sin) + h * abs(cos))
        out_img = _rotate_pixels_arbitrary(img, sin, cos, nw, nh)

    cx, cy = w / 2.0, h / 2.0
    ncx, ncy = nw / 2.0, nh / 2.0

    def fwd(x: float, y: float) -> tuple[float, float]:
        u = x - cx
        v = y - cy
        return ncx + u * cos - v * sin, ncy + u * sin + v * cos

    anns: list[GroundTruthRecord] = []
    for a in src.annotations:
        corners = [
            fwd(a.box.x1, a.box.y1),
            fwd(a.box.x1, a.box.y2),
            fwd(a.box.x2, a.box.y1),
            fwd(a.box.x2, a.box.y2),
        ]
        x1 = max(0.0, min(c[0] for c in corners))
        y1 = max(0.0, min(c[1] for c in corners))
        x2 = min(float(nw), max(c[0] for c in corners))
        y2 = min(float(nh), max(c[1] for c in corners))
        if x2 - x1 <= 0 or y2 - y1 <= 0:
            continue  # clipped away; expand_dataset accounts for drops
        anns.append(GroundTruthRecord(a.image_id, a.class_id, Box(x1, y1, x2, y2)))
    return AnnotatedImage(out_img, anns)


def mirror_with_boxes(src: AnnotatedImage) -> AnnotatedImage:
    """Horizontal flip; box (x1, y1, x2, y2) becomes (W-x2, y1, W-x1, y2)."""
    wpx = float(src.width)
    img = np.ascontiguousarray(src.image[:, ::-1])
    anns = [
        GroundTruthRecord(
            a.image_id, a.class_id, Box(wpx - a.box.x2, a.box.y1, wpx - a.box.x1, a.box.y2)
        )
        for a in src.annotations
    ]
    return AnnotatedImage(img, anns)


def _rgb_to_hsv(rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    v = maxc
    delta = maxc - minc
    s = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)
    safe = np.where(delta > 0, delta, 1.0)
    rc = (maxc - r) / safe
    gc = (maxc - g) / safe
    bc = (maxc - b) / safe
    h = np.select(
        [delta == 0, r == maxc, g == maxc],
        [0.0, bc - gc, 2.0 + rc - bc],
        default=4.0 + gc - rc,
    )
    h = (h / 6.0) % 1.0
    return h, s, v


def _hsv_to_rgb(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    i = np.floor(h * 6.0)
    f = h * 6.0 - i
    i = i.astype(np.int64) % 6
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1)


def adjust_color(img: np.ndarray, saturation: float = 1.0, exposure: float = 1.0) -> np.ndarray:
    """Scale saturation and value in HSV space, clamped to [0, 1].

    Factor 1.0 on both axes returns a bit-identical copy; gray pixels are a
    fixed point of any saturation factor.
    """
    if saturation <= 0 or exposure <= 0:
        raise ValueError("saturation and exposure factors must be positive")
    if saturation == 1.0 and exposure == 1.0:
        return img.copy()
    rgb = img.astype(np.float64) / 255.0
    h, s, v = _rgb_to_hsv(rgb)
    s = np.clip(s * saturation, 0.0, 1.0)
    v = np.clip(v * exposure, 0.0, 1.0)
    out = _hsv_to_rgb(h, s, v)
    return np.clip(np.floor(out * 255.0 + 0.5), 0, 255).astype(np.uint8)


def blur(img: np.ndarray, radius: int) -> np.ndarray:
    """Box blur averaging the (2r+1)^2 window, normalized by in-bounds count."""
    if radius < 0:
        raise ValueError(f"radius must be non-negative, got {radius}")
    if radius == 0:
        return img.copy()
    h, w = img.shape[:2]
    ii = np.zeros((h + 1, w + 1, 3), dtype=np.int64)
    ii[1:, 1:] = img.astype(np.int64).cumsum(axis=0).cumsum(axis=1)
    ys = np.arange(h)
    xs = np.arange(w)
    y1 = np.clip(ys - radius, 0, h)
    y2 = np.clip(ys + radius + 1, 0, h)
    x1 = np.clip(xs - radius, 0, w)
    x2 = np.clip(xs + radius + 1, 0, w)
    sums = (
        ii[y2[:, None], x2[None, :]]
        - ii[y1[:, None], x2[None, :]]
        - ii[y2[:, None], x1[None, :]]
        + ii[y1[:, None], x1[None, :]]
    )
    counts = ((y2 - y1)[:, None] * (x2 - x1)[None, :])[..., None]
    return np.clip(np.floor(sums / counts + 0.5), 0, 255).astype(np.uint8)


def contrast(img: np.ndarray, factor: float) -> np.ndarray:
    """Scale each channel about 128 and clamp; factor 1.0 is the identity."""
    if factor <= 0:
        raise ValueError(f"contrast factor must be positive, got {factor}")
    if factor == 1.0:
        return img.copy()
    out = (img.astype(np.float64) - 128.0) * factor + 128.0
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


@dataclass
class ExpansionResult:
    manifest_path: str
    provenance_path: str
    entries: list[tuple[str, str]]
    boxes_in: int
    boxes_emitted: int
    boxes_dropped: int
    errors: list[str] = field(default_factory=list)


def _variant_name(stem: str, rot: float, sat: float, exp: float,
                  mirrored: bool, radius: int, cfac: float) -> str:
    name = f"{stem}_r{int(round(rot)):03d}_s{int(round(sat * 100)):03d}_e{int(round(exp * 100)):03d}"
    if mirrored:
        name += "_m"
    if radius:
        name += f"_b{radius:02d}"
    if cfac != 1.0:
        name += f"_c{int(round(cfac * 100)):03d}"
    return name


def expand_dataset(
    manifest_path: str | os.PathLike,
    spec: AugmentSpec,
    out_dir: str | os.PathLike,
) -> ExpansionResult:
    """Write the configured transform grid for every manifest entry.

    Derived files get deterministic names (``base_rNNN_sXXX_eXXX`` plus
    optional mirror/blur/contrast suffixes); the identity combination appears
    exactly once. Unreadable inputs are recorded and skipped; a planned
    output name collision is fatal. Alongside the derived images and
    annotation files the output directory receives ``manifest.txt`` and a
    ``provenance.txt`` mapping each derived image to its source.
    """
    out_dir = os.fspath(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    variants = list(
        product(
            spec.rotations,
            spec.saturation_factors,
            spec.exposure_factors,
            [False] + ([True] if spec.mirror else []),
            [0, *spec.blur_radii],
            [1.0, *spec.contrast_factors],
        )
    )
    entries: list[tuple[str, str]] = []
    provenance: list[tuple[str, str]] = []
    errors: list[str] = []
    seen_names: set[str] = set()
    boxes_in = 0
    boxes_emitted = 0
    for image_path, ann_path in read_manifest(manifest_path):
        stem = image_id_from_path(image_path)
        try:
            img = read_ppm(image_path)
            anns = load_annotations(ann_path, stem)
        except (OSError, DetfuseError) as e:
            errors.append(f"{image_path}: {e}")
            continue
        boxes_in += len(anns) * len(variants)
        for rot, sat, exp, mirrored, radius, cfac in variants:
            name = _variant_name(stem, rot, sat, exp, mirrored, radius, cfac)
            if name in seen_names:
                raise DetfuseError(f"output name collision: {name}")
            seen_names.add(name)
            work = rotate_with_boxes(AnnotatedImage(img, list(anns)), rot)
            if mirrored:
                work = mirror_with_boxes(work)
            pixels = adjust_color(work.image, sat, exp)
            pixels = blur(pixels, radius)
            pixels = contrast(pixels, cfac)
            derived_anns = [
                GroundTruthRecord(name, a.class_id, a.box) for a in work.annotations
            ]
            boxes_emitted += len(derived_anns)
            img_out = os.path.join(out_dir, name + ".ppm")
            ann_out = os.path.join(out_dir, name + ".txt")
            write_ppm(img_out, pixels)
            save_annotations(ann_out, derived_anns)
            entries.append((img_out, ann_out))
            provenance.append((img_out, image_path))
    manifest_out = os.path.join(out_dir, "manifest.txt")
    write_manifest(manifest_out, entries)
    provenance_out = os.path.join(out_dir, "provenance.txt")
    with open(provenance_out, "w", encoding="utf-8", newline="\n") as f:
        for derived, source in provenance:
            f.write(f"{derived} {source}\n")
    return ExpansionResult(
        manifest_path=manifest_out,
        provenance_path=provenance_out,
        entries=entries,
        boxes_in=boxes_in,
        boxes_emitted=boxes_emitted,
        boxes_dropped=boxes_in - boxes_emitted,
        errors=errors,
    )
