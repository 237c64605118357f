"""Labeled image datasets: folder ingestion, procedural sprites, resolution pyramids.

Images are float32 arrays of shape (N, H, W, C) with values in [-1, 1].
Labels are consecutive integers assigned by sorted subject name, so loading
the same folder twice yields the same assignment.
"""

from __future__ import annotations

import colorsys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ConfigurationError, DatasetError

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")

# Sprite shapes; anything equivalent to another shape under rotation is
# excluded because rotation is a nuisance factor.
SPRITE_SHAPES = ("circle", "square", "triangle", "cross", "ring", "flower")


@dataclass(frozen=True)
class LabeledImageDataset:
    """Immutable image dataset with one integer identity label per image."""

    images: np.ndarray          # (N, H, W, C) float32 in [-1, 1]
    labels: np.ndarray          # (N,) int64 in [0, num_subjects)
    subject_names: tuple[str, ...]

    def __post_init__(self):
        images = np.ascontiguousarray(self.images, dtype=np.float32)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if images.ndim != 4:
            raise DatasetError(f"images must be (N, H, W, C), got shape {images.shape}")
        if labels.shape != (images.shape[0],):
            raise DatasetError("labels must be one integer per image")
        if images.shape[0] == 0:
            raise DatasetError("dataset is empty")
        k = len(self.subject_names)
        if labels.min() < 0 or labels.max() >= k:
            raise DatasetError(f"labels must lie in [0, {k})")
        present = np.bincount(labels, minlength=k)
        if (present == 0).any():
            missing = int(np.flatnonzero(present == 0)[0])
            raise DatasetError(f"subject {self.subject_names[missing]!r} has no images")
        if not np.isfinite(images).all():
            raise DatasetError("images contain non-finite values")
        if images.min() < -1.0 or images.max() > 1.0:
            raise DatasetError("pixel values must lie in [-1, 1]")
        images.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "subject_names", tuple(self.subject_names))

    @property
    def num_images(self) -> int:
        return self.images.shape[0]

    @property
    def num_subjects(self) -> int:
        return len(self.subject_names)

    @property
    def resolution(self) -> int:
        return self.images.shape[1]

    @property
    def channels(self) -> int:
        return self.images.shape[3]

    def indices_for_subject(self, label: int) -> np.ndarray:
        if not 0 <= label < self.num_subjects:
            raise IndexError(f"label {label} out of range [0, {self.num_subjects})")
        return np.flatnonzero(self.labels == label)


@dataclass(frozen=True)
class SpriteFactors:
    """Ground-truth factors behind a sprite dataset.

    Identity factors (shape, color) are constant per subject; nuisance
    factors (translation, rotation, background shade) are drawn per image.
    """

    shape_ids: np.ndarray       # (K,) int
    colors: np.ndarray          # (K, 3) float in [0, 1]
    translations: np.ndarray    # (N, 2) float
    rotations: np.ndarray       # (N,) float, radians
    backgrounds: np.ndarray     # (N,) float in [-1, 1]

    def identity_of(self, subject: int) -> tuple[int, tuple[float, float, float]]:
        return int(self.shape_ids[subject]), tuple(float(c) for c in self.colors[subject])


def _decode_image(path: Path, resolution: int) -> np.ndarray:
    """Decode, center-crop square, resize, and scale to [-1, 1]."""
    with Image.open(path) as img:
        img = img.convert("RGB")
        w, h = img.size
        side = min(w, h)
        left = (w - side) // 2
        top = (h - side) // 2
        img = img.crop((left, top, left + side, top + side))
        img = img.resize((resolution, resolution), Image.BILINEAR)
        arr = np.asarray(img, dtype=np.float32)
    return np.clip(arr / 127.5 - 1.0, -1.0, 1.0)


def load_image_folder(root_path: str | Path, resolution: int) -> LabeledImageDataset:
    """Load a `root/<subject>/<image>` folder tree.

    Undecodable files are skipped with a warning; a subject whose files all
    fail to decode is an error.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise DatasetError(f"dataset root {root} is not a directory")
    subject_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not subject_dirs:
        raise DatasetError(f"no subjects found under {root}")

    images: list[np.ndarray] = []
    labels: list[int] = []
    names: list[str] = []
    for label, subject_dir in enumerate(subject_dirs):
        count = 0
        for file in sorted(subject_dir.iterdir()):
            if file.suffix.lower() not in IMAGE_EXTENSIONS:
                continue
            try:
                arr = _decode_image(file, resolution)
            except (UnidentifiedImageError, OSError) as exc:
                warnings.warn(f"skipping undecodable image {file}: {exc}")
                continue
            images.append(arr)
            labels.append(label)
            count += 1
        if count == 0:
            raise DatasetError(f"subject {subject_dir.name!r} has no decodable images")
        names.append(subject_dir.name)

    return LabeledImageDataset(
        images=np.stack(images),
        labels=np.asarray(labels, dtype=np.int64),
        subject_names=tuple(names),
    )


def _shape_distance(shape: str, x: np.ndarray, y: np.ndarray, radius: float) -> np.ndarray:
    """Signed distance to the shape boundary (negative inside)."""
    if shape == "circle":
        return np.hypot(x, y) - radius
    if shape == "square":
        return np.maximum(np.abs(x), np.abs(y)) - radius * 0.82
    if shape == "triangle":
        # equilateral triangle as the intersection of three half-planes,
        # circumradius ~radius, inradius radius/2
        r = radius * 1.05
        h = np.sqrt(3.0) / 2.0
        d1 = -y - r / 2.0
        d2 = h * x + 0.5 * y - r / 2.0
        d3 = -h * x + 0.5 * y - r / 2.0
        return np.maximum(np.maximum(d1, d2), d3)
    if shape == "cross":
        w, l = radius * 0.3, radius
        horiz = np.maximum(np.abs(x) - l, np.abs(y) - w)
        vert = np.maximum(np.abs(x) - w, np.abs(y) - l)
        return np.minimum(horiz, vert)
    if shape == "ring":
        return np.abs(np.hypot(x, y) - radius * 0.78) - radius * 0.26
    if shape == "flower":
        r = np.hypot(x, y)
        theta = np.arctan2(y, x)
        return r - radius * (0.62 + 0.38 * np.cos(5.0 * theta))
    raise ValueError(f"unknown sprite shape {shape!r}")


def _render_sprite(
    shape: str,
    color: np.ndarray,
    translation: np.ndarray,
    rotation: float,
    background: float,
    resolution: int,
    oversample: int = 2,
) -> np.ndarray:
    """Rasterize one sprite with antialiased edges, output in [-1, 1]."""
    n = resolution * oversample
    coords = (np.arange(n) + 0.5) / n * 2.0 - 1.0
    xx, yy = np.meshgrid(coords, coords)
    # move into the sprite's local frame: untranslate, then unrotate
    x = xx - translation[0]
    y = yy - translation[1]
    c, s = np.cos(rotation), np.sin(rotation)
    xr = c * x + s * y
    yr = -s * x + c * y
    dist = _shape_distance(shape, xr, yr, radius=0.42)
    edge = 2.0 / n  # ~1 oversampled pixel of smoothing
    alpha = np.clip(0.5 - dist / (2.0 * edge), 0.0, 1.0)

    fg = color * 2.0 - 1.0  # color is [0, 1] RGB
    img = background + alpha[..., None] * (fg[None, None, :] - background)
    if oversample > 1:
        img = img.reshape(resolution, oversample, resolution, oversample, 3).mean(axis=(1, 3))
    return np.clip(img, -1.0, 1.0).astype(np.float32)


def make_sprite_dataset(
    num_subjects: int,
    images_per_subject: int,
    resolution: int,
    seed: int,
) -> tuple[LabeledImageDataset, SpriteFactors]:
    """Procedural toy dataset with known identity and nuisance factors.

    Each subject is a fixed (shape, color) pair; each image places that
    sprite at a random translation/rotation on a random gray background.
    Fully deterministic given the seed; colors are evenly spaced hues with a
    seed-dependent offset and permutation, so different seeds give different
    identity sets while identities within one dataset never collide.
    """
    if num_subjects < 2:
        raise ConfigurationError("num_subjects must be >= 2")
    if images_per_subject < 1:
        raise ConfigurationError("images_per_subject must be >= 1")
    if resolution < 4 or resolution & (resolution - 1) != 0:
        raise ConfigurationError(f"resolution must be a power of 2 >= 4, got {resolution}")

    rng = np.random.default_rng(seed)
    hue_offset = rng.uniform(0.0, 1.0)
    hues = (hue_offset + np.arange(num_subjects) / num_subjects) % 1.0
    hues = rng.permutation(hues)
    shape_ids = rng.permutation(np.arange(num_subjects) % len(SPRITE_SHAPES))
    colors = np.asarray(
        [colorsys.hsv_to_rgb(h, 0.9, 0.95) for h in hues], dtype=np.float64
    )

    total = num_subjects * images_per_subject
    translations = rng.uniform(-0.3, 0.3, size=(total, 2))
    rotations = rng.uniform(0.0, 2.0 * np.pi, size=total)
    backgrounds = rng.uniform(-1.0, 0.3, size=total)

    images = np.empty((total, resolution, resolution, 3), dtype=np.float32)
    labels = np.empty(total, dtype=np.int64)
    i = 0
    for subject in range(num_subjects):
        shape = SPRITE_SHAPES[shape_ids[subject]]
        for _ in range(images_per_subject):
            images[i] = _render_sprite(
                shape, colors[subject], translations[i], float(rotations[i]),
                float(backgrounds[i]), resolution,
            )
            labels[i] = subject
            i += 1

    names = tuple(f"s{seed}_{k:03d}" for k in range(num_subjects))
    dataset = LabeledImageDataset(images=images, labels=labels, subject_names=names)
    factors = SpriteFactors(
        shape_ids=shape_ids, colors=colors,
        translations=translations, rotations=rotations, backgrounds=backgrounds,
    )
    return dataset, factors


def downscale_to_stage(dataset: LabeledImageDataset, stage: int) -> LabeledImageDataset:
    """Average-pool the dataset to the progressive-stage resolution 4 * 2**stage."""
    if stage < 0:
        raise ConfigurationError("stage must be >= 0")
    target = 4 * 2 ** stage
    native = dataset.resolution
    if target > native:
        raise DatasetError(f"stage {stage} needs {target}px but dataset is {native}px")
    if target == native:
        return dataset
    factor = native // target
    n, _, _, c = dataset.images.shape
    pooled = dataset.images.reshape(n, target, factor, target, factor, c).mean(axis=(2, 4))
    return LabeledImageDataset(
        images=pooled.astype(np.float32),
        labels=dataset.labels,
        subject_names=dataset.subject_names,
    )


def pixels_to_uint8(images: np.ndarray) -> np.ndarray:
    """Map [-1, 1] floats to 8-bit: p = round(255 * (v + 1) / 2)."""
    return np.clip(np.round(255.0 * (np.asarray(images) + 1.0) / 2.0), 0, 255).astype(np.uint8)


def export_image_folder(dataset: LabeledImageDataset, root: str | Path) -> list[tuple[Path, int]]:
    """Write the dataset as `root/<subject>/<index>.png`; returns (path, label) pairs."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    written: list[tuple[Path, int]] = []
    counters = [0] * dataset.num_subjects
    for i in range(dataset.num_images):
        label = int(dataset.labels[i])
        subject_dir = root / dataset.subject_names[label]
        subject_dir.mkdir(exist_ok=True)
        path = subject_dir / f"{counters[label]:04d}.png"
        counters[label] += 1
        Image.fromarray(pixels_to_uint8(dataset.images[i])).save(path)
        written.append((path, label))
    return written
