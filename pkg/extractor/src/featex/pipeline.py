"""Directory-to-feature-file extraction pipeline.

Files are processed in sorted filename order and written in that order,
inference runs in fixed-size batches on a single torch thread, and the
manifest sits next to the output so a feature file can always be traced
back to its images, backbone, and weights.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .fmx import write_fmx
from .models import BACKBONES, build

log = logging.getLogger("featex")

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".webp", ".tif", ".tiff"}


@dataclass(frozen=True)
class ExtractorSpec:
    backbone: str = "inception_v3"
    batch_size: int = 8
    device: str = "cpu"
    weights: str = "pretrained"
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.backbone not in BACKBONES:
            raise ValueError(f"unknown backbone {self.backbone!r}")


def _candidate_files(image_dir: Path):
    images, skipped = [], []
    for entry in sorted(image_dir.iterdir(), key=lambda p: p.name):
        if not entry.is_file():
            continue
        if entry.suffix.lower() in IMAGE_SUFFIXES:
            images.append(entry)
        else:
            skipped.append({"file": entry.name, "reason": "not an image suffix"})
    return images, skipped


def _load_rgb(path: Path):
    with Image.open(path) as img:
        return img.convert("RGB")


def extract(image_dir, spec: ExtractorSpec, out_path) -> dict:
    """Featurize every decodable image under ``image_dir`` into ``out_path``.

    Returns a summary dict (also written as ``<out_path>.manifest.json``)
    listing the row order, skipped files, and the preprocessing applied.
    Undecodable images are skipped with a warning; an input set with no
    usable image is an error.
    """
    image_dir = Path(image_dir)
    out_path = Path(out_path)
    if not image_dir.is_dir():
        raise NotADirectoryError(str(image_dir))
    candidates, skipped = _candidate_files(image_dir)
    if not candidates:
        raise ValueError(f"no image files in {image_dir}")

    torch.set_num_threads(1)
    model, preprocess = build(spec.backbone, spec.weights, spec.seed, spec.device)
    dim = BACKBONES[spec.backbone].dim

    tensors, names = [], []
    for path in candidates:
        try:
            image = _load_rgb(path)
        except Exception as exc:
            log.warning("skipping %s: %s", path.name, exc)
            skipped.append({"file": path.name, "reason": f"undecodable: {exc}"})
            continue
        tensors.append(preprocess(image))
        names.append(path.name)
    if not tensors:
        raise ValueError(f"no decodable images in {image_dir}")

    rows = []
    with torch.no_grad():
        for start in range(0, len(tensors), spec.batch_size):
            batch = torch.stack(tensors[start : start + spec.batch_size])
            rows.append(model(batch.to(spec.device)).cpu().numpy())
    features = np.ascontiguousarray(np.concatenate(rows, axis=0), dtype=np.float32)
    assert features.shape == (len(names), dim)

    write_fmx(features, out_path)

    source_tag = f"{spec.backbone}:{spec.weights}"
    if spec.weights == "random":
        source_tag += f":seed={spec.seed}"
    manifest = {
        "source_tag": source_tag,
        "backbone": spec.backbone,
        "weights": spec.weights,
        "seed": spec.seed if spec.weights == "random" else None,
        "rows": len(names),
        "dim": dim,
        "files": names,
        "skipped": skipped,
        "preprocess": repr(preprocess).strip(),
    }
    manifest_path = out_path.with_name(out_path.name + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    log.info("wrote %d rows of dim %d to %s", len(names), dim, out_path)
    return manifest
