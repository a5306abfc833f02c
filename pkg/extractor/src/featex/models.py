"""Backbone registry: classifier networks truncated at the penultimate layer.

Every entry ends in global average pooling over post-ReLU activations, so
emitted features are nonnegative by construction. Preprocessing always
comes from the backbone's published inference transform, even for randomly
initialized weights, so feature files differ only in the weights used.
"""

import logging
from dataclasses import dataclass

import torch
from torch import nn
from torchvision import models

log = logging.getLogger("featex")


@dataclass(frozen=True)
class Backbone:
    name: str
    builder: object
    weights_enum: object
    dim: int


BACKBONES = {
    "inception_v3": Backbone(
        "inception_v3", models.inception_v3,
        models.Inception_V3_Weights.DEFAULT, 2048,
    ),
    "resnet18": Backbone(
        "resnet18", models.resnet18, models.ResNet18_Weights.DEFAULT, 512,
    ),
    "resnet50": Backbone(
        "resnet50", models.resnet50, models.ResNet50_Weights.DEFAULT, 2048,
    ),
    "resnext101": Backbone(
        "resnext101", models.resnext101_32x8d,
        models.ResNeXt101_32X8D_Weights.DEFAULT, 2048,
    ),
}


def build(backbone_name: str, weights: str, seed: int, device: str):
    """Returns (model, preprocess) ready for no-grad batch inference.

    ``weights`` is "pretrained" (published checkpoint, needs a local cache
    or network access) or "random" (architecture only, initialized from
    ``seed``; useful for hermetic pipeline tests).
    """
    if backbone_name not in BACKBONES:
        raise ValueError(
            f"unknown backbone {backbone_name!r}, expected one of "
            + ", ".join(sorted(BACKBONES))
        )
    spec = BACKBONES[backbone_name]
    preprocess = spec.weights_enum.transforms()
    if weights == "pretrained":
        model = spec.builder(weights=spec.weights_enum)
    elif weights == "random":
        torch.manual_seed(seed)
        model = spec.builder(weights=None)
    else:
        raise ValueError(f"weights must be 'pretrained' or 'random', got {weights!r}")
    model.fc = nn.Identity()
    model.eval()
    model.to(device)
    log.info("built %s (%s weights), feature dim %d", backbone_name, weights, spec.dim)
    return model, preprocess
