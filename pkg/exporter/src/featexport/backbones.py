"""Pretrained vision backbones exposed as penultimate-feature extractors.

Each registry entry builds a torch module whose forward pass returns the
pooled penultimate activations (the input to the original classifier
head). Pretrained weights are attempted first; when they cannot be
fetched (offline environments), the backbone falls back to a fixed-seed
random initialization so runs stay deterministic. Which one was used is
reported so callers can record it in the export manifest.
"""

from __future__ import annotations

import torch
from torch import nn
from torchvision import models

from .errors import UnknownBackbone

_FALLBACK_SEED = 0


def _resnet(ctor, weights_enum):
    def build():
        try:
            model = ctor(weights=weights_enum.DEFAULT)
            provenance = "pretrained"
        except Exception:
            torch.manual_seed(_FALLBACK_SEED)
            model = ctor(weights=None)
            provenance = f"random-init(seed={_FALLBACK_SEED})"
        dim = model.fc.in_features
        model.fc = nn.Identity()
        return model, dim, provenance

    return build


def _mobilenet_v3_small():
    try:
        model = models.mobilenet_v3_small(weights=models.MobileNet_V3_Small_Weights.DEFAULT)
        provenance = "pretrained"
    except Exception:
        torch.manual_seed(_FALLBACK_SEED)
        model = models.mobilenet_v3_small(weights=None)
        provenance = f"random-init(seed={_FALLBACK_SEED})"
    dim = model.classifier[0].in_features
    model.classifier = nn.Identity()
    return model, dim, provenance


REGISTRY = {
    "resnet18": _resnet(models.resnet18, models.ResNet18_Weights),
    "resnet34": _resnet(models.resnet34, models.ResNet34_Weights),
    "mobilenet_v3_small": _mobilenet_v3_small,
}


def load_backbone(name: str):
    """Return (model in eval mode, feature_dim, weight provenance)."""
    if name not in REGISTRY:
        raise UnknownBackbone(
            f"unknown backbone {name!r}; available: {', '.join(sorted(REGISTRY))}"
        )
    model, dim, provenance = REGISTRY[name]()
    model.eval()
    return model, dim, provenance
