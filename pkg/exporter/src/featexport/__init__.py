"""Bridge from pretrained vision backbones to the mcrmix toolkit: extract
per-image features from a labeled folder and write FMX/LBL files."""

from .backbones import REGISTRY, load_backbone
from .errors import ExporterError, NoImages, UndecodableImage, UnknownBackbone
from .export import export_features
from .wire import write_fmx, write_lbl

__version__ = "0.1.0"

__all__ = [
    "REGISTRY",
    "ExporterError",
    "NoImages",
    "UndecodableImage",
    "UnknownBackbone",
    "export_features",
    "load_backbone",
    "write_fmx",
    "write_lbl",
]
