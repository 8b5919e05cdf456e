"""Exporter error types."""


class ExporterError(Exception):
    """Base class for exporter errors."""


class NoImages(ExporterError):
    """The image directory has no class subfolder with a decodable image."""


class UnknownBackbone(ExporterError):
    """The requested backbone name is not in the registry."""


class UndecodableImage(ExporterError):
    """An image file could not be decoded (reported per file, then skipped)."""
