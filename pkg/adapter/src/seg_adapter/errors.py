class AdapterError(Exception):
    """Base class for adapter errors."""


class ModelLoadError(AdapterError):
    """Model weights could not be loaded (missing, offline, wrong id)."""


class ImageDecodeError(AdapterError):
    """Input image could not be decoded."""
