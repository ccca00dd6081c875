"""Foundation-model bridge for the one-shot segmentation engine.

Exports patch features to the MTFT file format and serves promptable
segmentation over the newline-delimited JSON/RLE wire protocol. Only
those two interfaces connect this package to the engine.
"""

from .errors import AdapterError, ImageDecodeError, ModelLoadError
from .extractors import ExportJob, StubExtractor, export_features
from .segmenters import StubSegmenter
from .server import SegmenterServer

__all__ = [
    "AdapterError",
    "ImageDecodeError",
    "ModelLoadError",
    "ExportJob",
    "StubExtractor",
    "export_features",
    "StubSegmenter",
    "SegmenterServer",
]
