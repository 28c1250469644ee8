"""Companion pipeline: raw sources in, one validated config document out."""

from .outliers import OutlierMark, detect_outliers, quantile_type7
from .resample import resample
from .detectors import Detector, default_detectors, run_detectors
from .imports import import_external_annotations
from .pipeline import IngestError, IngestReport, SourceBundle, ingest

__all__ = [
    "OutlierMark",
    "detect_outliers",
    "quantile_type7",
    "resample",
    "Detector",
    "default_detectors",
    "run_detectors",
    "import_external_annotations",
    "SourceBundle",
    "IngestReport",
    "IngestError",
    "ingest",
]
