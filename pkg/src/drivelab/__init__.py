"""Headless analytics engine and collaborative replay service for
automotive-UI study recordings."""

from .canonical import canonical_serialize, load_document, parse_document, save_document
from .model import ConfigDocument
from .validation import validate

__all__ = [
    "ConfigDocument",
    "canonical_serialize",
    "parse_document",
    "load_document",
    "save_document",
    "validate",
]

__version__ = "0.1.0"
