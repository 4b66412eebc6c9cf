"""SOFA (SimpleFreeFieldHRIR) to HRC corpus conversion."""

from .reader import IngestError, SofaSource, read_sofa
from .convert import convert

__all__ = ["IngestError", "SofaSource", "convert", "read_sofa"]
