"""Directional BP+OSD decoding and degeneracy enumerators for CSS codes."""

from .codes import CssCode, distances, new_css, toric
from .decoder import BpOsdDecoder, DecoderConfig, decode, tilt_priors
from .directional import directional_cost, edges_from_qubit, standardize
from .enumerator import directional_enumerator, macwilliams_enumerator
from .gf2 import BinaryMatrix

__version__ = "0.1.0"

__all__ = [
    "BinaryMatrix", "BpOsdDecoder", "CssCode", "DecoderConfig", "decode", "directional_cost",
    "directional_enumerator", "distances", "edges_from_qubit", "macwilliams_enumerator", "new_css",
    "standardize", "tilt_priors", "toric",
]
