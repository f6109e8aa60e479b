"""Balanced presentations of the trivial group: constructions, exact word
problems, Tietze search, area search, rewriting and simplicial complexes."""

from .presentations import Presentation, TietzeScript, pres, replay
from .words import DyadicAffine, ResourceError, Word, WordError, word

__all__ = ["Presentation", "TietzeScript", "pres", "replay", "DyadicAffine", "ResourceError",
           "Word", "WordError", "word"]
__version__ = "0.1.0"
