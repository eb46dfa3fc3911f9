"""Batch figure rendering for ofdm-fama result CSVs."""

from .figures import FIGURES
from .render import render

__all__ = ["FIGURES", "render"]
__version__ = "0.1.0"
