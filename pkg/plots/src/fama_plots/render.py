"""Deterministic rendering: one SVG and one PNG per figure.

matplotlib is pinned to the Agg backend with a fixed hash salt and the SVG
date stripped, so rendering the same CSV twice yields byte-identical files.
"""

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .figures import FIGURES
from .io import load_table

__all__ = ["render", "RC_PARAMS"]

RC_PARAMS = {
    "svg.hashsalt": "fama-plots",
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "axes.grid": False,
}

_WIDE = {"fig2_rate_surface": (10.5, 3.6)}


def render(name: str, in_dir: str, out_dir: str) -> list:
    """Draw one recipe figure from in_dir CSVs; returns [svg_path, png_path]."""
    if name not in FIGURES:
        raise KeyError(f"unknown figure {name!r}; known: "
                       + ", ".join(sorted(FIGURES)))
    spec = FIGURES[name]
    table = load_table(os.path.join(in_dir, spec.csv), spec.required)
    os.makedirs(out_dir, exist_ok=True)
    with plt.rc_context(RC_PARAMS):
        fig = plt.figure(figsize=_WIDE.get(name, (5.2, 3.6)))
        try:
            spec.builder(table, fig)
            fig.suptitle(spec.title, fontsize=11)
            fig.tight_layout()
            paths = []
            for ext, metadata in (("svg", {"Date": None}),
                                  ("png", {"Software": "fama-plots"})):
                path = os.path.join(out_dir, f"{name}.{ext}")
                fig.savefig(path, metadata=metadata)
                paths.append(path)
        finally:
            plt.close(fig)
    return paths
