"""Figures rendered from siggame CSV bundles.

This package only reads the CSV artifacts; it contains no simulation logic
and never imports the simulator.
"""

from .plots import FigureError, plot_crosstab, plot_curves, plot_histograms

__version__ = "0.1.0"
