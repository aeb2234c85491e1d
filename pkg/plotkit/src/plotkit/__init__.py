"""Figure regeneration for wqed scenario outputs.

plotkit never computes physics: it parses the '#'-headered tables the
scenario runner writes and turns named columns into the five figure classes
(spectra overlays, g2 heatmaps with a reflectance contour, pulse
time-series, scaling log-log plots, population checkerboards).  Rendering
is deterministic: identical inputs produce byte-identical data series and
SVG output.
"""

__version__ = "0.1.0"

from plotkit.tables import SchemaError, read_table
from plotkit.recipes import FigureRecipe, load_recipe
from plotkit.render import render

__all__ = ["read_table", "SchemaError", "FigureRecipe", "load_recipe", "render", "__version__"]
