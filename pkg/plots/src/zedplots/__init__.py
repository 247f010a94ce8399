"""zedplots: regenerate budget/spectrum figures from zedlink CSV files.

Rendering entry points live in :mod:`zedplots.render` (kept out of this
namespace so ``python -m zedplots.render`` runs cleanly).
"""

from .figspec import FigureSpec, PanelSpec, SpecError, Table, read_table

__all__ = ["FigureSpec", "PanelSpec", "SpecError", "Table", "read_table"]

__version__ = "0.1.0"
