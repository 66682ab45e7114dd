"""Figure rendering for droopsim CSV outputs; the file formats are the only
interface to the simulator."""

from .csvio import SchemaError, read_csv
from .figures import FigureKind, FigureSpec, render

__version__ = "0.1.0"
