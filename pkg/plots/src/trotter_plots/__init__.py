"""Figure rendering for scan CSVs: schema-validated, read-only, deterministic."""

from .figures import FIGURES, render
from .schema import SchemaError

__version__ = "0.1.0"

__all__ = ["FIGURES", "render", "SchemaError", "__version__"]
