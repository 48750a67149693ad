"""refill - low-fill elimination orderings for sparse symmetric matrices."""

__version__ = "0.1.0"
