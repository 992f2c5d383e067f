"""Analysis of four-dimensional three-webs W(3,2,2) at a point."""

__version__ = "0.1.0"
