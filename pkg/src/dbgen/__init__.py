"""Generate De Bruijn binding infrastructure from annotated inductive definitions."""

__version__ = "0.1.0"
