"""Grid-robot command language that users can grow by defining new phrasings."""

__version__ = "0.1.0"
