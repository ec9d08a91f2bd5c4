"""Distribution-preserving multi-bit watermarks for logged decision sequences."""

__version__ = "0.1.0"
