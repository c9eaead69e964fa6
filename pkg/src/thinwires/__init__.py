"""Cell functions, scaling laws and interface classification for thin wire arrays."""

__version__ = "0.1.0"
