"""Shadow-conditioned line-drawing pipeline"""

__version__ = "0.1.0"
