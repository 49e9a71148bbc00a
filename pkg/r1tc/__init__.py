"""r1tc - Rank-1 completion of partially observed tensors."""

__version__ = "0.1.0"
