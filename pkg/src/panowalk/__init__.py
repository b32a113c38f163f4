"""panowalk: 360-degree street captures turned into explorable walkable worlds."""

__version__ = "0.1.0"

__all__ = [
    "canonical",
    "completion",
    "config",
    "geometry",
    "graph",
    "kernels",
    "navigation",
    "service",
    "walkability",
]
