"""Ends of locally finite graphs: exhaustions, end towers, rays, and
dimension-zero end cohomology, computed on finite windows."""

from .errors import EndsError

__all__ = ["EndsError"]
