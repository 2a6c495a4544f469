"""Discrete GFF level lines on the triangular lattice and their SLE4 driving functions."""

try:
    from ._gffsle import *  # noqa: F401,F403
    from ._gffsle import __version__
except ImportError:  # in-tree build: the extension sits next to the package, not inside it
    from _gffsle import *  # noqa: F401,F403
    from _gffsle import __version__

from ._helpers import driving_arrays, field_array

__all__ = [name for name in dir() if not name.startswith("_")]
