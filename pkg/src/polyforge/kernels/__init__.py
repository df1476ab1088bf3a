"""Numeric kernel backends.

Two interchangeable implementations of the hot loops exist: a compiled
Cython extension (``_core``) and a pure-NumPy reference (``_numpy``).
The compiled one is preferred when the extension built; set the
environment variable ``POLYFORGE_KERNELS`` to ``python`` or ``compiled``
to force a choice (``compiled`` raises if the extension is missing).
"""

from __future__ import annotations

import os

_requested = os.environ.get("POLYFORGE_KERNELS", "").strip().lower()

if _requested in ("", "compiled"):
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "POLYFORGE_KERNELS=compiled but the polyforge.kernels._core "
                "extension is not built"
            )
        from . import _numpy as _impl
elif _requested == "python":
    from . import _numpy as _impl
else:
    raise ImportError(f"unknown POLYFORGE_KERNELS value {_requested!r}")

BACKEND = _impl.BACKEND
REFINE_REL = _impl.REFINE_REL
tri_angles = _impl.tri_angles
face_pyramids = _impl.face_pyramids
edge_badness = _impl.edge_badness
scatter_add = _impl.scatter_add

__all__ = [
    "BACKEND",
    "REFINE_REL",
    "tri_angles",
    "face_pyramids",
    "edge_badness",
    "scatter_add",
]
