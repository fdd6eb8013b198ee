"""Kernel backend selection.

The compiled extension is preferred when it imports cleanly; otherwise the
pure-Python kernels take over. ``MAPCHAOS_BACKEND=python`` or ``=compiled``
forces the choice (the latter raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import _purepy

_FORCED = os.environ.get("MAPCHAOS_BACKEND", "").strip().lower()

if _FORCED not in ("", "python", "compiled"):
    raise RuntimeError(
        f"MAPCHAOS_BACKEND={_FORCED!r} not understood (use 'python' or 'compiled')"
    )

if _FORCED == "python":
    kernels = _purepy
    HAVE_COMPILED = False
else:
    try:
        from . import _core as _compiled

        kernels = _compiled
        HAVE_COMPILED = True
    except ImportError:
        if _FORCED == "compiled":
            raise RuntimeError(
                "MAPCHAOS_BACKEND=compiled but the mapchaos._core extension "
                "is not built; reinstall the package or drop the override"
            )
        kernels = _purepy
        HAVE_COMPILED = False


def active_backend() -> str:
    """Name of the kernel backend in use ('compiled' or 'python')."""
    return "compiled" if kernels is not _purepy else "python"


def get_kernels(name: str | None = None):
    """Kernel module by name; ``None`` returns the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _purepy
    if name == "compiled":
        from . import _core as _compiled

        return _compiled
    raise ValueError(f"unknown backend {name!r}")
