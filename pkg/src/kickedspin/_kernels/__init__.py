"""Kernel selection: compiled Cython extension if available, NumPy fallback otherwise.

Set ``KICKEDSPIN_PURE_PYTHON=1`` to force the fallback (used by the
benchmark and the cross-implementation tests).
"""

import os

if os.environ.get("KICKEDSPIN_PURE_PYTHON") == "1":
    from . import _classical_py as _impl
else:
    try:
        from . import _classical as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _classical_py as _impl

IMPL = _impl.IMPL
rk4_flow = _impl.rk4_flow
stroboscopic_run = _impl.stroboscopic_run
stroboscopic_batch = _impl.stroboscopic_batch


def load(name: str):
    """Load a specific implementation by name ('cython' or 'python')."""
    if name == "python":
        from . import _classical_py
        return _classical_py
    if name == "cython":
        from . import _classical  # type: ignore[attr-defined]
        return _classical
    raise ValueError(f"unknown kernel implementation {name!r}")
