"""Pick the compiled core when available, the pure-Python one otherwise.

Set ``ISOFK_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pycore

if os.environ.get("ISOFK_PURE_PYTHON") == "1":
    core = _pycore
    COMPILED = False
else:
    try:
        from . import _core as core  # type: ignore[attr-defined]
        COMPILED = True
    except ImportError:
        core = _pycore
        COMPILED = False

__all__ = ["core", "COMPILED", "_pycore"]
