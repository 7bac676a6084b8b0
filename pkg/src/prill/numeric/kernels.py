"""Hot numeric kernels: compiled when available, pure Python otherwise.

Set ``PRILL_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

BACKEND = "python"

if os.environ.get("PRILL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._kernels import aberth, horner, horner_d  # noqa: F401

        BACKEND = "compiled"
    except ImportError:
        pass

if BACKEND == "python":
    from ._kernels_py import aberth, horner, horner_d  # noqa: F401

__all__ = ["BACKEND", "aberth", "horner", "horner_d"]
