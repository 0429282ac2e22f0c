"""Kernel selection: the compiled extension when importable, else pure Python."""

import os

try:
    if os.environ.get("HULLINV_PURE"):
        raise ImportError
    from ._kernels import fm_combine  # type: ignore[attr-defined]

    BACKEND = "compiled"
except ImportError:
    from ._kernels_py import fm_combine

    BACKEND = "python"

__all__ = ["fm_combine", "BACKEND"]
