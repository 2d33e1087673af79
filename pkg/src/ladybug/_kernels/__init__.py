"""Kernel selection: compiled extension when available, pure Python otherwise.

Set ``LADYBUG_PURE_PYTHON=1`` to force the fallback (used by the kernel
benchmark and the parity tests).
"""

from __future__ import annotations

import os

if os.environ.get("LADYBUG_PURE_PYTHON"):
    from ladybug._kernels import pure as _impl
else:
    try:
        from ladybug._kernels import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        from ladybug._kernels import pure as _impl  # type: ignore[no-redef]

IMPLEMENTATION: str = _impl.IMPLEMENTATION
sanitize_java = _impl.sanitize_java
split_tokens = _impl.split_tokens
split_tokens_with_offsets = _impl.split_tokens_with_offsets
porter_stem = _impl.porter_stem
