"""Select the compiled kernels when available, else the pure-Python ones.

Set ``GLYPHGATE_PURE=1`` to force the fallback (used by the benchmark and
the equivalence tests).
"""

import logging
import os

logger = logging.getLogger(__name__)


def _load(pure=None):
    if pure is None:
        pure = os.environ.get("GLYPHGATE_PURE", "") not in ("", "0")
    if not pure:
        try:
            from . import _ckernels as mod
            return mod
        except ImportError:
            logger.debug("compiled kernels unavailable, using pure Python")
    from . import _fallback as mod
    return mod


_impl = _load()

IMPLEMENTATION = _impl.IMPLEMENTATION
word_after = _impl.word_after
word_batch = _impl.word_batch
ocr_widths = _impl.ocr_widths


def implementation(pure=False):
    """Return a kernel module explicitly (``pure=True`` for the fallback)."""
    return _load(pure)
