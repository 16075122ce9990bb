"""Select the compiled kernels when available, else the numpy fallback.

Set ``HARMONIA_PURE=1`` to force the fallback.
"""
import logging
import os

from . import _fallback

log = logging.getLogger(__name__)

if os.environ.get("HARMONIA_PURE") == "1":
    _impl = _fallback
    NAME = "python"
else:
    try:
        from . import _speedups as _impl
        NAME = "cython"
    except ImportError:
        _impl = _fallback
        NAME = "python"
        log.debug("compiled kernels unavailable, using numpy fallback")

mean_value_iterate = _impl.mean_value_iterate
alternating_iterate = _impl.alternating_iterate
