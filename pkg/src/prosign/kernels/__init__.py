"""Kernel backend selection.

The compiled extension (``prosign._accel``) is preferred when it imported
cleanly; the NumPy reference implementation is the fallback.  Set
``PROSIGN_PURE=1`` to force the fallback (used by the parity tests and the
benchmark).
"""
from __future__ import annotations

import os

from . import reference

if os.environ.get("PROSIGN_PURE") == "1":
    _impl = reference
else:
    try:
        from prosign import _accel as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = reference

IMPL_NAME: str = _impl.IMPL_NAME
autocorr_frames = _impl.autocorr_frames
correlate_valid = _impl.correlate_valid
viterbi_pitch = _impl.viterbi_pitch

__all__ = ["IMPL_NAME", "autocorr_frames", "correlate_valid", "viterbi_pitch", "reference"]
