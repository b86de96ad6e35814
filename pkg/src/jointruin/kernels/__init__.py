"""Path-scan kernels: compiled when the extension is built, numpy otherwise.

Set ``JOINTRUIN_PURE=1`` to force the numpy fallback.
"""

import os

from . import _fallback

NO_RUIN = _fallback.NO_RUIN

_compiled = None
if os.environ.get("JOINTRUIN_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _compiled
    except ImportError:
        _compiled = None

_impl = _compiled if _compiled is not None else _fallback
BACKEND = "compiled" if _compiled is not None else "python"

scan_joint = _impl.scan_joint
scan_joint_compounded = _impl.scan_joint_compounded
first_passage_levels = _impl.first_passage_levels


def backends():
    """Available implementations by name, for benchmarks and cross-checks."""
    out = {"python": _fallback}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out
