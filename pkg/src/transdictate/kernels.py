"""Backend selection for the numeric kernels.

The compiled extension is used when importable.  Setting the environment
variable ``TRANSDICTATE_PURE_PYTHON=1`` forces the numpy fallback.
"""

import importlib
import os

from transdictate import _pykernels

_NAMES = ("forward_backward", "forward_logprob", "viterbi", "trie_edit_distances")


def _load_compiled():
    if os.environ.get("TRANSDICTATE_PURE_PYTHON", "") not in ("", "0"):
        return None
    try:
        return importlib.import_module("transdictate._kernels")
    except ImportError:
        return None


_compiled = _load_compiled()
BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _pykernels

forward_backward = _impl.forward_backward
forward_logprob = _impl.forward_logprob
viterbi = _impl.viterbi
trie_edit_distances = _impl.trie_edit_distances


def backends():
    """Return ``{name: module}`` for every available backend."""
    out = {"python": _pykernels}
    compiled = _compiled
    if compiled is None:
        try:
            compiled = importlib.import_module("transdictate._kernels")
        except ImportError:
            compiled = None
    if compiled is not None:
        out["cython"] = compiled
    return out


__all__ = ["BACKEND", "backends", *_NAMES]
