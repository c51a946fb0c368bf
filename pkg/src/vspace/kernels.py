"""Backend selection for the modular exponentiation hot path.

The compiled Montgomery kernel is used when the extension was built;
otherwise the pure-Python implementation is used. Both expose
``ModContext(modulus)`` with ``pow`` and ``pow2``.
"""

from __future__ import annotations

from . import _pymodexp

try:
    from . import _cmodexp as _impl
except ImportError:  # extension not built
    _impl = _pymodexp

ModContext = _impl.ModContext
BACKEND: str = _impl.BACKEND
PyModContext = _pymodexp.ModContext


def compiled_available() -> bool:
    return _impl is not _pymodexp
