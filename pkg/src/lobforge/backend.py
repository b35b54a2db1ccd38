"""Book-engine backend selection.

The compiled extension (``lobforge._kernel``) and the pure-Python fallback
(``lobforge._pykernel``) implement the same engine with identical integer
semantics.  The extension is preferred when importable; set
``LOBFORGE_FORCE_PYTHON=1`` to force the fallback (used by the benchmark and
by cross-backend tests).
"""

import os

from . import _pykernel

_FORCED_PYTHON = os.environ.get("LOBFORGE_FORCE_PYTHON", "") == "1"

try:  # pragma: no cover - exercised via the selected backend
    from . import _kernel as _cykernel
except ImportError:  # pragma: no cover
    _cykernel = None

DEFAULT_BACKEND = "cython" if (_cykernel is not None and not _FORCED_PYTHON) else "python"


def available_backends() -> tuple[str, ...]:
    return ("python", "cython") if _cykernel is not None else ("python",)


def make_engine(kind: str | None = None):
    """Instantiate a book engine of the requested backend (default: best)."""
    kind = kind or DEFAULT_BACKEND
    if kind == "python":
        return _pykernel.BookEngine()
    if kind == "cython":
        if _cykernel is None:
            raise RuntimeError("compiled kernel is not available in this build")
        return _cykernel.BookEngine()
    raise ValueError(f"unknown backend {kind!r}; expected 'python' or 'cython'")
