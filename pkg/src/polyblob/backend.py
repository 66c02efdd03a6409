"""Selects the compiled particle core, falling back to pure NumPy.

Set ``POLYBLOB_BACKEND=python`` (or ``compiled``) to force a choice;
``backend_name()`` reports what is actually in use.  Both backends expose
``free_energy``, ``free_energy_grad``, ``proximal_minimize`` and
``proximal_minimize_batch`` with identical semantics.
"""

from __future__ import annotations

import os

from . import _kernels_py

_forced = os.environ.get("POLYBLOB_BACKEND", "").strip().lower()

if _forced == "python":
    impl = _kernels_py
elif _forced == "compiled":
    from . import _kernels as impl  # hard error if forced but unavailable
else:
    try:
        from . import _kernels as impl
    except ImportError:
        impl = _kernels_py

POT_CODE = {"hookean": 0, "fene": 1}


def backend_name() -> str:
    return impl.NAME


def get_backend(name: str | None = None):
    """Return a backend module by name (None = the active one)."""
    if name is None:
        return impl
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")
