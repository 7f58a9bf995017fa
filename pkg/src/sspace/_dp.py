"""Kernel selection: the compiled DP when it was built, the Python twin otherwise.

Set ``SSPACE_DP_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os

from ._dp_py import run_dp as run_dp_python

try:
    from ._dp_core import run_dp as run_dp_compiled
except ImportError:
    run_dp_compiled = None

if run_dp_compiled is not None and os.environ.get("SSPACE_DP_BACKEND", "").lower() != "python":
    run_dp = run_dp_compiled
    BACKEND = "cython"
else:
    run_dp = run_dp_python
    BACKEND = "python"
