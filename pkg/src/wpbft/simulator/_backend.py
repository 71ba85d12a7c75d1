"""Import-time selection of the trial kernel implementation.

The compiled extension is preferred when it imports; otherwise the numpy
fallback runs. WPBFT_PURE=1 forces the fallback (useful for benchmarks
and cross-checking). The exploratory fixed-position variant exists only
in the numpy path.
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("WPBFT_PURE") == "1":
    _impl = _pure
else:
    try:
        from . import _kernel as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

BACKEND_NAME: str = _impl.NAME

run_chunk_iid = _impl.run_chunk_iid
run_chunk_geometric = _impl.run_chunk_geometric
run_chunk_fixed_positions = _pure.run_chunk_fixed_positions


def available_backends() -> dict[str, object]:
    """Importable kernel modules keyed by their backend name."""
    backends: dict[str, object] = {_pure.NAME: _pure}
    try:
        from . import _kernel
        backends[_kernel.NAME] = _kernel
    except ImportError:
        pass
    return backends
