"""Backend selection for the Monte Carlo block drivers.

The compiled extension is optional: when the build produced ``_cy`` it is
used, otherwise the pure-Python twin takes over with identical semantics
(and, by construction, identical output bit for bit from the same
Generator state). ``BACKEND`` records which one won.
"""

from . import _py

try:
    from . import _cy  # type: ignore[attr-defined]

    _impl = _cy
    BACKEND = "compiled"
except ImportError:
    _cy = None
    _impl = _py
    BACKEND = "python"

imh_block = _impl.imh_block
gauss_block = _impl.gauss_block
rwmh_block = _impl.rwmh_block
one_shot_block = _impl.one_shot_block

MAX_REJECTION_ITER = _py.MAX_REJECTION_ITER


def backends():
    """Available backend modules keyed by name, for benchmarks and tests."""
    out = {"python": _py}
    if _cy is not None:
        out["compiled"] = _cy
    return out
