"""Backend selection for the eigensolver kernels.

The compiled extension is preferred when present; MESONDYN_PURE=1
forces the NumPy lane. Both lanes implement the same reduction and QL
iteration, so results agree to rounding, though they are not guaranteed
bit-identical across lanes.
"""
import os

if os.environ.get("MESONDYN_PURE", "0") == "1":
    from . import _kernels_py as _impl

    BACKEND = "pure"
else:
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "pure"

tred2 = _impl.tred2
accumulate_q = _impl.accumulate_q
tql2 = _impl.tql2
