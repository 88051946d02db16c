"""Backend selection for the collision quadrature kernels.

The compiled extension (Cython + OpenMP) is preferred; the pure-numpy
reference implementation is used when the extension is unavailable or when
``KINHYDRO_BACKEND=python`` is set.  ``KINHYDRO_THREADS`` caps the worker
count of the compiled kernels.
"""

import os

from . import _py_kernels

_FORCED = os.environ.get("KINHYDRO_BACKEND", "").strip().lower()

if _FORCED in ("", "compiled", "c"):
    try:
        from . import _kernels as _impl
    except ImportError:
        if _FORCED:
            raise
        _impl = _py_kernels
elif _FORCED in ("python", "py", "numpy"):
    _impl = _py_kernels
else:
    raise RuntimeError(f"unknown KINHYDRO_BACKEND value: {_FORCED!r}")

BACKEND_NAME = "compiled" if _impl.HAVE_COMPILED else "python"

MODE_FULL = _py_kernels.MODE_FULL
MODE_A_DELTA = _py_kernels.MODE_A_DELTA
MODE_B_BAR = _py_kernels.MODE_B_BAR
MODE_B_TILDE = _py_kernels.MODE_B_TILDE


def num_threads():
    env = os.environ.get("KINHYDRO_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def q_bilinear(nodes, x0, dv, n_axis, d, w_cell, sig, wsig2, m_vec, f_t, g_t,
               same):
    return _impl.q_bilinear(nodes, x0, dv, n_axis, d, w_cell, sig, wsig2,
                            m_vec, f_t, g_t, same, num_threads())


def assemble_linear(nodes, x0, dv, n_axis, d, w_cell, sig, wsig2, m_vec, mode,
                    delta=0.0):
    return _impl.assemble_linear(nodes, x0, dv, n_axis, d, w_cell, sig, wsig2,
                                 m_vec, mode, delta, num_threads())
